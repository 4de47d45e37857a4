#pragma once

// Slotted energy-harvesting sensor network dynamics.
//
// Per slot, each node i spends alloc[i][i] energy on its own transmission
// and alloc[i][j] on energy shared to node j; everything a node receives is
// burned for transmission in the same slot. The conversion law
// g(x) = log2(1+x) maps spent energy to transmittable packets. Data and
// energy arrivals land at the end of the slot and both buffers clip at
// their capacities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "emplab/rng.hpp"

namespace emplab {

enum class Mode { Sharing, NoSharing, Centralized };

inline std::string to_string(Mode m) {
    switch (m) {
        case Mode::Sharing: return "sharing";
        case Mode::NoSharing: return "nosharing";
        case Mode::Centralized: return "centralized";
    }
    return "?";
}

enum class DistKind { Poisson, Deterministic, Empirical };

// Arrival process parameters. Poisson is the model of record; the
// deterministic and empirical kinds are stubs for tests.
struct ArrivalModel {
    std::vector<double> lambda_data;    // mean packets/slot per node
    std::vector<double> lambda_energy;  // mean energy units/slot per node
    DistKind kind = DistKind::Poisson;
    std::vector<std::vector<int>> empirical_data;       // per node sample pool
    std::vector<std::vector<double>> empirical_energy;  // per node sample pool
};

struct EnvConfig {
    int n_nodes = 2;
    int d_max = 10;
    double e_max = 10.0;
    ArrivalModel arrivals;
    Mode mode = Mode::Sharing;
    std::uint64_t seed = 0;
    bool random_start = false;

    void validate() const {
        if (n_nodes < 1) throw std::invalid_argument("EnvConfig: n_nodes must be >= 1");
        if (d_max < 1) throw std::invalid_argument("EnvConfig: d_max must be >= 1");
        if (!(e_max > 0.0)) throw std::invalid_argument("EnvConfig: e_max must be > 0");
        const auto n = static_cast<std::size_t>(n_nodes);
        if (arrivals.lambda_data.size() != n || arrivals.lambda_energy.size() != n)
            throw std::invalid_argument("EnvConfig: arrival means must have one entry per node");
        for (double l : arrivals.lambda_data)
            if (!(l >= 0.0) || !std::isfinite(l))
                throw std::invalid_argument("EnvConfig: data arrival means must be finite and >= 0");
        for (double l : arrivals.lambda_energy)
            if (!(l >= 0.0) || !std::isfinite(l))
                throw std::invalid_argument("EnvConfig: energy arrival means must be finite and >= 0");
    }

    // Energy buffer capacity of node i. Centralized mode pools all storage
    // at node 0 (capacity N*E_max); the other buffers are absent.
    double energy_cap(int i) const {
        if (mode == Mode::Centralized) return i == 0 ? n_nodes * e_max : 0.0;
        return e_max;
    }
};

// Joint MDP state: per-node data queue (packets) and energy level (units).
struct NetworkState {
    std::vector<int> queues;
    std::vector<double> energies;

    int nodes() const { return static_cast<int>(queues.size()); }

    bool satisfies_bounds(const EnvConfig& cfg) const {
        for (int i = 0; i < nodes(); ++i) {
            if (queues[i] < 0 || queues[i] > cfg.d_max) return false;
            if (energies[i] < 0.0 || energies[i] > cfg.energy_cap(i)) return false;
        }
        return true;
    }
};

// N x N joint action. alloc(i,i) is node i's own transmission energy,
// alloc(i,j) the energy shared from i to j.
class AllocationMatrix {
public:
    AllocationMatrix() = default;
    explicit AllocationMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    int nodes() const { return n_; }
    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
    double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }

    // Energy node i gives away this slot (transmission + shares).
    double row_sum(int i) const {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += at(i, j);
        return s;
    }

    // Energy arriving at node i's transmitter: own allocation first, then
    // shares from the others in node order, matching the update equation.
    double incoming(int i) const {
        double s = at(i, i);
        for (int j = 0; j < n_; ++j)
            if (j != i) s += at(j, i);
        return s;
    }

    const std::vector<double>& flat() const { return a_; }

private:
    int n_ = 0;
    std::vector<double> a_;
};

struct Arrivals {
    std::vector<int> data;      // X_i, packets
    std::vector<double> energy; // Y_i, energy units
};

struct StepStats {
    long long packets_transmitted = 0;
    long long packets_dropped = 0;  // queue overflow at arrival
    double energy_wasted = 0.0;     // energy-buffer overflow at harvest
    std::vector<int> post_action_queues;
};

struct StepResult {
    NetworkState next;
    double cost = 0.0;
    StepStats stats;
};

// g(x) = log2(1+x): packets transmittable with x energy.
inline double conversion_bits(double energy) {
    if (!(energy >= 0.0)) throw std::domain_error("conversion_bits: negative energy");
    return std::log2(1.0 + energy);
}

// Quadratic single-stage cost over post-action queue lengths.
inline double single_stage_cost(const std::vector<int>& post_action_queues) {
    double c = 0.0;
    for (int q : post_action_queues) c += static_cast<double>(q) * q;
    return c;
}

// Maps raw actor outputs in [0,1]^(NxN) onto a feasible allocation. Row i
// is scaled by node i's available energy; oversubscribed rows (fraction sum
// above 1) are normalized so the row spends exactly the available energy.
// Mode masks are applied before scaling: NoSharing keeps only the diagonal,
// Centralized keeps only row 0 (the pool).
inline AllocationMatrix project_action(const std::vector<double>& raw,
                                       const NetworkState& state,
                                       const EnvConfig& cfg) {
    const int n = state.nodes();
    if (raw.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("project_action: raw action is not N*N for the given state");

    AllocationMatrix alloc(n);
    for (int i = 0; i < n; ++i) {
        double frac_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double r = raw[static_cast<std::size_t>(i) * n + j];
            if (cfg.mode == Mode::NoSharing && i != j) r = 0.0;
            if (cfg.mode == Mode::Centralized && i != 0) r = 0.0;
            alloc.at(i, j) = r;
            frac_sum += r;
        }
        const double scale = frac_sum <= 1.0 ? state.energies[i] : state.energies[i] / frac_sum;
        for (int j = 0; j < n; ++j) alloc.at(i, j) *= scale;
    }
    return alloc;
}

namespace detail {

inline void check_action_feasible(const NetworkState& state, const AllocationMatrix& action,
                                  const EnvConfig& cfg) {
    const int n = state.nodes();
    if (action.nodes() != n)
        throw std::invalid_argument("step: action dimension does not match state");
    for (int i = 0; i < n; ++i) {
        const double out = action.row_sum(i);
        // Tolerance only absorbs round-off from the projection itself.
        if (out > state.energies[i] * (1.0 + 1e-12) + 1e-12)
            throw std::invalid_argument("step: action row " + std::to_string(i) +
                                        " spends more energy than available");
        for (int j = 0; j < n; ++j) {
            if (action.at(i, j) < 0.0)
                throw std::invalid_argument("step: negative allocation entry");
            if (cfg.mode == Mode::NoSharing && i != j && action.at(i, j) != 0.0)
                throw std::invalid_argument("step: sharing is disabled in NoSharing mode");
            if (cfg.mode == Mode::Centralized && i != 0 && action.at(i, j) != 0.0)
                throw std::invalid_argument("step: only the pool allocates in Centralized mode");
        }
    }
}

}  // namespace detail

// One slot of network dynamics. Arrivals are passed in explicitly so the
// function stays pure; callers sample them via sample_arrivals.
inline StepResult step(const NetworkState& state, const AllocationMatrix& action,
                       const Arrivals& arrivals, const EnvConfig& cfg) {
    const int n = state.nodes();
    if (arrivals.data.size() != static_cast<std::size_t>(n) ||
        arrivals.energy.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("step: arrivals dimension does not match state");
    detail::check_action_feasible(state, action, cfg);

    StepResult r;
    r.next.queues.resize(n);
    r.next.energies.resize(n);
    r.stats.post_action_queues.resize(n);

    for (int i = 0; i < n; ++i) {
        // Transmission: whole packets only; fractional capacity is lost.
        const int packets = static_cast<int>(std::floor(conversion_bits(action.incoming(i))));
        const int sent = std::min(state.queues[i], packets);
        const int post_q = state.queues[i] - sent;
        r.stats.post_action_queues[i] = post_q;
        r.stats.packets_transmitted += sent;

        // Data arrivals, tail-dropped at D_max.
        const int unclipped_q = post_q + arrivals.data[i];
        r.next.queues[i] = std::min(unclipped_q, cfg.d_max);
        r.stats.packets_dropped += unclipped_q - r.next.queues[i];

        // Energy spend then harvest, clipped at the buffer capacity.
        const double after_spend = std::max(0.0, state.energies[i] - action.row_sum(i));
        double harvested = arrivals.energy[i];
        if (cfg.mode == Mode::Centralized) {
            if (i == 0) {
                harvested = 0.0;
                for (double y : arrivals.energy) harvested += y;
            } else {
                harvested = 0.0;
            }
        }
        const double unclipped_e = after_spend + harvested;
        r.next.energies[i] = std::min(unclipped_e, cfg.energy_cap(i));
        r.stats.energy_wasted += unclipped_e - r.next.energies[i];
    }
    r.cost = single_stage_cost(r.stats.post_action_queues);
    return r;
}

// Draws one slot of arrivals. Independent across nodes and between data and
// energy; deterministic given the generator state.
inline Arrivals sample_arrivals(const ArrivalModel& model, Rng& rng) {
    const std::size_t n = model.lambda_data.size();
    Arrivals a;
    a.data.resize(n);
    a.energy.resize(n);
    switch (model.kind) {
        case DistKind::Poisson:
            for (std::size_t i = 0; i < n; ++i) a.data[i] = rng.poisson(model.lambda_data[i]);
            for (std::size_t i = 0; i < n; ++i) a.energy[i] = rng.poisson(model.lambda_energy[i]);
            break;
        case DistKind::Deterministic:
            for (std::size_t i = 0; i < n; ++i)
                a.data[i] = static_cast<int>(std::llround(model.lambda_data[i]));
            for (std::size_t i = 0; i < n; ++i) a.energy[i] = model.lambda_energy[i];
            break;
        case DistKind::Empirical:
            if (model.empirical_data.size() != n || model.empirical_energy.size() != n)
                throw std::invalid_argument("sample_arrivals: empirical pools must cover every node");
            for (std::size_t i = 0; i < n; ++i) {
                const auto& pool = model.empirical_data[i];
                if (pool.empty()) throw std::invalid_argument("sample_arrivals: empty empirical pool");
                a.data[i] = pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)];
            }
            for (std::size_t i = 0; i < n; ++i) {
                const auto& pool = model.empirical_energy[i];
                if (pool.empty()) throw std::invalid_argument("sample_arrivals: empty empirical pool");
                a.energy[i] = pool[rng.uniform_int(0, static_cast<int>(pool.size()) - 1)];
            }
            break;
    }
    return a;
}

// Maximum sustainable total data rate: E[g(sum_i Y_i)] with the pooled
// energy arrival ~ Poisson(sum_i lambda_E). The pmf sum is truncated once
// the remaining tail mass drops below 1e-12.
inline double critical_rate(const EnvConfig& cfg) {
    double lambda = 0.0;
    for (double l : cfg.arrivals.lambda_energy) lambda += l;
    if (cfg.arrivals.kind == DistKind::Deterministic) return conversion_bits(lambda);
    if (cfg.arrivals.kind == DistKind::Empirical)
        throw std::invalid_argument("critical_rate: undefined for the empirical stub distribution");
    if (lambda == 0.0) return 0.0;

    double p = std::exp(-lambda);
    double cum = p;
    double rate = 0.0;  // y = 0 contributes g(1) = 0
    int y = 0;
    while (cum < 1.0 - 1e-12) {
        ++y;
        p *= lambda / y;
        cum += p;
        rate += p * std::log2(1.0 + static_cast<double>(y));
    }
    return rate;
}

// Initial state: empty buffers, or uniform-random fills when the config
// asks for a randomized start.
inline NetworkState reset(const EnvConfig& cfg, Rng& rng) {
    cfg.validate();
    NetworkState s;
    s.queues.assign(cfg.n_nodes, 0);
    s.energies.assign(cfg.n_nodes, 0.0);
    if (cfg.random_start) {
        for (int i = 0; i < cfg.n_nodes; ++i) {
            s.queues[i] = rng.uniform_int(0, cfg.d_max);
            s.energies[i] = rng.uniform(0.0, cfg.energy_cap(i));
        }
    }
    return s;
}

}  // namespace emplab
