#pragma once

// The three controllers compared by the experiment harness:
//   DdpgAgent     - actor/critic energy-sharing controller (Sharing mode)
//   DqnAgent      - discrete-allocation baseline over a pooled buffer
//                   (Centralized mode)
//   TabularQAgent - independent per-node Q tables, own transmission only
//                   (NoSharing mode)
//
// Everything follows the cost-minimization convention: Q estimates
// discounted cost-to-go, action selection is argmin, and the DDPG actor
// descends the critic.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "emplab/env.hpp"
#include "emplab/neural.hpp"
#include "emplab/noise.hpp"
#include "emplab/replay.hpp"
#include "emplab/rng.hpp"

namespace emplab {

// --- shared helpers ---------------------------------------------------------

// Joint state flattened as (q_1, E_1, ..., q_N, E_N).
inline std::vector<double> flatten_state(const NetworkState& s) {
    std::vector<double> f(2 * static_cast<std::size_t>(s.nodes()));
    for (int i = 0; i < s.nodes(); ++i) {
        f[2 * i] = static_cast<double>(s.queues[i]);
        f[2 * i + 1] = s.energies[i];
    }
    return f;
}

// Network inputs: the flattened state with each entry normalized by its
// buffer capacity, so every feature lives in [0,1].
inline std::vector<double> features_from_flat(const std::vector<double>& flat, const EnvConfig& cfg) {
    std::vector<double> f(flat.size());
    for (int i = 0; i < cfg.n_nodes; ++i) {
        f[2 * i] = flat[2 * i] / cfg.d_max;
        const double cap = cfg.energy_cap(i);
        f[2 * i + 1] = cap > 0.0 ? flat[2 * i + 1] / cap : 0.0;
    }
    return f;
}

inline std::vector<double> state_features(const NetworkState& s, const EnvConfig& cfg) {
    return features_from_flat(flatten_state(s), cfg);
}

// Energy level -> bin index, capped at the top bin implied by e_max.
inline int discretize(double energy, double bin_width, double e_max) {
    if (energy < 0.0) throw std::domain_error("discretize: negative energy");
    if (!(bin_width > 0.0)) throw std::invalid_argument("discretize: bin width must be > 0");
    const int top = static_cast<int>(std::floor(e_max / bin_width));
    return std::min(static_cast<int>(std::floor(energy / bin_width)), top);
}

struct EpsilonSchedule {
    double value = 1.0;
    double decay = 0.995;
    double floor = 0.05;

    void end_episode() { value = std::max(floor, value * decay); }
};

// --- DDPG (sharing model) ----------------------------------------------------

struct DdpgConfig {
    double gamma = 0.9;
    double tau = 0.005;
    enum class TargetMode { soft, best_trigger };
    TargetMode target_mode = TargetMode::soft;
    int batch_size = 64;
    std::size_t replay_capacity = 100000;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    int actor_period = 1;          // actor (and target) updates every k-th train step
    double actor_weight_decay = 0.0;  // L2 pull against output saturation
    Optimizer::Kind optimizer = Optimizer::Kind::adam;
    std::vector<int> hidden = {2, 4};
    Activation hidden_act = Activation::tanh;
    NoiseProcess::Kind noise_kind = NoiseProcess::Kind::gaussian;
    double noise_sigma = 0.2;
    double noise_decay = 0.995;
    double noise_floor = 0.05;
    double noise_theta = 0.15;
    bool act_with_target = false;  // Fig-2-faithful variant: target actor acts
    double cost_scale = 0.0;       // 0 -> 1/(N * d_max^2)
};

class DdpgAgent {
public:
    DdpgAgent(EnvConfig env, DdpgConfig cfg, Rng& init_rng)
        : env_(std::move(env)),
          cfg_(cfg),
          buffer_(cfg.replay_capacity),
          noise_(cfg.noise_kind, cfg.noise_sigma, cfg.noise_decay,
                 std::min(cfg.noise_floor, cfg.noise_sigma), cfg.noise_theta) {
        env_.validate();
        if (!(cfg_.gamma >= 0.0 && cfg_.gamma < 1.0))
            throw std::invalid_argument("DdpgAgent: gamma must lie in [0,1)");
        const int n = env_.n_nodes;
        if (cfg_.cost_scale <= 0.0)
            cfg_.cost_scale = 1.0 / (static_cast<double>(n) * env_.d_max * env_.d_max);

        std::vector<int> actor_dims{2 * n};
        std::vector<int> critic_dims{2 * n + n * n};
        for (int h : cfg_.hidden) {
            actor_dims.push_back(h);
            critic_dims.push_back(h);
        }
        actor_dims.push_back(n * n);
        critic_dims.push_back(1);
        actor_ = make_mlp(actor_dims, cfg_.hidden_act, Activation::sigmoid, init_rng);
        critic_ = make_mlp(critic_dims, cfg_.hidden_act, Activation::identity, init_rng);
        target_actor_ = actor_;
        target_critic_ = critic_;
        actor_opt_ = Optimizer{cfg_.optimizer, cfg_.actor_lr};
        critic_opt_ = Optimizer{cfg_.optimizer, cfg_.critic_lr};
    }

    struct ActionChoice {
        std::vector<double> raw;  // pre-projection, in [0,1]^(N*N)
        AllocationMatrix projected;
    };

    ActionChoice select_action(const NetworkState& state, bool explore, Rng& rng) {
        const auto& net = cfg_.act_with_target ? target_actor_ : actor_;
        ActionChoice c;
        c.raw = forward(net, state_features(state, env_));
        if (explore) {
            const auto n = noise_.sample(c.raw.size(), rng);
            for (std::size_t k = 0; k < c.raw.size(); ++k)
                c.raw[k] = std::clamp(c.raw[k] + n[k], 0.0, 1.0);
        }
        c.projected = project_action(c.raw, state, env_);
        return c;
    }

    void push_transition(const NetworkState& s, const std::vector<double>& raw, double cost,
                         const NetworkState& next) {
        buffer_.push(Transition{flatten_state(s), raw, cost, flatten_state(next)});
    }

    struct TrainResult {
        double critic_loss = 0.0;
        double actor_objective = 0.0;
    };

    TrainResult train_step(Rng& rng) {
        const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng);
        const int n = env_.n_nodes;
        const double inv_b = 1.0 / static_cast<double>(batch.size());

        // Critic regression toward y = c + gamma * Q'(s', mu'(s')).
        NetGradients critic_grads;
        critic_grads.init_like(critic_);
        double critic_loss = 0.0;
        for (const Transition* t : batch) {
            const auto feat = features_from_flat(t->state, env_);
            const auto feat2 = features_from_flat(t->next_state, env_);
            const auto a2 = forward(target_actor_, feat2);
            const double q2 = forward(target_critic_, concat(feat2, a2))[0];
            const double y = t->cost * cfg_.cost_scale + cfg_.gamma * q2;
            const auto in = concat(feat, t->action);
            const double pred = forward(critic_, in)[0];
            const double err = pred - y;
            critic_loss += err * err * inv_b;
            critic_grads.accumulate(backward(critic_, in, {2.0 * err * inv_b}));
        }
        apply_update(critic_, critic_grads, critic_opt_);

        // Actor descends Q(s, mu(s)): chain the critic's input gradient
        // through the action slice into the actor. Deferring the actor a few
        // critic steps keeps it from chasing a stale value surface.
        ++train_steps_;
        double actor_objective = 0.0;
        if (train_steps_ % cfg_.actor_period == 0) {
            NetGradients actor_grads;
            actor_grads.init_like(actor_);
            for (const Transition* t : batch) {
                const auto feat = features_from_flat(t->state, env_);
                const auto a = forward(actor_, feat);
                const auto in = concat(feat, a);
                actor_objective += forward(critic_, in)[0] * inv_b;
                const auto through_critic = backward(critic_, in, {inv_b});
                std::vector<double> da(through_critic.dinput.begin() + 2 * n,
                                       through_critic.dinput.end());
                actor_grads.accumulate(backward(actor_, feat, da));
            }
            if (cfg_.actor_weight_decay > 0.0) {
                for (std::size_t l = 0; l < actor_.layers.size(); ++l)
                    for (std::size_t k = 0; k < actor_grads.dw[l].size(); ++k)
                        actor_grads.dw[l][k] += cfg_.actor_weight_decay * actor_.layers[l].w[k];
            }
            apply_update(actor_, actor_grads, actor_opt_);

            if (cfg_.target_mode == DdpgConfig::TargetMode::soft) {
                soft_update(target_actor_, actor_, cfg_.tau);
                soft_update(target_critic_, critic_, cfg_.tau);
            }
        }

        if (!actor_.finite() || !critic_.finite())
            throw std::runtime_error("DdpgAgent: parameters diverged (non-finite)");
        return TrainResult{critic_loss, actor_objective};
    }

    void hard_update_targets() {
        soft_update(target_actor_, actor_, 1.0);
        soft_update(target_critic_, critic_, 1.0);
    }

    void end_episode() { noise_.end_episode(); }

    // Unscaled cost-to-go estimate at (state, raw action); test hook.
    double critic_value(const NetworkState& state, const std::vector<double>& raw) const {
        const auto in = concat(state_features(state, env_), raw);
        return forward(critic_, in)[0] / cfg_.cost_scale;
    }

    std::size_t buffer_size() const { return buffer_.size(); }
    int batch_size() const { return cfg_.batch_size; }
    double noise_sigma() const { return noise_.sigma; }
    double gamma() const { return cfg_.gamma; }
    const EnvConfig& env() const { return env_; }
    const DdpgConfig& config() const { return cfg_; }
    const FeedforwardNetwork& actor() const { return actor_; }
    const FeedforwardNetwork& critic() const { return critic_; }
    const FeedforwardNetwork& target_actor() const { return target_actor_; }
    const FeedforwardNetwork& target_critic() const { return target_critic_; }

    void save(std::ostream& os) const {
        os << "agent 1\n";
        os << "kind sharing\n";
        os << "n_nodes " << env_.n_nodes << "\n";
        os << "d_max " << env_.d_max << "\n";
        os << "e_max " << format_double(env_.e_max) << "\n";
        os << "gamma " << format_double(cfg_.gamma) << "\n";
        os << "tau " << format_double(cfg_.tau) << "\n";
        os << "batch_size " << cfg_.batch_size << "\n";
        os << "noise_kind " << to_string(noise_.kind) << "\n";
        os << "noise_sigma " << format_double(noise_.sigma) << "\n";
        os << "noise_decay " << format_double(noise_.decay) << "\n";
        os << "noise_floor " << format_double(noise_.floor) << "\n";
        os << "act_with_target " << (cfg_.act_with_target ? 1 : 0) << "\n";
        os << "cost_scale " << format_double(cfg_.cost_scale) << "\n";
        os << "[actor]\n";
        save_network(os, actor_);
        os << "[critic]\n";
        save_network(os, critic_);
        os << "[target_actor]\n";
        save_network(os, target_actor_);
        os << "[target_critic]\n";
        save_network(os, target_critic_);
    }

    // Restores networks and schedule state into a freshly configured agent.
    static DdpgAgent load(std::istream& is, EnvConfig env, DdpgConfig cfg) {
        std::string key;
        int version = 0;
        is >> key >> version;
        if (key != "agent" || version != 1) throw std::runtime_error("DdpgAgent::load: bad header");
        int n_nodes = -1;
        while (is >> key && key != "[actor]") {
            if (key == "kind") {
                std::string v;
                is >> v;
                if (v != "sharing") throw std::runtime_error("DdpgAgent::load: checkpoint kind is " + v);
            } else if (key == "n_nodes") {
                is >> n_nodes;
            } else if (key == "d_max") {
                is >> env.d_max;
            } else if (key == "e_max") {
                is >> env.e_max;
            } else if (key == "gamma") {
                is >> cfg.gamma;
            } else if (key == "tau") {
                is >> cfg.tau;
            } else if (key == "batch_size") {
                is >> cfg.batch_size;
            } else if (key == "noise_kind") {
                std::string v;
                is >> v;
                cfg.noise_kind = noise_kind_from_string(v);
            } else if (key == "noise_sigma") {
                is >> cfg.noise_sigma;
            } else if (key == "noise_decay") {
                is >> cfg.noise_decay;
            } else if (key == "noise_floor") {
                is >> cfg.noise_floor;
            } else if (key == "act_with_target") {
                int v;
                is >> v;
                cfg.act_with_target = v != 0;
            } else if (key == "cost_scale") {
                is >> cfg.cost_scale;
            } else {
                std::string skip;
                std::getline(is, skip);
            }
        }
        if (n_nodes != env.n_nodes)
            throw std::runtime_error("DdpgAgent::load: checkpoint is for n_nodes=" +
                                     std::to_string(n_nodes) + ", config has n_nodes=" +
                                     std::to_string(env.n_nodes));
        Rng scratch(0);
        DdpgAgent agent(env, cfg, scratch);
        auto read_section = [&](const std::string& tag, FeedforwardNetwork& net) {
            if (tag != "[actor]") {
                std::string t;
                is >> t;
                if (t != tag) throw std::runtime_error("DdpgAgent::load: expected " + tag);
            }
            net = load_network(is);
        };
        read_section("[actor]", agent.actor_);
        read_section("[critic]", agent.critic_);
        read_section("[target_actor]", agent.target_actor_);
        read_section("[target_critic]", agent.target_critic_);
        if (agent.actor_.input_size() != 2 * env.n_nodes ||
            agent.actor_.output_size() != env.n_nodes * env.n_nodes)
            throw std::runtime_error("DdpgAgent::load: actor dimensions do not match n_nodes");
        return agent;
    }

private:
    static std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> out;
        out.reserve(a.size() + b.size());
        out.insert(out.end(), a.begin(), a.end());
        out.insert(out.end(), b.begin(), b.end());
        return out;
    }

    EnvConfig env_;
    DdpgConfig cfg_;
    FeedforwardNetwork actor_, critic_, target_actor_, target_critic_;
    Optimizer actor_opt_, critic_opt_;
    ReplayBuffer buffer_;
    NoiseProcess noise_;
    long long train_steps_ = 0;
};

// --- DQN (centralized model) --------------------------------------------------

struct DqnConfig {
    double gamma = 0.9;
    int batch_size = 64;
    std::size_t replay_capacity = 100000;
    double lr = 1e-3;
    Optimizer::Kind optimizer = Optimizer::Kind::adam;
    std::vector<int> hidden = {2, 4};
    Activation hidden_act = Activation::tanh;
    int levels = 5;  // per-node integer grant from the pool: {0, ..., levels-1}
    double epsilon0 = 1.0;
    double epsilon_decay = 0.995;
    double epsilon_floor = 0.05;
    int target_period = 500;  // hard target copy every this many train steps
    double cost_scale = 0.0;
};

class DqnAgent {
public:
    static constexpr std::size_t kMaxCatalog = 200000;

    DqnAgent(EnvConfig env, DqnConfig cfg, Rng& init_rng) : env_(std::move(env)), cfg_(cfg), buffer_(cfg.replay_capacity) {
        env_.validate();
        if (env_.mode != Mode::Centralized)
            throw std::invalid_argument("DqnAgent: requires Centralized mode");
        if (cfg_.levels < 1) throw std::invalid_argument("DqnAgent: levels must be >= 1");
        const int n = env_.n_nodes;
        double size = 1.0;
        for (int i = 0; i < n; ++i) size *= cfg_.levels;
        if (size > static_cast<double>(kMaxCatalog))
            throw std::invalid_argument("DqnAgent: action catalog levels^N = " +
                                        std::to_string(size) + " exceeds the tractable cap");
        catalog_size_ = static_cast<std::size_t>(size);
        totals_.resize(catalog_size_);
        for (std::size_t i = 0; i < catalog_size_; ++i) {
            int total = 0;
            std::size_t idx = i;
            for (int k = 0; k < n; ++k) {
                total += static_cast<int>(idx % cfg_.levels);
                idx /= cfg_.levels;
            }
            totals_[i] = total;
        }
        if (cfg_.cost_scale <= 0.0)
            cfg_.cost_scale = 1.0 / (static_cast<double>(n) * env_.d_max * env_.d_max);

        std::vector<int> dims{2 * n};
        for (int h : cfg_.hidden) dims.push_back(h);
        dims.push_back(static_cast<int>(catalog_size_));
        qnet_ = make_mlp(dims, cfg_.hidden_act, Activation::identity, init_rng);
        target_ = qnet_;
        opt_ = Optimizer{cfg_.optimizer, cfg_.lr};
        epsilon_ = EpsilonSchedule{cfg_.epsilon0, cfg_.epsilon_decay, cfg_.epsilon_floor};
    }

    std::size_t catalog_size() const { return catalog_size_; }

    // Catalog index -> per-node integer grants, node 0 least significant.
    std::vector<int> decode(std::size_t index) const {
        std::vector<int> levels(env_.n_nodes);
        for (int i = 0; i < env_.n_nodes; ++i) {
            levels[i] = static_cast<int>(index % cfg_.levels);
            index /= cfg_.levels;
        }
        return levels;
    }

    bool feasible(std::size_t index, double pool_energy) const {
        return static_cast<double>(totals_[index]) <= pool_energy;
    }

    AllocationMatrix to_alloc(std::size_t index, const NetworkState& state) const {
        const auto levels = decode(index);
        AllocationMatrix a(env_.n_nodes);
        for (int j = 0; j < env_.n_nodes; ++j) a.at(0, j) = static_cast<double>(levels[j]);
        (void)state;
        return a;
    }

    // Epsilon-greedy argmin over the feasible slice of the catalog; ties go
    // to the lowest index.
    std::size_t select_action(const NetworkState& state, bool explore, Rng& rng) {
        if (catalog_size_ == 0) throw std::runtime_error("DqnAgent: empty catalog");
        const double pool = state.energies[0];
        if (explore && rng.uniform() < epsilon_.value) {
            const int max_total = (cfg_.levels - 1) * env_.n_nodes;
            if (static_cast<double>(max_total) <= pool)
                return static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<int>(catalog_size_) - 1));
            std::vector<std::size_t> feasible_idx;
            feasible_idx.reserve(catalog_size_);
            for (std::size_t i = 0; i < catalog_size_; ++i)
                if (feasible(i, pool)) feasible_idx.push_back(i);
            return feasible_idx[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(feasible_idx.size()) - 1))];
        }
        const auto q = forward(qnet_, state_features(state, env_));
        return masked_argmin(q, pool);
    }

    void push_transition(const NetworkState& s, std::size_t action, double cost,
                         const NetworkState& next) {
        buffer_.push(Transition{flatten_state(s), {static_cast<double>(action)}, cost,
                                flatten_state(next)});
    }

    double train_step(Rng& rng) {
        const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng);
        const double inv_b = 1.0 / static_cast<double>(batch.size());
        NetGradients grads;
        grads.init_like(qnet_);
        double loss = 0.0;
        for (const Transition* t : batch) {
            const auto feat = features_from_flat(t->state, env_);
            const auto feat2 = features_from_flat(t->next_state, env_);
            const double pool2 = t->next_state[1];  // pooled buffer is node 0's slot
            const auto q2 = forward(target_, feat2);
            const double best_next = q2[masked_argmin(q2, pool2)];
            const double y = t->cost * cfg_.cost_scale + cfg_.gamma * best_next;
            const auto q = forward(qnet_, feat);
            const auto a = static_cast<std::size_t>(t->action[0]);
            const double err = q[a] - y;
            loss += err * err * inv_b;
            std::vector<double> upstream(catalog_size_, 0.0);
            upstream[a] = 2.0 * err * inv_b;
            grads.accumulate(backward(qnet_, feat, upstream));
        }
        apply_update(qnet_, grads, opt_);
        if (!qnet_.finite()) throw std::runtime_error("DqnAgent: parameters diverged (non-finite)");
        ++train_steps_;
        if (cfg_.target_period > 0 && train_steps_ % cfg_.target_period == 0) target_ = qnet_;
        return loss;
    }

    void end_episode() { epsilon_.end_episode(); }

    double epsilon() const { return epsilon_.value; }
    std::size_t buffer_size() const { return buffer_.size(); }
    int batch_size() const { return cfg_.batch_size; }
    double gamma() const { return cfg_.gamma; }
    const EnvConfig& env() const { return env_; }
    const DqnConfig& config() const { return cfg_; }
    const FeedforwardNetwork& qnet() const { return qnet_; }
    FeedforwardNetwork& qnet_mutable() { return qnet_; }

    double q_value(const NetworkState& state, std::size_t index) const {
        return forward(qnet_, state_features(state, env_))[index] / cfg_.cost_scale;
    }

    void save(std::ostream& os) const {
        os << "agent 1\n";
        os << "kind centralized\n";
        os << "n_nodes " << env_.n_nodes << "\n";
        os << "d_max " << env_.d_max << "\n";
        os << "e_max " << format_double(env_.e_max) << "\n";
        os << "gamma " << format_double(cfg_.gamma) << "\n";
        os << "levels " << cfg_.levels << "\n";
        os << "epsilon " << format_double(epsilon_.value) << "\n";
        os << "epsilon_decay " << format_double(epsilon_.decay) << "\n";
        os << "epsilon_floor " << format_double(epsilon_.floor) << "\n";
        os << "cost_scale " << format_double(cfg_.cost_scale) << "\n";
        os << "[qnet]\n";
        save_network(os, qnet_);
        os << "[target_qnet]\n";
        save_network(os, target_);
    }

    static DqnAgent load(std::istream& is, EnvConfig env, DqnConfig cfg) {
        std::string key;
        int version = 0;
        is >> key >> version;
        if (key != "agent" || version != 1) throw std::runtime_error("DqnAgent::load: bad header");
        int n_nodes = -1;
        double epsilon = cfg.epsilon0;
        while (is >> key && key != "[qnet]") {
            if (key == "kind") {
                std::string v;
                is >> v;
                if (v != "centralized") throw std::runtime_error("DqnAgent::load: checkpoint kind is " + v);
            } else if (key == "n_nodes") {
                is >> n_nodes;
            } else if (key == "d_max") {
                is >> env.d_max;
            } else if (key == "e_max") {
                is >> env.e_max;
            } else if (key == "gamma") {
                is >> cfg.gamma;
            } else if (key == "levels") {
                is >> cfg.levels;
            } else if (key == "epsilon") {
                is >> epsilon;
            } else if (key == "epsilon_decay") {
                is >> cfg.epsilon_decay;
            } else if (key == "epsilon_floor") {
                is >> cfg.epsilon_floor;
            } else if (key == "cost_scale") {
                is >> cfg.cost_scale;
            } else {
                std::string skip;
                std::getline(is, skip);
            }
        }
        if (n_nodes != env.n_nodes)
            throw std::runtime_error("DqnAgent::load: checkpoint is for n_nodes=" +
                                     std::to_string(n_nodes) + ", config has n_nodes=" +
                                     std::to_string(env.n_nodes));
        Rng scratch(0);
        DqnAgent agent(env, cfg, scratch);
        agent.epsilon_.value = epsilon;
        agent.qnet_ = load_network(is);
        std::string tag;
        is >> tag;
        if (tag != "[target_qnet]") throw std::runtime_error("DqnAgent::load: expected [target_qnet]");
        agent.target_ = load_network(is);
        if (agent.qnet_.output_size() != static_cast<int>(agent.catalog_size_))
            throw std::runtime_error("DqnAgent::load: qnet output does not match catalog size");
        return agent;
    }

private:
    std::size_t masked_argmin(const std::vector<double>& q, double pool_energy) const {
        std::size_t best = catalog_size_;
        double best_q = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < catalog_size_; ++i) {
            if (!feasible(i, pool_energy)) continue;
            if (q[i] < best_q) {
                best_q = q[i];
                best = i;
            }
        }
        if (best == catalog_size_) throw std::runtime_error("DqnAgent: no feasible action");
        return best;
    }

    EnvConfig env_;
    DqnConfig cfg_;
    std::size_t catalog_size_ = 0;
    std::vector<int> totals_;  // per-index sum of grants, for feasibility masks
    FeedforwardNetwork qnet_, target_;
    Optimizer opt_;
    ReplayBuffer buffer_;
    EpsilonSchedule epsilon_;
    long long train_steps_ = 0;
};

// --- tabular Q (no-sharing model) ---------------------------------------------

struct TabularQConfig {
    double gamma = 0.9;
    double beta = 0.1;             // constant learning rate ...
    bool beta_visit_decay = false; // ... or 1/visit-count when set
    double epsilon0 = 1.0;
    double epsilon_decay = 0.995;
    double epsilon_floor = 0.05;
    double bin_width = 1.0;
};

// One Q table per node over (queue, energy bin, transmit level); each node
// spends only on its own transmission. Action level u allocates u*bin_width
// energy, feasible when u does not exceed the node's energy bin.
class TabularQAgent {
public:
    TabularQAgent(EnvConfig env, TabularQConfig cfg) : env_(std::move(env)), cfg_(cfg) {
        env_.validate();
        if (!(cfg_.bin_width > 0.0)) throw std::invalid_argument("TabularQAgent: bin width must be > 0");
        n_q_ = env_.d_max + 1;
        n_e_ = discretize(env_.e_max, cfg_.bin_width, env_.e_max) + 1;
        n_a_ = n_e_;
        tables_.assign(env_.n_nodes,
                       std::vector<double>(static_cast<std::size_t>(n_q_) * n_e_ * n_a_, 0.0));
        visits_.assign(env_.n_nodes,
                       std::vector<long>(static_cast<std::size_t>(n_q_) * n_e_ * n_a_, 0));
        epsilon_ = EpsilonSchedule{cfg_.epsilon0, cfg_.epsilon_decay, cfg_.epsilon_floor};
    }

    int energy_bins() const { return n_e_; }
    int levels() const { return n_a_; }

    double q_value(int node, int q, int e_bin, int level) const {
        return tables_[node][index(q, e_bin, level)];
    }

    int select_level(int node, int q, double energy, bool explore, Rng& rng) {
        const int e_bin = discretize(energy, cfg_.bin_width, env_.e_max);
        if (explore && rng.uniform() < epsilon_.value) return rng.uniform_int(0, e_bin);
        int best = 0;
        double best_q = tables_[node][index(q, e_bin, 0)];
        for (int a = 1; a <= e_bin; ++a) {
            const double v = tables_[node][index(q, e_bin, a)];
            if (v < best_q) {
                best_q = v;
                best = a;
            }
        }
        return best;
    }

    AllocationMatrix act(const NetworkState& state, bool explore, Rng& rng) {
        AllocationMatrix a(env_.n_nodes);
        for (int i = 0; i < env_.n_nodes; ++i) {
            const int level = select_level(i, state.queues[i], state.energies[i], explore, rng);
            a.at(i, i) = level * cfg_.bin_width;
        }
        return a;
    }

    // Q(s,a) <- (1-beta) Q(s,a) + beta (cost + gamma min_a' Q(s',a')), with
    // the minimum restricted to levels feasible at the next state.
    void update(int node, int q, double energy, int level, double cost, int next_q,
                double next_energy) {
        const int e_bin = discretize(energy, cfg_.bin_width, env_.e_max);
        if (level < 0 || level > e_bin)
            throw std::invalid_argument("TabularQAgent::update: infeasible action level");
        const int e2 = discretize(next_energy, cfg_.bin_width, env_.e_max);
        double best_next = tables_[node][index(next_q, e2, 0)];
        for (int a = 1; a <= e2; ++a)
            best_next = std::min(best_next, tables_[node][index(next_q, e2, a)]);
        const std::size_t idx = index(q, e_bin, level);
        visits_[node][idx] += 1;
        const double beta = cfg_.beta_visit_decay ? 1.0 / static_cast<double>(visits_[node][idx])
                                                  : cfg_.beta;
        tables_[node][idx] = (1.0 - beta) * tables_[node][idx] +
                             beta * (cost + cfg_.gamma * best_next);
    }

    void end_episode() { epsilon_.end_episode(); }

    double epsilon() const { return epsilon_.value; }
    double gamma() const { return cfg_.gamma; }
    double bin_width() const { return cfg_.bin_width; }
    const EnvConfig& env() const { return env_; }
    const TabularQConfig& config() const { return cfg_; }

    bool finite() const {
        for (const auto& t : tables_)
            for (double v : t)
                if (!std::isfinite(v)) return false;
        return true;
    }

    void save(std::ostream& os) const {
        os << "agent 1\n";
        os << "kind nosharing\n";
        os << "n_nodes " << env_.n_nodes << "\n";
        os << "d_max " << env_.d_max << "\n";
        os << "e_max " << format_double(env_.e_max) << "\n";
        os << "gamma " << format_double(cfg_.gamma) << "\n";
        os << "beta " << format_double(cfg_.beta) << "\n";
        os << "bin_width " << format_double(cfg_.bin_width) << "\n";
        os << "epsilon " << format_double(epsilon_.value) << "\n";
        os << "[tables]\n";
        os << "dims " << n_q_ << " " << n_e_ << " " << n_a_ << "\n";
        for (const auto& t : tables_) {
            os << "node";
            for (double v : t) os << " " << format_double(v);
            os << "\n";
        }
    }

    static TabularQAgent load(std::istream& is, EnvConfig env, TabularQConfig cfg) {
        std::string key;
        int version = 0;
        is >> key >> version;
        if (key != "agent" || version != 1) throw std::runtime_error("TabularQAgent::load: bad header");
        int n_nodes = -1;
        double epsilon = cfg.epsilon0;
        while (is >> key && key != "[tables]") {
            if (key == "kind") {
                std::string v;
                is >> v;
                if (v != "nosharing")
                    throw std::runtime_error("TabularQAgent::load: checkpoint kind is " + v);
            } else if (key == "n_nodes") {
                is >> n_nodes;
            } else if (key == "d_max") {
                is >> env.d_max;
            } else if (key == "e_max") {
                is >> env.e_max;
            } else if (key == "gamma") {
                is >> cfg.gamma;
            } else if (key == "beta") {
                is >> cfg.beta;
            } else if (key == "bin_width") {
                is >> cfg.bin_width;
            } else if (key == "epsilon") {
                is >> epsilon;
            } else {
                std::string skip;
                std::getline(is, skip);
            }
        }
        if (n_nodes != env.n_nodes)
            throw std::runtime_error("TabularQAgent::load: checkpoint is for n_nodes=" +
                                     std::to_string(n_nodes) + ", config has n_nodes=" +
                                     std::to_string(env.n_nodes));
        TabularQAgent agent(env, cfg);
        agent.epsilon_.value = epsilon;
        is >> key;
        if (key != "dims") throw std::runtime_error("TabularQAgent::load: expected dims");
        int nq, ne, na;
        is >> nq >> ne >> na;
        if (nq != agent.n_q_ || ne != agent.n_e_ || na != agent.n_a_)
            throw std::runtime_error("TabularQAgent::load: table dimensions do not match config");
        for (auto& t : agent.tables_) {
            is >> key;
            if (key != "node") throw std::runtime_error("TabularQAgent::load: expected node row");
            for (double& v : t) is >> v;
        }
        if (!is) throw std::runtime_error("TabularQAgent::load: truncated checkpoint");
        return agent;
    }

private:
    std::size_t index(int q, int e_bin, int level) const {
        return (static_cast<std::size_t>(q) * n_e_ + e_bin) * n_a_ + level;
    }

    EnvConfig env_;
    TabularQConfig cfg_;
    int n_q_ = 0, n_e_ = 0, n_a_ = 0;
    std::vector<std::vector<double>> tables_;
    std::vector<std::vector<long>> visits_;
    EpsilonSchedule epsilon_;
};

}  // namespace emplab
