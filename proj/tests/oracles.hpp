#pragma once

// Test-only reference implementations, kept independent of the library
// code paths they check.

#include <cmath>
#include <vector>

#include "emplab/neural.hpp"
#include "emplab/rng.hpp"

namespace oracle {

// Independent evaluation of dot(net(x), upstream) for finite-difference
// gradient checks. Optionally reports how close any relu pre-activation
// comes to its kink, where finite differences stop being meaningful.
inline double mlp_objective(const emplab::FeedforwardNetwork& net, const std::vector<double>& x,
                            const std::vector<double>& upstream, double* min_abs_z = nullptr) {
    std::vector<double> act = x;
    if (min_abs_z) *min_abs_z = 1e300;
    for (const auto& layer : net.layers) {
        std::vector<double> next(layer.out);
        for (int o = 0; o < layer.out; ++o) {
            double z = layer.b[o];
            for (int i = 0; i < layer.in; ++i) z += layer.w[o * layer.in + i] * act[i];
            if (min_abs_z && layer.act == emplab::Activation::relu)
                *min_abs_z = std::min(*min_abs_z, std::abs(z));
            next[o] = emplab::apply_activation(layer.act, z);
        }
        act = next;
    }
    double obj = 0.0;
    for (std::size_t k = 0; k < act.size(); ++k) obj += act[k] * upstream[k];
    return obj;
}

// Walks every parameter of a random net and compares backward() against
// central finite differences; returns the worst relative error seen over
// draws that stay clear of relu kinks.
inline double gradient_check_worst_error(emplab::Rng& rng, int n_nets) {
    using namespace emplab;
    const Activation pool[] = {Activation::relu, Activation::tanh, Activation::sigmoid,
                               Activation::identity};
    const double h = 1e-5;
    double worst = 0.0;
    int checked = 0;
    while (checked < n_nets) {
        const int n_layers = rng.uniform_int(1, 3);
        std::vector<int> dims{rng.uniform_int(1, 8)};
        for (int l = 0; l < n_layers; ++l) dims.push_back(rng.uniform_int(1, 8));
        FeedforwardNetwork net =
            make_mlp(dims, pool[rng.uniform_int(0, 3)], pool[rng.uniform_int(0, 3)], rng);
        std::vector<double> x(dims.front());
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        std::vector<double> upstream(dims.back());
        for (double& v : upstream) v = rng.uniform(-1.0, 1.0);

        double min_z = 0.0;
        mlp_objective(net, x, upstream, &min_z);
        if (min_z < 1e-3) continue;

        const auto grads = backward(net, x, upstream);
        auto probe = [&](double& param, double analytic) {
            const double keep = param;
            param = keep + h;
            const double up = mlp_objective(net, x, upstream);
            param = keep - h;
            const double dn = mlp_objective(net, x, upstream);
            param = keep;
            const double numeric = (up - dn) / (2.0 * h);
            const double rel = std::abs(analytic - numeric) /
                               std::max({1.0, std::abs(analytic), std::abs(numeric)});
            worst = std::max(worst, rel);
        };
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            for (std::size_t k = 0; k < net.layers[l].w.size(); ++k)
                probe(net.layers[l].w[k], grads.dw[l][k]);
            for (std::size_t k = 0; k < net.layers[l].b.size(); ++k)
                probe(net.layers[l].b[k], grads.db[l][k]);
        }
        ++checked;
    }
    return worst;
}

// Straight transcription of the per-slot update equations with clipping:
//   q' = clip([q - floor(g(T + sum_{j!=i} A_ji))]^+ + X, 0, D_max)
//   E' = clip(E - T - sum_{j!=i} A_ij + Y, 0, E_cap)
struct StepOut {
    std::vector<int> next_q;
    std::vector<double> next_e;
    double cost = 0.0;
    long long sent = 0;
    long long dropped = 0;
    double wasted = 0.0;
};

inline StepOut brute_force_step(const std::vector<int>& q, const std::vector<double>& e,
                                const std::vector<std::vector<double>>& alloc,
                                const std::vector<int>& x, const std::vector<double>& y,
                                int d_max, double e_cap) {
    const int n = static_cast<int>(q.size());
    StepOut out;
    out.next_q.resize(n);
    out.next_e.resize(n);
    for (int i = 0; i < n; ++i) {
        double used = alloc[i][i];
        for (int j = 0; j < n; ++j)
            if (j != i) used += alloc[j][i];
        const int bits = static_cast<int>(std::floor(std::log2(1.0 + used)));
        int post = q[i] - bits;
        if (post < 0) post = 0;
        out.sent += q[i] - post;
        out.cost += static_cast<double>(post) * post;
        int q2 = post + x[i];
        if (q2 > d_max) {
            out.dropped += q2 - d_max;
            q2 = d_max;
        }
        out.next_q[i] = q2;

        double spend = alloc[i][i];
        for (int j = 0; j < n; ++j)
            if (j != i) spend += alloc[i][j];
        double e2 = e[i] - spend;
        if (e2 < 0.0) e2 = 0.0;
        e2 += y[i];
        if (e2 > e_cap) {
            out.wasted += e2 - e_cap;
            e2 = e_cap;
        }
        out.next_e[i] = e2;
    }
    return out;
}

// Random dyadic (quarter-unit) state/action/arrival triples. Quarter-grid
// values keep every double sum exact, so oracle and implementation must
// agree bitwise, not merely within rounding.
struct Triple {
    std::vector<int> q;
    std::vector<double> e;
    std::vector<std::vector<double>> alloc;
    std::vector<int> x;
    std::vector<double> y;
};

inline Triple random_triple(int n, int d_max, double e_max, emplab::Rng& rng) {
    Triple t;
    t.q.resize(n);
    t.e.resize(n);
    t.x.resize(n);
    t.y.resize(n);
    t.alloc.assign(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        t.q[i] = rng.uniform_int(0, d_max);
        t.e[i] = rng.uniform_int(0, static_cast<int>(e_max * 4)) / 4.0;
        t.x[i] = rng.uniform_int(0, 6);
        t.y[i] = rng.uniform_int(0, 48) / 4.0;
        double budget = t.e[i];
        for (int j = 0; j < n; ++j) {
            const int quarters = rng.uniform_int(0, static_cast<int>(budget * 4));
            t.alloc[i][j] = quarters / 4.0;
            budget -= t.alloc[i][j];
        }
    }
    return t;
}

// Q* for a finite deterministic MDP by value iteration on the Bellman
// minimum, run to fixed point.
inline std::vector<std::vector<double>> value_iteration(
    const std::vector<std::vector<double>>& cost, const std::vector<std::vector<int>>& next,
    double gamma, double tol = 1e-13) {
    const std::size_t ns = cost.size();
    const std::size_t na = cost.front().size();
    std::vector<std::vector<double>> q(ns, std::vector<double>(na, 0.0));
    double delta = 1.0;
    while (delta > tol) {
        delta = 0.0;
        for (std::size_t s = 0; s < ns; ++s)
            for (std::size_t a = 0; a < na; ++a) {
                double best = q[next[s][a]][0];
                for (std::size_t b = 1; b < na; ++b) best = std::min(best, q[next[s][a]][b]);
                const double updated = cost[s][a] + gamma * best;
                delta = std::max(delta, std::abs(updated - q[s][a]));
                q[s][a] = updated;
            }
    }
    return q;
}

}  // namespace oracle
