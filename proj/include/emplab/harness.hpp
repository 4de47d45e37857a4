#pragma once

// Training and evaluation protocols plus the experiment sweeps: the
// two-node comparison grid, the 9x9 arrival heatmap, and the scalability
// table. Sweep cells are independent jobs (own env, agent, generator) and
// run on a small worker pool; results merge in cell order so output is
// reproducible regardless of scheduling.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "emplab/agents.hpp"
#include "emplab/env.hpp"
#include "emplab/rng.hpp"

namespace emplab {

enum class ModelKind { sharing, centralized, nosharing };

inline std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::sharing: return "sharing";
        case ModelKind::centralized: return "centralized";
        case ModelKind::nosharing: return "nosharing";
    }
    return "?";
}

inline ModelKind model_from_string(const std::string& s) {
    if (s == "sharing") return ModelKind::sharing;
    if (s == "centralized") return ModelKind::centralized;
    if (s == "nosharing") return ModelKind::nosharing;
    throw std::invalid_argument("unknown model: " + s);
}

inline Mode mode_for(ModelKind m) {
    switch (m) {
        case ModelKind::sharing: return Mode::Sharing;
        case ModelKind::centralized: return Mode::Centralized;
        case ModelKind::nosharing: return Mode::NoSharing;
    }
    return Mode::Sharing;
}

struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- long-run metrics ---------------------------------------------------------

struct Metrics {
    double avg_queue_length = 0.0;    // mean over slots and nodes
    double data_loss_pct = 0.0;       // 100 * dropped / arrived
    double est_discounted_cost = 0.0; // empirical discounted cost from the start state
    std::vector<double> per_node_queue;
    std::vector<double> per_node_loss_pct;
    long long arrived = 0;
    long long transmitted = 0;
    long long dropped = 0;
    double energy_wasted = 0.0;
    long long window_start_queue = 0;  // total backlog entering the window
    long long window_end_queue = 0;    // total backlog after the last slot
};

using GreedyPolicy = std::function<AllocationMatrix(const NetworkState&)>;

inline GreedyPolicy greedy_policy(DdpgAgent& agent) {
    return [&agent](const NetworkState& s) {
        Rng unused(0);
        return agent.select_action(s, false, unused).projected;
    };
}

inline GreedyPolicy greedy_policy(DqnAgent& agent) {
    return [&agent](const NetworkState& s) {
        Rng unused(0);
        return agent.to_alloc(agent.select_action(s, false, unused), s);
    };
}

inline GreedyPolicy greedy_policy(TabularQAgent& agent) {
    return [&agent](const NetworkState& s) {
        Rng unused(0);
        return agent.act(s, false, unused);
    };
}

// One evaluation rollout. Queue/loss statistics cover the post-burn-in
// window; the discounted cost is accumulated from slot 0 as in the
// objective definition.
inline Metrics evaluate_single(const EnvConfig& cfg, const GreedyPolicy& policy, int horizon,
                               int burn_in, std::uint64_t seed, double gamma) {
    if (horizon <= burn_in) throw std::invalid_argument("evaluate: horizon must exceed burn-in");
    const int n = cfg.n_nodes;
    Metrics m;
    m.per_node_queue.assign(n, 0.0);
    m.per_node_loss_pct.assign(n, 0.0);
    std::vector<long long> arrived_node(n, 0), dropped_node(n, 0);

    Rng rng(seed);
    NetworkState s = reset(cfg, rng);
    double discount = 1.0;
    double queue_sum = 0.0;
    for (int k = 0; k < horizon; ++k) {
        if (k == burn_in)
            for (int q : s.queues) m.window_start_queue += q;
        const AllocationMatrix a = policy(s);
        const Arrivals arr = sample_arrivals(cfg.arrivals, rng);
        StepResult r = step(s, a, arr, cfg);
        m.est_discounted_cost += discount * r.cost;
        discount *= gamma;
        if (k >= burn_in) {
            for (int i = 0; i < n; ++i) {
                queue_sum += r.next.queues[i];
                m.per_node_queue[i] += r.next.queues[i];
                arrived_node[i] += arr.data[i];
            }
            m.transmitted += r.stats.packets_transmitted;
            m.dropped += r.stats.packets_dropped;
            m.energy_wasted += r.stats.energy_wasted;
            // stats do not say which node dropped; recompute from the slot
            for (int i = 0; i < n; ++i) {
                const int unclipped = r.stats.post_action_queues[i] + arr.data[i];
                dropped_node[i] += unclipped - r.next.queues[i];
            }
        }
        s = std::move(r.next);
    }
    for (int q : s.queues) m.window_end_queue += q;
    const double slots = static_cast<double>(horizon - burn_in);
    m.avg_queue_length = queue_sum / (slots * n);
    for (int i = 0; i < n; ++i) {
        m.per_node_queue[i] /= slots;
        m.arrived += arrived_node[i];
        m.per_node_loss_pct[i] =
            arrived_node[i] > 0 ? 100.0 * dropped_node[i] / arrived_node[i] : 0.0;
    }
    m.data_loss_pct = m.arrived > 0 ? 100.0 * m.dropped / m.arrived : 0.0;
    return m;
}

inline Metrics average_metrics(const std::vector<Metrics>& per_seed) {
    if (per_seed.empty()) throw std::invalid_argument("average_metrics: no seeds");
    Metrics m;
    const int n = static_cast<int>(per_seed.front().per_node_queue.size());
    m.per_node_queue.assign(n, 0.0);
    m.per_node_loss_pct.assign(n, 0.0);
    const double inv = 1.0 / static_cast<double>(per_seed.size());
    for (const auto& s : per_seed) {
        m.avg_queue_length += s.avg_queue_length * inv;
        m.data_loss_pct += s.data_loss_pct * inv;
        m.est_discounted_cost += s.est_discounted_cost * inv;
        for (int i = 0; i < n; ++i) {
            m.per_node_queue[i] += s.per_node_queue[i] * inv;
            m.per_node_loss_pct[i] += s.per_node_loss_pct[i] * inv;
        }
        m.arrived += s.arrived;
        m.transmitted += s.transmitted;
        m.dropped += s.dropped;
        m.energy_wasted += s.energy_wasted;
        m.window_start_queue += s.window_start_queue;
        m.window_end_queue += s.window_end_queue;
    }
    return m;
}

inline Metrics evaluate(const EnvConfig& cfg, const GreedyPolicy& policy, int horizon, int burn_in,
                        const std::vector<std::uint64_t>& seeds, double gamma = 0.9) {
    if (seeds.empty()) throw std::invalid_argument("evaluate: need at least one seed");
    std::vector<Metrics> per_seed;
    per_seed.reserve(seeds.size());
    for (std::uint64_t s : seeds)
        per_seed.push_back(evaluate_single(cfg, policy, horizon, burn_in, s, gamma));
    return average_metrics(per_seed);
}

// --- training loop --------------------------------------------------------------

struct TrainBudget {
    int episodes = 2000;
    int slots_per_episode = 200;
};

struct TrainOptions {
    int eval_slots = 200;  // greedy probe after each episode, feeds the log
    int best_window = 10;  // trailing episodes in the best-trigger metric
};

struct TrainingLogRow {
    int episode = 0;
    double mean_cost = 0.0;
    std::optional<double> critic_loss;
    std::optional<double> actor_objective;
    std::optional<double> epsilon;
    std::optional<double> sigma;
    double eval_cost = 0.0;
};

struct TrainingLog {
    std::vector<TrainingLogRow> rows;
};

namespace detail {

template <class Agent>
inline double probe_eval_cost(const EnvConfig& cfg, Agent& agent, int slots, std::uint64_t seed) {
    Rng rng(seed);
    NetworkState s = reset(cfg, rng);
    GreedyPolicy policy = greedy_policy(agent);
    double total = 0.0;
    for (int k = 0; k < slots; ++k) {
        StepResult r = step(s, policy(s), sample_arrivals(cfg.arrivals, rng), cfg);
        total += r.cost;
        s = std::move(r.next);
    }
    return total / slots;
}

}  // namespace detail

// Runs episodes of act / step / store / learn. Deterministic given
// run_seed. Appends to `log` as it goes so a divergence abort still leaves
// the completed episodes behind.
template <class Agent>
void train_agent(const EnvConfig& cfg, Agent& agent, const TrainBudget& budget,
                 std::uint64_t run_seed, TrainingLog& log, const TrainOptions& opts = {}) {
    constexpr bool is_ddpg = std::is_same_v<Agent, DdpgAgent>;
    constexpr bool is_dqn = std::is_same_v<Agent, DqnAgent>;
    constexpr bool is_tabq = std::is_same_v<Agent, TabularQAgent>;
    static_assert(is_ddpg || is_dqn || is_tabq, "train_agent: unsupported agent type");

    Rng rng(derive_seed(run_seed, 0x7472));
    std::deque<double> recent_eval;
    double best_eval = std::numeric_limits<double>::infinity();

    for (int ep = 0; ep < budget.episodes; ++ep) {
        NetworkState s = reset(cfg, rng);
        double cost_sum = 0.0;
        double loss_sum = 0.0, obj_sum = 0.0;
        int train_calls = 0;

        for (int slot = 0; slot < budget.slots_per_episode; ++slot) {
            AllocationMatrix alloc;
            std::vector<double> raw;
            std::size_t action_index = 0;
            if constexpr (is_ddpg) {
                auto choice = agent.select_action(s, true, rng);
                raw = std::move(choice.raw);
                alloc = std::move(choice.projected);
            } else if constexpr (is_dqn) {
                action_index = agent.select_action(s, true, rng);
                alloc = agent.to_alloc(action_index, s);
            } else {
                alloc = agent.act(s, true, rng);
            }

            const Arrivals arr = sample_arrivals(cfg.arrivals, rng);
            StepResult r = step(s, alloc, arr, cfg);
            cost_sum += r.cost;

            if constexpr (is_ddpg) {
                agent.push_transition(s, raw, r.cost, r.next);
                if (agent.buffer_size() >= static_cast<std::size_t>(agent.batch_size())) {
                    const auto tr = agent.train_step(rng);
                    loss_sum += tr.critic_loss;
                    obj_sum += tr.actor_objective;
                    ++train_calls;
                }
            } else if constexpr (is_dqn) {
                agent.push_transition(s, action_index, r.cost, r.next);
                if (agent.buffer_size() >= static_cast<std::size_t>(agent.batch_size())) {
                    loss_sum += agent.train_step(rng);
                    ++train_calls;
                }
            } else {
                for (int i = 0; i < cfg.n_nodes; ++i) {
                    const int level =
                        static_cast<int>(std::llround(alloc.at(i, i) / agent.bin_width()));
                    const double node_cost = static_cast<double>(r.stats.post_action_queues[i]) *
                                             r.stats.post_action_queues[i];
                    agent.update(i, s.queues[i], s.energies[i], level, node_cost,
                                 r.next.queues[i], r.next.energies[i]);
                }
            }
            s = std::move(r.next);
        }

        agent.end_episode();

        TrainingLogRow row;
        row.episode = ep;
        row.mean_cost = cost_sum / budget.slots_per_episode;
        row.eval_cost =
            detail::probe_eval_cost(cfg, agent, opts.eval_slots, derive_seed(run_seed, 0x6576, ep));
        if constexpr (is_ddpg) {
            if (train_calls > 0) {
                row.critic_loss = loss_sum / train_calls;
                row.actor_objective = obj_sum / train_calls;
            }
            row.sigma = agent.noise_sigma();
        } else if constexpr (is_dqn) {
            if (train_calls > 0) row.critic_loss = loss_sum / train_calls;
            row.epsilon = agent.epsilon();
        } else {
            row.epsilon = agent.epsilon();
        }
        log.rows.push_back(row);

        if (!std::isfinite(row.mean_cost) || !std::isfinite(row.eval_cost))
            throw TrainingDiverged("training diverged at episode " + std::to_string(ep));

        if constexpr (is_ddpg) {
            if (agent.config().target_mode == DdpgConfig::TargetMode::best_trigger) {
                recent_eval.push_back(row.eval_cost);
                if (static_cast<int>(recent_eval.size()) > opts.best_window)
                    recent_eval.pop_front();
                double mean = 0.0;
                for (double v : recent_eval) mean += v;
                mean /= static_cast<double>(recent_eval.size());
                if (static_cast<int>(recent_eval.size()) == opts.best_window && mean < best_eval) {
                    best_eval = mean;
                    agent.hard_update_targets();
                }
            }
        }
    }
}

// --- experiment sweeps ------------------------------------------------------------

struct ExperimentSpec {
    EnvConfig base_env;  // node count, capacities and energy rates; data rates per sweep
    TrainBudget budget;
    TrainOptions train_opts;
    int eval_horizon = 20000;
    int burn_in = 1000;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    double gamma = 0.9;
    DdpgConfig ddpg;
    DqnConfig dqn;
    TabularQConfig tabq;
    std::vector<int> scalability_nodes = {2, 4, 6, 10};
    int dqn_node_cap = 6;
    std::uint64_t master_seed = 42;
    int workers = 0;  // 0 -> hardware concurrency

    void validate() const {
        if (eval_horizon <= burn_in)
            throw std::invalid_argument("ExperimentSpec: eval horizon must exceed burn-in");
        if (seeds.empty()) throw std::invalid_argument("ExperimentSpec: need at least one seed");
    }
};

struct SweepRow {
    double ex1 = 0.0;
    double ex2 = 0.0;
    int n_nodes = 0;
    ModelKind model = ModelKind::sharing;
    std::uint64_t seed = 0;
    bool is_mean = false;
    std::string status = "ok";  // ok | skipped | error:<what>
    Metrics metrics;
};

namespace detail {

inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    unsigned int nw = workers > 0 ? static_cast<unsigned int>(workers)
                                  : std::max(1u, std::thread::hardware_concurrency());
    nw = std::min<unsigned int>(nw, static_cast<unsigned int>(count));
    if (nw <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (unsigned int w = 0; w < nw; ++w)
        pool.emplace_back([&]() {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

// Trains one model on one env from one seed and evaluates it greedily.
inline Metrics train_and_evaluate(ModelKind model, EnvConfig env, const ExperimentSpec& spec,
                                  std::uint64_t cell_seed) {
    env.mode = mode_for(model);
    env.validate();
    TrainingLog log;
    const std::uint64_t train_seed = derive_seed(cell_seed, 2);
    const std::vector<std::uint64_t> eval_seeds = {derive_seed(cell_seed, 3)};
    switch (model) {
        case ModelKind::sharing: {
            Rng init(derive_seed(cell_seed, 1));
            DdpgAgent agent(env, spec.ddpg, init);
            train_agent(env, agent, spec.budget, train_seed, log, spec.train_opts);
            return evaluate(env, greedy_policy(agent), spec.eval_horizon, spec.burn_in, eval_seeds,
                            spec.gamma);
        }
        case ModelKind::centralized: {
            Rng init(derive_seed(cell_seed, 1));
            DqnAgent agent(env, spec.dqn, init);
            train_agent(env, agent, spec.budget, train_seed, log, spec.train_opts);
            return evaluate(env, greedy_policy(agent), spec.eval_horizon, spec.burn_in, eval_seeds,
                            spec.gamma);
        }
        case ModelKind::nosharing: {
            TabularQAgent agent(env, spec.tabq);
            train_agent(env, agent, spec.budget, train_seed, log, spec.train_opts);
            return evaluate(env, greedy_policy(agent), spec.eval_horizon, spec.burn_in, eval_seeds,
                            spec.gamma);
        }
    }
    throw std::logic_error("train_and_evaluate: unreachable");
}

inline void append_means(std::vector<SweepRow>& rows, const std::vector<SweepRow>& cells,
                         const std::function<bool(const SweepRow&, const SweepRow&)>& same_group) {
    std::vector<bool> used(cells.size(), false);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (used[i]) continue;
        std::vector<Metrics> ok;
        SweepRow mean = cells[i];
        for (std::size_t j = i; j < cells.size(); ++j) {
            if (used[j] || !same_group(cells[i], cells[j])) continue;
            used[j] = true;
            if (cells[j].status == "ok") ok.push_back(cells[j].metrics);
        }
        mean.is_mean = true;
        mean.seed = 0;
        if (!ok.empty()) {
            mean.metrics = average_metrics(ok);
            mean.status = "ok";
        } else {
            mean.status = cells[i].status;
        }
        rows.push_back(std::move(mean));
    }
}

}  // namespace detail

inline std::vector<double> two_node_grid() {
    std::vector<double> g;
    for (int i = 0; i < 9; ++i) g.push_back(0.5 + 0.5 * i);
    return g;
}

// Fig-3A style comparison: node 1 pinned at E[X]=0.5, node 2 swept, all
// three models trained per grid point.
inline std::vector<SweepRow> sweep_two_node(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.base_env.n_nodes != 2)
        throw std::invalid_argument("sweep_two_node: requires a 2-node base config");
    const auto grid = two_node_grid();
    const ModelKind models[] = {ModelKind::sharing, ModelKind::centralized, ModelKind::nosharing};

    std::vector<SweepRow> cells;
    for (double ex2 : grid)
        for (ModelKind model : models)
            for (std::uint64_t seed : spec.seeds) {
                SweepRow row;
                row.ex1 = 0.5;
                row.ex2 = ex2;
                row.n_nodes = 2;
                row.model = model;
                row.seed = seed;
                cells.push_back(row);
            }

    detail::parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
        SweepRow& row = cells[i];
        EnvConfig env = spec.base_env;
        env.arrivals.lambda_data = {row.ex1, row.ex2};
        try {
            row.metrics = detail::train_and_evaluate(
                row.model, env, spec,
                derive_seed(spec.master_seed, static_cast<std::uint64_t>(row.ex2 * 2),
                            static_cast<std::uint64_t>(row.model), row.seed));
        } catch (const std::exception& e) {
            row.status = std::string("error:") + e.what();
        }
    });

    std::vector<SweepRow> rows = cells;
    detail::append_means(rows, cells, [](const SweepRow& a, const SweepRow& b) {
        return a.ex2 == b.ex2 && a.model == b.model;
    });
    return rows;
}

// Fig-3B style 9x9 heatmap of the sharing model alone.
inline std::vector<SweepRow> sweep_heatmap(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.base_env.n_nodes != 2)
        throw std::invalid_argument("sweep_heatmap: requires a 2-node base config");
    const auto grid = two_node_grid();

    std::vector<SweepRow> cells;
    for (double ex1 : grid)
        for (double ex2 : grid)
            for (std::uint64_t seed : spec.seeds) {
                SweepRow row;
                row.ex1 = ex1;
                row.ex2 = ex2;
                row.n_nodes = 2;
                row.model = ModelKind::sharing;
                row.seed = seed;
                cells.push_back(row);
            }

    detail::parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
        SweepRow& row = cells[i];
        EnvConfig env = spec.base_env;
        env.arrivals.lambda_data = {row.ex1, row.ex2};
        try {
            row.metrics = detail::train_and_evaluate(
                ModelKind::sharing, env, spec,
                derive_seed(spec.master_seed, static_cast<std::uint64_t>(row.ex1 * 2) * 64 +
                                                  static_cast<std::uint64_t>(row.ex2 * 2),
                            0, row.seed));
        } catch (const std::exception& e) {
            row.status = std::string("error:") + e.what();
        }
    });

    std::vector<SweepRow> rows = cells;
    detail::append_means(rows, cells, [](const SweepRow& a, const SweepRow& b) {
        return a.ex1 == b.ex1 && a.ex2 == b.ex2;
    });
    return rows;
}

// Data arrival means for a scalability row: uniform in [0,4] (mean 2),
// fixed by (master seed, N) so every model sees the same load.
inline std::vector<double> scalability_arrivals(std::uint64_t master_seed, int n_nodes) {
    Rng rng(derive_seed(master_seed, 0x5ca1, static_cast<std::uint64_t>(n_nodes)));
    std::vector<double> lambda(n_nodes);
    for (double& l : lambda) l = rng.uniform(0.0, 4.0);
    return lambda;
}

// Fig-4 style table at desk scale. The centralized model is skipped above
// its catalog cap rather than failed.
inline std::vector<SweepRow> sweep_scalability(const ExperimentSpec& spec) {
    spec.validate();
    const ModelKind models[] = {ModelKind::sharing, ModelKind::centralized, ModelKind::nosharing};

    std::vector<SweepRow> cells;
    for (int n : spec.scalability_nodes)
        for (ModelKind model : models)
            for (std::uint64_t seed : spec.seeds) {
                SweepRow row;
                row.n_nodes = n;
                row.model = model;
                row.seed = seed;
                if (model == ModelKind::centralized && n > spec.dqn_node_cap)
                    row.status = "skipped";
                cells.push_back(row);
            }

    detail::parallel_for(cells.size(), spec.workers, [&](std::size_t i) {
        SweepRow& row = cells[i];
        if (row.status == "skipped") return;
        EnvConfig env = spec.base_env;
        env.n_nodes = row.n_nodes;
        env.arrivals.lambda_data = scalability_arrivals(spec.master_seed, row.n_nodes);
        env.arrivals.lambda_energy.assign(row.n_nodes, 5.0);
        try {
            row.metrics = detail::train_and_evaluate(
                row.model, env, spec,
                derive_seed(spec.master_seed, static_cast<std::uint64_t>(row.n_nodes),
                            static_cast<std::uint64_t>(row.model), row.seed));
        } catch (const std::exception& e) {
            row.status = std::string("error:") + e.what();
        }
    });

    std::vector<SweepRow> rows = cells;
    detail::append_means(rows, cells, [](const SweepRow& a, const SweepRow& b) {
        return a.n_nodes == b.n_nodes && a.model == b.model;
    });
    return rows;
}

// --- CSV emission ------------------------------------------------------------------

// Fixed conventions: '.' decimal point, ',' separator, LF line endings.
inline std::string format_csv(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

inline void write_training_log_csv(std::ostream& os, const TrainingLog& log) {
    os << "episode,mean_cost,critic_loss,actor_objective,epsilon,sigma,eval_cost\n";
    for (const auto& r : log.rows) {
        os << r.episode << "," << format_csv(r.mean_cost) << ",";
        if (r.critic_loss) os << format_csv(*r.critic_loss);
        os << ",";
        if (r.actor_objective) os << format_csv(*r.actor_objective);
        os << ",";
        if (r.epsilon) os << format_csv(*r.epsilon);
        os << ",";
        if (r.sigma) os << format_csv(*r.sigma);
        os << "," << format_csv(r.eval_cost) << "\n";
    }
}

inline void write_metrics_csv(std::ostream& os, const Metrics& mean,
                              const std::vector<Metrics>& per_seed,
                              const std::vector<std::uint64_t>& seeds) {
    const int n = static_cast<int>(mean.per_node_queue.size());
    os << "scope,avg_queue_length,data_loss_pct,est_discounted_cost,arrived,transmitted,dropped,"
          "energy_wasted";
    for (int i = 0; i < n; ++i) os << ",avg_queue_node" << i;
    for (int i = 0; i < n; ++i) os << ",loss_pct_node" << i;
    os << "\n";
    auto emit = [&](const std::string& scope, const Metrics& m) {
        os << scope << "," << format_csv(m.avg_queue_length) << "," << format_csv(m.data_loss_pct)
           << "," << format_csv(m.est_discounted_cost) << "," << m.arrived << "," << m.transmitted
           << "," << m.dropped << "," << format_csv(m.energy_wasted);
        for (int i = 0; i < n; ++i) os << "," << format_csv(m.per_node_queue[i]);
        for (int i = 0; i < n; ++i) os << "," << format_csv(m.per_node_loss_pct[i]);
        os << "\n";
    };
    emit("mean", mean);
    for (std::size_t k = 0; k < per_seed.size(); ++k)
        emit("seed:" + std::to_string(seeds[k]), per_seed[k]);
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows,
                            const std::string& kind) {
    const bool scal = kind == "scalability";
    if (scal)
        os << "n,model,seed,avg_queue_length,data_loss_pct,est_discounted_cost,status\n";
    else
        os << "ex1,ex2,model,seed,avg_queue_length,data_loss_pct,est_discounted_cost,status\n";
    for (const auto& r : rows) {
        if (scal)
            os << r.n_nodes;
        else
            os << format_csv(r.ex1) << "," << format_csv(r.ex2);
        os << "," << to_string(r.model) << ",";
        if (r.is_mean)
            os << "mean";
        else
            os << r.seed;
        if (r.status == "ok")
            os << "," << format_csv(r.metrics.avg_queue_length) << ","
               << format_csv(r.metrics.data_loss_pct) << ","
               << format_csv(r.metrics.est_discounted_cost);
        else
            os << ",,,";
        os << "," << r.status << "\n";
    }
}

}  // namespace emplab
