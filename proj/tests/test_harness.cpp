#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "emplab/harness.hpp"

using namespace emplab;

namespace {

EnvConfig env2(Mode mode = Mode::Sharing) {
    EnvConfig cfg;
    cfg.n_nodes = 2;
    cfg.arrivals.lambda_data = {0.5, 2.0};
    cfg.arrivals.lambda_energy = {5.0, 5.0};
    cfg.mode = mode;
    return cfg;
}

ExperimentSpec tiny_spec(Mode mode = Mode::Sharing) {
    ExperimentSpec spec;
    spec.base_env = env2(mode);
    spec.budget = TrainBudget{2, 30};
    spec.train_opts = TrainOptions{20, 5};
    spec.eval_horizon = 80;
    spec.burn_in = 20;
    spec.seeds = {1, 2};
    spec.workers = 2;
    spec.ddpg.batch_size = 8;
    spec.dqn.batch_size = 8;
    return spec;
}

GreedyPolicy spend_all_policy(const EnvConfig& cfg) {
    return [cfg](const NetworkState& s) {
        std::vector<double> raw(static_cast<std::size_t>(cfg.n_nodes) * cfg.n_nodes, 0.0);
        for (int i = 0; i < cfg.n_nodes; ++i) raw[i * cfg.n_nodes + i] = 1.0;
        return project_action(raw, s, cfg);
    };
}

}  // namespace

TEST_CASE("train with a zero budget leaves the agent untouched") {
    const EnvConfig cfg = env2();
    Rng init(1);
    DdpgAgent agent(cfg, DdpgConfig{}, init);
    std::stringstream before;
    agent.save(before);
    TrainingLog log;
    train_agent(cfg, agent, TrainBudget{0, 200}, 99, log);
    CHECK(log.rows.empty());
    std::stringstream after;
    agent.save(after);
    CHECK(after.str() == before.str());
}

TEST_CASE("training is deterministic given the seed") {
    const EnvConfig cfg = env2();
    auto run = [&](std::uint64_t seed) {
        Rng init(7);
        DdpgConfig dcfg;
        dcfg.batch_size = 8;
        DdpgAgent agent(cfg, dcfg, init);
        TrainingLog log;
        train_agent(cfg, agent, TrainBudget{4, 40}, seed, log, TrainOptions{20, 5});
        std::stringstream csv;
        write_training_log_csv(csv, log);
        return csv.str();
    };
    REQUIRE(run(5) == run(5));
    REQUIRE(run(5) != run(6));
}

TEST_CASE("training logs cover every episode with finite numbers") {
    const EnvConfig cfg = env2(Mode::NoSharing);
    TabularQAgent agent(cfg, TabularQConfig{});
    TrainingLog log;
    train_agent(cfg, agent, TrainBudget{5, 30}, 11, log, TrainOptions{20, 5});
    REQUIRE(log.rows.size() == 5);
    for (int e = 0; e < 5; ++e) {
        CHECK(log.rows[e].episode == e);
        CHECK(std::isfinite(log.rows[e].mean_cost));
        CHECK(log.rows[e].epsilon.has_value());
    }
}

TEST_CASE("evaluate with no data arrivals reports empty queues and no loss") {
    EnvConfig cfg = env2();
    cfg.arrivals.lambda_data = {0.0, 0.0};
    const auto m = evaluate(cfg, spend_all_policy(cfg), 500, 100, {1, 2, 3});
    CHECK(m.avg_queue_length == 0.0);
    CHECK(m.data_loss_pct == 0.0);
    CHECK(m.arrived == 0);
    CHECK(m.est_discounted_cost == 0.0);
}

TEST_CASE("overload loss respects the flow-conservation bound") {
    EnvConfig cfg;
    cfg.n_nodes = 1;
    cfg.arrivals.lambda_data = {20.0};
    cfg.arrivals.lambda_energy = {5.0};
    // per-slot service is at most floor(g(10)) = 3 packets, so loss stays
    // above 100*(20-3.46)/20
    const auto m = evaluate(cfg, spend_all_policy(cfg), 4000, 500, {1, 2});
    CHECK(m.data_loss_pct >= 82.7);
    CHECK(m.data_loss_pct <= 100.0);
}

TEST_CASE("evaluate is a pure function of policy, config and seeds") {
    const EnvConfig cfg = env2();
    const auto a = evaluate(cfg, spend_all_policy(cfg), 600, 100, {4, 5});
    const auto b = evaluate(cfg, spend_all_policy(cfg), 600, 100, {4, 5});
    REQUIRE(a.avg_queue_length == b.avg_queue_length);
    REQUIRE(a.data_loss_pct == b.data_loss_pct);
    REQUIRE(a.est_discounted_cost == b.est_discounted_cost);
    REQUIRE(a.arrived == b.arrived);
    REQUIRE(a.per_node_queue == b.per_node_queue);
}

TEST_CASE("burn-in exclusion counts exactly horizon minus burn-in slots") {
    EnvConfig cfg = env2();
    cfg.arrivals.kind = DistKind::Deterministic;
    cfg.arrivals.lambda_data = {1.0, 1.0};
    cfg.arrivals.lambda_energy = {5.0, 5.0};
    const int horizon = 400, burn_in = 150;
    const auto m = evaluate_single(cfg, spend_all_policy(cfg), horizon, burn_in, 1, 0.9);
    // one packet per node per slot arrives deterministically
    CHECK(m.arrived == 2LL * (horizon - burn_in));
}

TEST_CASE("metrics satisfy the packet accounting identity") {
    const EnvConfig cfg = env2();
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto m = evaluate_single(cfg, spend_all_policy(cfg), 3000, 700, seed, 0.9);
        REQUIRE(m.arrived ==
                m.transmitted + m.dropped + (m.window_end_queue - m.window_start_queue));
    }
}

TEST_CASE("discounted cost with gamma zero is the first slot cost") {
    EnvConfig cfg = env2();
    cfg.random_start = true;  // non-trivial first cost
    const auto m = evaluate_single(cfg, spend_all_policy(cfg), 50, 10, 9, 0.0);
    Rng rng(9);
    NetworkState s = reset(cfg, rng);
    const auto r = step(s, spend_all_policy(cfg)(s), sample_arrivals(cfg.arrivals, rng), cfg);
    CHECK(m.est_discounted_cost == r.cost);
}

TEST_CASE("two-node sweep produces the expected grid") {
    ExperimentSpec spec = tiny_spec();
    const auto rows = sweep_two_node(spec);
    // 9 grid points x 3 models x (2 seeds + 1 mean row)
    REQUIRE(rows.size() == 9 * 3 * 3);
    int means = 0, ok = 0;
    for (const auto& r : rows) {
        CHECK(r.ex1 == 0.5);
        if (r.is_mean) ++means;
        if (r.status == "ok") ++ok;
    }
    CHECK(means == 27);
    CHECK(ok == static_cast<int>(rows.size()));

    SECTION("csv output is stable across reruns") {
        std::stringstream a, b;
        write_sweep_csv(a, rows, "two_node");
        write_sweep_csv(b, sweep_two_node(spec), "two_node");
        REQUIRE(a.str() == b.str());
    }
}

TEST_CASE("heatmap sweep covers the 9x9 grid") {
    ExperimentSpec spec = tiny_spec();
    spec.seeds = {1};
    const auto rows = sweep_heatmap(spec);
    REQUIRE(rows.size() == 81 * 2);  // one seed row + one mean row per cell
    int means = 0;
    for (const auto& r : rows)
        if (r.is_mean) ++means;
    CHECK(means == 81);
}

TEST_CASE("scalability sweep skips the centralized model beyond its cap") {
    ExperimentSpec spec = tiny_spec();
    spec.seeds = {1};
    spec.scalability_nodes = {2, 3};
    spec.dqn_node_cap = 2;
    spec.dqn.levels = 3;
    const auto rows = sweep_scalability(spec);
    bool saw_skip = false;
    for (const auto& r : rows) {
        if (r.model == ModelKind::centralized && r.n_nodes == 3) {
            CHECK(r.status == "skipped");
            saw_skip = true;
        } else {
            CHECK(r.status == "ok");
        }
    }
    CHECK(saw_skip);

    SECTION("identical seeds give identical tables") {
        std::stringstream a, b;
        write_sweep_csv(a, rows, "scalability");
        write_sweep_csv(b, sweep_scalability(spec), "scalability");
        REQUIRE(a.str() == b.str());
    }
}

TEST_CASE("scalability arrival draws are fixed by seed and node count") {
    const auto a = scalability_arrivals(42, 6);
    const auto b = scalability_arrivals(42, 6);
    REQUIRE(a == b);
    for (double l : a) {
        CHECK(l >= 0.0);
        CHECK(l <= 4.0);
    }
    CHECK(a != scalability_arrivals(43, 6));
}

TEST_CASE("training log csv shape") {
    TrainingLog log;
    TrainingLogRow r;
    r.episode = 0;
    r.mean_cost = 1.5;
    r.critic_loss = 0.25;
    r.sigma = 0.2;
    r.eval_cost = 1.25;
    log.rows.push_back(r);
    std::stringstream ss;
    write_training_log_csv(ss, log);
    CHECK(ss.str() ==
          "episode,mean_cost,critic_loss,actor_objective,epsilon,sigma,eval_cost\n"
          "0,1.5,0.25,,,0.2,1.25\n");
}
