// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with its headline numbers. Budgets are sized for a small CI box;
// training-dependent criteria are statistical over seeds.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "emplab/config.hpp"
#include "emplab/harness.hpp"
#include "oracles.hpp"

using namespace emplab;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("criterion %2d [%s] %s (%s)\n", id, pass ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
}

EnvConfig two_node_env(double ex1, double ex2, Mode mode) {
    EnvConfig cfg;
    cfg.n_nodes = 2;
    cfg.arrivals.lambda_data = {ex1, ex2};
    cfg.arrivals.lambda_energy = {5.0, 5.0};
    cfg.mode = mode;
    return cfg;
}

ExperimentSpec cell_spec(const TrainBudget& budget) {
    ExperimentSpec spec;
    spec.budget = budget;
    spec.train_opts = TrainOptions{200, 10};
    spec.eval_horizon = 20000;
    spec.burn_in = 1000;
    spec.seeds = {1};
    return spec;
}

// Mean data-loss percent over seeds for one model at one grid point; a
// diverged run counts as total loss rather than aborting the criterion.
double mean_loss(ModelKind model, const EnvConfig& env, const TrainBudget& budget,
                 const std::vector<std::uint64_t>& seeds, int workers,
                 double* mean_queue = nullptr) {
    const ExperimentSpec spec = cell_spec(budget);
    std::vector<double> loss(seeds.size(), 100.0), queue(seeds.size(), 0.0);
    detail::parallel_for(seeds.size(), workers, [&](std::size_t i) {
        try {
            const Metrics m = detail::train_and_evaluate(model, env, spec, derive_seed(seeds[i], 77));
            loss[i] = m.data_loss_pct;
            queue[i] = m.avg_queue_length;
        } catch (const std::exception&) {
            loss[i] = 100.0;
            queue[i] = 0.0;
        }
    });
    double l = 0.0, q = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        l += loss[i];
        q += queue[i];
    }
    if (mean_queue) *mean_queue = q / seeds.size();
    return l / seeds.size();
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("emplab_acc_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args, std::string* out = nullptr) {
    const fs::path out_file = scratch_dir() / "stdout.txt";
    const std::string cmd =
        std::string(EMPLAB_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    if (out) *out = slurp(out_file);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("criterion 1: critical-rate reproduction") {
    const auto t0 = std::chrono::steady_clock::now();
    std::string out;
    const int code = run_cli("critical-rate", &out);
    const double printed = std::stod(out);
    const double elapsed = seconds_since(t0);

    // independent oracle: truncated Poisson pmf sum for the pooled rate
    const double lambda = 10.0;
    double p = std::exp(-lambda), expect = 0.0;
    for (int y = 1; y < 300; ++y) {
        p *= lambda / y;
        expect += p * std::log2(1.0 + y);
    }

    const bool pass = code == 0 && std::abs(printed - 3.395) <= 0.005 &&
                      std::abs(printed - expect) <= 1e-3 && elapsed < 1.0;
    report(1, "critical-rate reproduction", pass,
           "printed " + out.substr(0, out.size() - 1) + ", oracle " + std::to_string(expect) +
               ", " + std::to_string(elapsed) + "s");
    REQUIRE(pass);
}

TEST_CASE("criterion 2: dynamics oracle equivalence") {
    const auto t0 = std::chrono::steady_clock::now();
    long long mismatches = 0;
    for (int n : {1, 2, 3}) {
        EnvConfig cfg;
        cfg.n_nodes = n;
        cfg.arrivals.lambda_data.assign(n, 1.0);
        cfg.arrivals.lambda_energy.assign(n, 5.0);
        Rng rng(9000 + n);
        for (int trial = 0; trial < 10000; ++trial) {
            const auto t = oracle::random_triple(n, cfg.d_max, cfg.e_max, rng);
            AllocationMatrix a(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a.at(i, j) = t.alloc[i][j];
            const auto r = step(NetworkState{t.q, t.e}, a, Arrivals{t.x, t.y}, cfg);
            const auto o =
                oracle::brute_force_step(t.q, t.e, t.alloc, t.x, t.y, cfg.d_max, cfg.e_max);
            if (r.next.queues != o.next_q || r.next.energies != o.next_e || r.cost != o.cost ||
                r.stats.packets_transmitted != o.sent || r.stats.packets_dropped != o.dropped ||
                r.stats.energy_wasted != o.wasted)
                ++mismatches;
        }
    }
    const double elapsed = seconds_since(t0);
    const bool pass = mismatches == 0 && elapsed < 10.0;
    report(2, "dynamics oracle equivalence", pass,
           "3x10^4 triples, " + std::to_string(mismatches) + " mismatches, " +
               std::to_string(elapsed) + "s");
    REQUIRE(pass);
}

TEST_CASE("criterion 3: gradient correctness") {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(31415);
    const double worst = oracle::gradient_check_worst_error(rng, 100);
    const double elapsed = seconds_since(t0);
    const bool pass = worst <= 1e-4 && elapsed < 30.0;
    report(3, "gradient correctness", pass,
           "worst relative error " + std::to_string(worst) + ", " + std::to_string(elapsed) + "s");
    REQUIRE(pass);
}

TEST_CASE("criterion 4: tabular-q fixed point") {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<std::vector<double>> cost{{1.0, 1.0}, {0.0, 0.0}};
    const std::vector<std::vector<int>> next{{0, 1}, {0, 1}};
    const auto q_star = oracle::value_iteration(cost, next, 0.9);

    EnvConfig env;
    env.n_nodes = 1;
    env.arrivals.lambda_data = {1.0};
    env.arrivals.lambda_energy = {5.0};
    env.mode = Mode::NoSharing;
    TabularQConfig cfg;
    cfg.gamma = 0.9;
    cfg.beta_visit_decay = true;
    TabularQAgent agent(env, cfg);
    for (int sweep = 0; sweep < 2000000; ++sweep)
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a)
                agent.update(0, s, 1.0, a, cost[s][a], next[s][a], 1.0);

    double worst = 0.0;
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a)
            worst = std::max(worst, std::abs(agent.q_value(0, s, 1, a) - q_star[s][a]));
    const double elapsed = seconds_since(t0);
    const bool pass = worst <= 1e-6 && elapsed < 5.0;
    report(4, "tabular-q fixed point", pass,
           "max |Q - Q*| = " + std::to_string(worst) + ", " + std::to_string(elapsed) + "s");
    REQUIRE(pass);
}

TEST_CASE("criterion 5: conservation properties") {
    const EnvConfig cfg = two_node_env(0.5, 2.0, Mode::Sharing);
    Rng rng(55555);
    NetworkState s = reset(cfg, rng);
    long long arrived = 0, sent = 0, dropped = 0;
    double worst_energy_gap = 0.0;
    for (int k = 0; k < 100000; ++k) {
        std::vector<double> raw(4);
        for (double& v : raw) v = rng.uniform();
        const auto a = project_action(raw, s, cfg);
        const auto arr = sample_arrivals(cfg.arrivals, rng);
        const auto r = step(s, a, arr, cfg);
        for (int i = 0; i < 2; ++i) {
            const double pre = std::max(0.0, s.energies[i] - a.row_sum(i)) + arr.energy[i];
            const double wasted = pre - r.next.energies[i];
            worst_energy_gap = std::max(
                worst_energy_gap, std::abs(r.next.energies[i] + a.row_sum(i) + wasted -
                                           (s.energies[i] + arr.energy[i])));
            arrived += arr.data[i];
        }
        sent += r.stats.packets_transmitted;
        dropped += r.stats.packets_dropped;
        s = r.next;
    }
    long long q_end = 0;
    for (int q : s.queues) q_end += q;
    const bool packets_exact = arrived == sent + dropped + q_end;
    const bool pass = packets_exact && worst_energy_gap <= 1e-9;
    report(5, "conservation properties", pass,
           std::string("packets ") + (packets_exact ? "exact" : "BROKEN") +
               ", worst energy gap " + std::to_string(worst_energy_gap));
    REQUIRE(pass);
}

TEST_CASE("criterion 6: ddpg learning progress") {
    const EnvConfig env = two_node_env(0.5, 2.0, Mode::Sharing);
    const TrainBudget budget{500, 200};
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<int> improved(seeds.size(), 0);
    std::vector<double> firsts(seeds.size()), finals(seeds.size());

    detail::parallel_for(seeds.size(), 0, [&](std::size_t i) {
        Rng init(derive_seed(seeds[i], 61));
        DdpgAgent agent(env, DdpgConfig{}, init);
        TrainingLog log;
        try {
            train_agent(env, agent, budget, derive_seed(seeds[i], 62), log, TrainOptions{200, 10});
        } catch (const std::exception&) {
            improved[i] = 0;
            return;
        }
        double first = 0.0, last = 0.0;
        for (int e = 0; e < 100; ++e) first += log.rows[e].eval_cost;
        for (int e = 400; e < 500; ++e) last += log.rows[e].eval_cost;
        firsts[i] = first / 100.0;
        finals[i] = last / 100.0;
        improved[i] = finals[i] < firsts[i] ? 1 : 0;
    });

    int n_improved = 0;
    std::string detail_str;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        n_improved += improved[i];
        detail_str += (i ? " " : "") + std::to_string(firsts[i]).substr(0, 6) + "->" +
                      std::to_string(finals[i]).substr(0, 6);
    }
    const bool pass = n_improved >= 4;
    report(6, "ddpg learning progress", pass,
           std::to_string(n_improved) + "/5 seeds improved; " + detail_str);
    REQUIRE(pass);
}

TEST_CASE("criterion 7: model ordering and overload loss bound") {
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    const TrainBudget budget{400, 200};
    std::string detail_str;
    bool ordering_ok = true;
    for (double ex2 : {2.5, 3.5, 4.5}) {
        const double sharing =
            mean_loss(ModelKind::sharing, two_node_env(0.5, ex2, Mode::Sharing), budget, seeds, 0);
        const double nosharing = mean_loss(ModelKind::nosharing,
                                           two_node_env(0.5, ex2, Mode::NoSharing), budget, seeds, 0);
        if (sharing > nosharing + 2.0) ordering_ok = false;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "ex2=%.1f: %.1f%% vs %.1f%%; ", ex2, sharing, nosharing);
        detail_str += buf;
    }
    const double overload =
        mean_loss(ModelKind::sharing, two_node_env(4.5, 4.5, Mode::Sharing), budget, seeds, 0);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "loss at 2.65x critical %.1f%%", overload);
    detail_str += buf;
    const bool pass = ordering_ok && overload <= 55.0;
    report(7, "model ordering and overload loss bound", pass, detail_str);
    REQUIRE(pass);
}

TEST_CASE("criterion 8: instability onset for the no-sharing model") {
    // total arrival 6.0 is about 1.77x the critical rate 3.395
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double mean_queue = 0.0;
    mean_loss(ModelKind::nosharing, two_node_env(3.0, 3.0, Mode::NoSharing), TrainBudget{300, 200},
              seeds, 0, &mean_queue);
    const bool pass = mean_queue > 0.8 * 10.0;
    report(8, "instability onset beyond the critical rate", pass,
           "avg queue length " + std::to_string(mean_queue) + " vs bound 8.0");
    REQUIRE(pass);
}

TEST_CASE("criterion 9: byte-identical reruns") {
    const fs::path cfg_path = scratch_dir() / "det.json";
    {
        std::ofstream cfg(cfg_path);
        cfg << R"({"train": {"episodes": 4, "slots_per_episode": 50, "eval_slots": 30},
                   "eval": {"horizon": 300, "burn_in": 50, "seeds": [1, 2]},
                   "ddpg": {"batch_size": 16}})";
    }
    const fs::path a = scratch_dir() / "det_a";
    const fs::path b = scratch_dir() / "det_b";
    bool pass = run_cli("train --config " + cfg_path.string() + " --seed 9 --out " + a.string()) == 0;
    pass = pass &&
           run_cli("train --config " + cfg_path.string() + " --seed 9 --out " + b.string()) == 0;
    pass = pass && slurp(a / "training_log.csv") == slurp(b / "training_log.csv");
    pass = pass && slurp(a / "checkpoint.txt") == slurp(b / "checkpoint.txt");

    pass = pass && run_cli("evaluate --config " + cfg_path.string() + " --checkpoint " +
                           (a / "checkpoint.txt").string() + " --out " + (a / "eval").string()) == 0;
    pass = pass && run_cli("evaluate --config " + cfg_path.string() + " --checkpoint " +
                           (b / "checkpoint.txt").string() + " --out " + (b / "eval").string()) == 0;
    pass = pass && slurp(a / "eval" / "metrics.csv") == slurp(b / "eval" / "metrics.csv");
    report(9, "byte-identical reruns", pass, "train + evaluate CSV and checkpoint comparison");
    REQUIRE(pass);
}

TEST_CASE("criterion 10: scalability smoke at ten nodes") {
    const int n = 10;
    EnvConfig env;
    env.n_nodes = n;
    env.arrivals.lambda_data = scalability_arrivals(42, n);
    env.arrivals.lambda_energy.assign(n, 5.0);

    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const TrainBudget budget{300, 200};
    EnvConfig sharing_env = env;
    sharing_env.mode = Mode::Sharing;
    const double sharing = mean_loss(ModelKind::sharing, sharing_env, budget, seeds, 0);
    EnvConfig nosharing_env = env;
    nosharing_env.mode = Mode::NoSharing;
    const double nosharing = mean_loss(ModelKind::nosharing, nosharing_env, budget, seeds, 0);

    char buf[96];
    std::snprintf(buf, sizeof(buf), "sharing %.1f%% vs no-sharing %.1f%%", sharing, nosharing);
    const bool pass = sharing < nosharing;
    report(10, "scalability smoke at ten nodes", pass, buf);
    REQUIRE(pass);
}
