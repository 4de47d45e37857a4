// emplab: desk-scale laboratory for energy-management policies in
// energy-harvesting sensor networks.
//
// Subcommands:
//   critical-rate  print the maximum sustainable total data rate
//   train          train one model, write checkpoint + training log
//   evaluate       greedy long-run metrics for a checkpoint
//   sweep          two_node | heatmap | scalability experiment grids
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "emplab/config.hpp"

namespace fs = std::filesystem;
using namespace emplab;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;  // -1: keep config value
    int workers = -1;
    std::string model;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--seed", f.seed, "master seed (overrides config)");
    cmd->add_option("--workers", f.workers, "worker threads for sweeps");
    cmd->add_option("--model", f.model, "sharing | centralized | nosharing")
        ->check(CLI::IsMember({"sharing", "centralized", "nosharing"}));
}

RunConfig resolve_config(const CommonFlags& f) {
    RunConfig rc = RunConfig::load(f.config_path);
    if (!f.out_dir.empty()) rc.set("out", f.out_dir);
    if (f.seed >= 0) rc.set("seed", f.seed);
    if (f.workers >= 0) rc.set("workers", f.workers);
    if (!f.model.empty()) rc.set("model", f.model);
    return rc;
}

fs::path prepare_out_dir(const RunConfig& rc) {
    fs::path dir(rc.str("out"));
    fs::create_directories(dir);
    std::ofstream cfg(dir / "config.resolved.json", std::ios::binary);
    cfg << rc.dump();
    return dir;
}

int cmd_critical_rate(const CommonFlags& flags) {
    const RunConfig rc = resolve_config(flags);
    const EnvConfig env = env_config_from(rc, ModelKind::sharing);
    std::printf("%.4f\n", critical_rate(env));
    return 0;
}

int cmd_train(const CommonFlags& flags) {
    const RunConfig rc = resolve_config(flags);
    const ModelKind model = model_from_string(rc.str("model"));
    const EnvConfig env = env_config_from(rc, model);
    const TrainBudget budget = budget_from(rc, env.n_nodes);
    const TrainOptions opts{rc.integer("train.eval_slots"), rc.integer("train.best_window")};
    const std::uint64_t seed = static_cast<std::uint64_t>(rc.integer("seed"));
    const fs::path dir = prepare_out_dir(rc);

    TrainingLog log;
    int exit_code = 0;
    std::ofstream ckpt(dir / "checkpoint.txt", std::ios::binary);
    try {
        switch (model) {
            case ModelKind::sharing: {
                Rng init(derive_seed(seed, 1));
                DdpgAgent agent(env, ddpg_config_from(rc), init);
                train_agent(env, agent, budget, derive_seed(seed, 2), log, opts);
                agent.save(ckpt);
                break;
            }
            case ModelKind::centralized: {
                Rng init(derive_seed(seed, 1));
                DqnAgent agent(env, dqn_config_from(rc), init);
                train_agent(env, agent, budget, derive_seed(seed, 2), log, opts);
                agent.save(ckpt);
                break;
            }
            case ModelKind::nosharing: {
                TabularQAgent agent(env, tabq_config_from(rc));
                train_agent(env, agent, budget, derive_seed(seed, 2), log, opts);
                agent.save(ckpt);
                break;
            }
        }
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << " (partial log retained)\n";
        exit_code = 2;
    }
    std::ofstream csv(dir / "training_log.csv", std::ios::binary);
    write_training_log_csv(csv, log);
    return exit_code;
}

std::string peek_checkpoint_kind(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    std::string tok, kind;
    int version;
    in >> tok >> version;
    if (tok != "agent") throw ConfigError("not an agent checkpoint: " + path);
    in >> tok >> kind;
    if (tok != "kind") throw ConfigError("checkpoint missing kind: " + path);
    return kind;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& checkpoint) {
    const RunConfig rc = resolve_config(flags);
    const ModelKind model = model_from_string(peek_checkpoint_kind(checkpoint));
    const EnvConfig env = env_config_from(rc, model);
    const int horizon = rc.integer("eval.horizon");
    const int burn_in = rc.integer("eval.burn_in");
    const double gamma = rc.num("eval.gamma");
    std::vector<std::uint64_t> seeds;
    for (const auto& s : rc.at("eval.seeds"))
        seeds.push_back(static_cast<std::uint64_t>(s.get<long long>()));
    if (horizon <= burn_in) throw ConfigError("eval.horizon must exceed eval.burn_in");
    if (seeds.empty()) throw ConfigError("eval.seeds must not be empty");

    std::ifstream in(checkpoint);
    GreedyPolicy policy;
    // the loaded agent must outlive the policy closure
    std::optional<DdpgAgent> ddpg;
    std::optional<DqnAgent> dqn;
    std::optional<TabularQAgent> tabq;
    switch (model) {
        case ModelKind::sharing:
            ddpg.emplace(DdpgAgent::load(in, env, ddpg_config_from(rc)));
            policy = greedy_policy(*ddpg);
            break;
        case ModelKind::centralized:
            dqn.emplace(DqnAgent::load(in, env, dqn_config_from(rc)));
            policy = greedy_policy(*dqn);
            break;
        case ModelKind::nosharing:
            tabq.emplace(TabularQAgent::load(in, env, tabq_config_from(rc)));
            policy = greedy_policy(*tabq);
            break;
    }

    std::vector<Metrics> per_seed;
    for (std::uint64_t s : seeds)
        per_seed.push_back(evaluate_single(env, policy, horizon, burn_in, s, gamma));
    const Metrics mean = average_metrics(per_seed);

    const fs::path dir = prepare_out_dir(rc);
    std::ofstream csv(dir / "metrics.csv", std::ios::binary);
    write_metrics_csv(csv, mean, per_seed, seeds);
    return 0;
}

int cmd_sweep(const CommonFlags& flags) {
    const RunConfig rc = resolve_config(flags);
    const std::string kind = rc.str("sweep.kind");
    const ExperimentSpec spec = experiment_spec_from(rc, ModelKind::sharing);

    std::vector<SweepRow> rows;
    if (kind == "two_node")
        rows = sweep_two_node(spec);
    else if (kind == "heatmap")
        rows = sweep_heatmap(spec);
    else if (kind == "scalability")
        rows = sweep_scalability(spec);
    else
        throw ConfigError("sweep.kind must be two_node, heatmap or scalability");

    const fs::path dir = prepare_out_dir(rc);
    std::ofstream csv(dir / ("sweep_" + kind + ".csv"), std::ios::binary);
    write_sweep_csv(csv, rows, kind);

    bool any_ok = false;
    for (const auto& r : rows)
        if (r.status == "ok") any_ok = true;
    if (!any_ok) {
        std::cerr << "error: every sweep cell failed\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"energy-management policy laboratory for energy-harvesting sensor networks"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string checkpoint;

    CLI::App* c_rate = app.add_subcommand("critical-rate", "print the critical data arrival rate");
    add_common(c_rate, flags);
    CLI::App* c_train = app.add_subcommand("train", "train a model and write a checkpoint");
    add_common(c_train, flags);
    CLI::App* c_eval = app.add_subcommand("evaluate", "evaluate a checkpoint greedily");
    add_common(c_eval, flags);
    c_eval->add_option("--checkpoint", checkpoint, "agent checkpoint file")->required();
    CLI::App* c_sweep = app.add_subcommand("sweep", "run an experiment sweep");
    add_common(c_sweep, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(c_rate)) return cmd_critical_rate(flags);
        if (app.got_subcommand(c_train)) return cmd_train(flags);
        if (app.got_subcommand(c_eval)) return cmd_evaluate(flags, checkpoint);
        if (app.got_subcommand(c_sweep)) return cmd_sweep(flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
