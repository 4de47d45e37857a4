#pragma once

// Run configuration: a JSON tree with documented defaults, overridden in
// order by a config file, EMPLAB_* environment variables and CLI flags.
// Unknown keys are rejected with the offending path named. The fully
// resolved tree is written next to every artifact a command produces.

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "emplab/agents.hpp"
#include "emplab/harness.hpp"

namespace emplab {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    nlohmann::json tree;

    static nlohmann::json defaults() {
        return nlohmann::json{
            {"model", "sharing"},
            {"seed", 42},
            {"workers", 0},
            {"out", "results"},
            {"env",
             {{"n_nodes", 2},
              {"d_max", 10},
              {"e_max", 10.0},
              {"lambda_data", {0.5, 2.0}},
              {"lambda_energy", {5.0, 5.0}},
              {"random_start", false}}},
            {"ddpg",
             {{"gamma", 0.9},
              {"tau", 0.005},
              {"target_update", "soft"},  // soft | best_trigger
              {"batch_size", 64},
              {"replay_capacity", 100000},
              {"actor_lr", 1e-4},
              {"critic_lr", 1e-3},
              {"optimizer", "adam"},
              {"hidden", {2, 4}},
              {"hidden_activation", "tanh"},
              {"noise",
               {{"kind", "gaussian"},
                {"sigma", 0.2},
                {"decay", 0.995},
                {"floor", 0.05},
                {"theta", 0.15}}},
              {"act_with_target", false},
              {"cost_scale", 0.0}}},
            {"dqn",
             {{"gamma", 0.9},
              {"batch_size", 64},
              {"replay_capacity", 100000},
              {"lr", 1e-3},
              {"optimizer", "adam"},
              {"hidden", {2, 4}},
              {"hidden_activation", "tanh"},
              {"levels", 5},
              {"epsilon", {{"start", 1.0}, {"decay", 0.995}, {"floor", 0.05}}},
              {"target_period", 500},
              {"cost_scale", 0.0}}},
            {"tabq",
             {{"gamma", 0.9},
              {"beta", 0.1},
              {"beta_visit_decay", false},
              {"epsilon", {{"start", 1.0}, {"decay", 0.995}, {"floor", 0.05}}},
              {"bin_width", 1.0}}},
            {"train",
             {{"episodes", 2000},
              {"slots_per_episode", 200},
              {"eval_slots", 200},
              {"best_window", 10},
              {"scale_episodes_with_nodes", true}}},
            {"eval",
             {{"horizon", 20000},
              {"burn_in", 1000},
              {"seeds", {1, 2, 3, 4, 5}},
              {"gamma", 0.9}}},
            {"sweep", {{"kind", "two_node"}, {"nodes", {2, 4, 6, 10}}, {"dqn_node_cap", 6}}}};
    }

    static RunConfig load(const std::string& config_path) {
        RunConfig rc;
        rc.tree = defaults();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open config file: " + config_path);
            nlohmann::json user;
            try {
                user = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError("malformed config file " + config_path + ": " + e.what());
            }
            merge(rc.tree, user, "");
        }
        rc.apply_env_overrides();
        return rc;
    }

    // Overlays `user` onto `base`, rejecting any key that has no default.
    static void merge(nlohmann::json& base, const nlohmann::json& user, const std::string& path) {
        if (!user.is_object())
            throw ConfigError("config node '" + (path.empty() ? "<root>" : path) +
                              "' must be an object");
        for (auto it = user.begin(); it != user.end(); ++it) {
            const std::string child = path.empty() ? it.key() : path + "." + it.key();
            if (!base.contains(it.key())) throw ConfigError("unknown config key: " + child);
            nlohmann::json& slot = base[it.key()];
            if (slot.is_object()) {
                merge(slot, it.value(), child);
            } else {
                if (!compatible(slot, it.value()))
                    throw ConfigError("config key '" + child + "' has the wrong type");
                slot = it.value();
            }
        }
    }

    // EMPLAB_ENV__N_NODES=4 overrides env.n_nodes; '__' separates nested
    // keys so values survive shell naming rules.
    void apply_env_overrides() { walk_env(tree, "EMPLAB"); }

    double num(const std::string& path) const { return at(path).get<double>(); }
    int integer(const std::string& path) const { return at(path).get<int>(); }
    bool flag(const std::string& path) const { return at(path).get<bool>(); }
    std::string str(const std::string& path) const { return at(path).get<std::string>(); }

    const nlohmann::json& at(const std::string& path) const {
        const nlohmann::json* node = &tree;
        std::istringstream ss(path);
        std::string part;
        while (std::getline(ss, part, '.')) {
            if (!node->contains(part)) throw ConfigError("missing config key: " + path);
            node = &(*node)[part];
        }
        return *node;
    }

    void set(const std::string& path, nlohmann::json value) {
        nlohmann::json* node = &tree;
        std::istringstream ss(path);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.')) parts.push_back(part);
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
        (*node)[parts.back()] = std::move(value);
    }

    std::string dump() const { return tree.dump(2) + "\n"; }

private:
    static bool compatible(const nlohmann::json& a, const nlohmann::json& b) {
        if (a.is_number() && b.is_number()) return true;
        if (a.is_array() && b.is_array()) return true;
        return a.type() == b.type();
    }

    static void walk_env(nlohmann::json& node, const std::string& prefix) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            std::string name = prefix + "_";
            for (char c : it.key()) name += static_cast<char>(std::toupper(c));
            // nested separator becomes a double underscore overall
            if (it.value().is_object()) {
                walk_env(it.value(), name + "_");
                continue;
            }
            if (const char* v = std::getenv(name.c_str())) {
                nlohmann::json parsed;
                try {
                    parsed = nlohmann::json::parse(v);
                } catch (const nlohmann::json::parse_error&) {
                    parsed = std::string(v);
                }
                if (!compatible(it.value(), parsed))
                    throw ConfigError("environment override " + name + " has the wrong type");
                it.value() = parsed;
            }
        }
    }
};

// --- typed views over the tree ------------------------------------------------

inline EnvConfig env_config_from(const RunConfig& rc, ModelKind model) {
    EnvConfig env;
    env.n_nodes = rc.integer("env.n_nodes");
    env.d_max = rc.integer("env.d_max");
    env.e_max = rc.num("env.e_max");
    env.arrivals.lambda_data = rc.at("env.lambda_data").get<std::vector<double>>();
    env.arrivals.lambda_energy = rc.at("env.lambda_energy").get<std::vector<double>>();
    env.mode = mode_for(model);
    env.random_start = rc.flag("env.random_start");
    env.seed = static_cast<std::uint64_t>(rc.integer("seed"));
    try {
        env.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("env: ") + e.what());
    }
    return env;
}

inline DdpgConfig ddpg_config_from(const RunConfig& rc) {
    DdpgConfig c;
    c.gamma = rc.num("ddpg.gamma");
    c.tau = rc.num("ddpg.tau");
    const std::string tm = rc.str("ddpg.target_update");
    if (tm == "soft")
        c.target_mode = DdpgConfig::TargetMode::soft;
    else if (tm == "best_trigger")
        c.target_mode = DdpgConfig::TargetMode::best_trigger;
    else
        throw ConfigError("ddpg.target_update must be 'soft' or 'best_trigger'");
    c.batch_size = rc.integer("ddpg.batch_size");
    c.replay_capacity = static_cast<std::size_t>(rc.integer("ddpg.replay_capacity"));
    c.actor_lr = rc.num("ddpg.actor_lr");
    c.critic_lr = rc.num("ddpg.critic_lr");
    const std::string opt = rc.str("ddpg.optimizer");
    c.optimizer = opt == "sgd" ? Optimizer::Kind::sgd : Optimizer::Kind::adam;
    if (opt != "sgd" && opt != "adam") throw ConfigError("ddpg.optimizer must be 'sgd' or 'adam'");
    c.hidden = rc.at("ddpg.hidden").get<std::vector<int>>();
    c.hidden_act = activation_from_string(rc.str("ddpg.hidden_activation"));
    c.noise_kind = noise_kind_from_string(rc.str("ddpg.noise.kind"));
    c.noise_sigma = rc.num("ddpg.noise.sigma");
    c.noise_decay = rc.num("ddpg.noise.decay");
    c.noise_floor = rc.num("ddpg.noise.floor");
    c.noise_theta = rc.num("ddpg.noise.theta");
    c.act_with_target = rc.flag("ddpg.act_with_target");
    c.cost_scale = rc.num("ddpg.cost_scale");
    return c;
}

inline DqnConfig dqn_config_from(const RunConfig& rc) {
    DqnConfig c;
    c.gamma = rc.num("dqn.gamma");
    c.batch_size = rc.integer("dqn.batch_size");
    c.replay_capacity = static_cast<std::size_t>(rc.integer("dqn.replay_capacity"));
    c.lr = rc.num("dqn.lr");
    const std::string opt = rc.str("dqn.optimizer");
    c.optimizer = opt == "sgd" ? Optimizer::Kind::sgd : Optimizer::Kind::adam;
    if (opt != "sgd" && opt != "adam") throw ConfigError("dqn.optimizer must be 'sgd' or 'adam'");
    c.hidden = rc.at("dqn.hidden").get<std::vector<int>>();
    c.hidden_act = activation_from_string(rc.str("dqn.hidden_activation"));
    c.levels = rc.integer("dqn.levels");
    c.epsilon0 = rc.num("dqn.epsilon.start");
    c.epsilon_decay = rc.num("dqn.epsilon.decay");
    c.epsilon_floor = rc.num("dqn.epsilon.floor");
    c.target_period = rc.integer("dqn.target_period");
    c.cost_scale = rc.num("dqn.cost_scale");
    return c;
}

inline TabularQConfig tabq_config_from(const RunConfig& rc) {
    TabularQConfig c;
    c.gamma = rc.num("tabq.gamma");
    c.beta = rc.num("tabq.beta");
    c.beta_visit_decay = rc.flag("tabq.beta_visit_decay");
    c.epsilon0 = rc.num("tabq.epsilon.start");
    c.epsilon_decay = rc.num("tabq.epsilon.decay");
    c.epsilon_floor = rc.num("tabq.epsilon.floor");
    c.bin_width = rc.num("tabq.bin_width");
    return c;
}

// Episodes scale linearly with the node count (baseline is the 2-node
// budget) unless the flag turns that off.
inline TrainBudget budget_from(const RunConfig& rc, int n_nodes) {
    TrainBudget b;
    b.episodes = rc.integer("train.episodes");
    b.slots_per_episode = rc.integer("train.slots_per_episode");
    if (rc.flag("train.scale_episodes_with_nodes") && n_nodes > 2)
        b.episodes = static_cast<int>(b.episodes * (static_cast<double>(n_nodes) / 2.0));
    return b;
}

inline ExperimentSpec experiment_spec_from(const RunConfig& rc, ModelKind model) {
    ExperimentSpec spec;
    spec.base_env = env_config_from(rc, model);
    spec.budget = budget_from(rc, spec.base_env.n_nodes);
    spec.train_opts.eval_slots = rc.integer("train.eval_slots");
    spec.train_opts.best_window = rc.integer("train.best_window");
    spec.eval_horizon = rc.integer("eval.horizon");
    spec.burn_in = rc.integer("eval.burn_in");
    spec.seeds.clear();
    for (const auto& s : rc.at("eval.seeds"))
        spec.seeds.push_back(static_cast<std::uint64_t>(s.get<long long>()));
    spec.gamma = rc.num("eval.gamma");
    spec.ddpg = ddpg_config_from(rc);
    spec.dqn = dqn_config_from(rc);
    spec.tabq = tabq_config_from(rc);
    spec.scalability_nodes = rc.at("sweep.nodes").get<std::vector<int>>();
    spec.dqn_node_cap = rc.integer("sweep.dqn_node_cap");
    spec.master_seed = static_cast<std::uint64_t>(rc.integer("seed"));
    spec.workers = rc.integer("workers");
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("eval: ") + e.what());
    }
    return spec;
}

}  // namespace emplab
