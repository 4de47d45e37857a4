#pragma once

// Exploration noise for the DDPG actor. Gaussian is the default; an
// Ornstein-Uhlenbeck walk is available for temporally correlated
// exploration. sigma decays once per episode and never grows.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "emplab/rng.hpp"

namespace emplab {

struct NoiseProcess {
    enum class Kind { gaussian, ornstein_uhlenbeck };

    Kind kind = Kind::gaussian;
    double sigma = 0.2;
    double decay = 0.995;  // multiplied into sigma each episode
    double floor = 0.05;   // decay stops here; keeps late replay data diverse
    double theta = 0.15;   // OU mean-reversion rate

    NoiseProcess() = default;
    NoiseProcess(Kind k, double sigma0, double decay_factor, double sigma_floor = 0.05,
                 double theta_ou = 0.15)
        : kind(k), sigma(sigma0), decay(decay_factor), floor(sigma_floor), theta(theta_ou) {
        if (sigma < 0.0) throw std::invalid_argument("NoiseProcess: sigma must be >= 0");
        if (!(decay > 0.0 && decay <= 1.0))
            throw std::invalid_argument("NoiseProcess: decay must lie in (0,1]");
        if (floor < 0.0 || floor > sigma)
            throw std::invalid_argument("NoiseProcess: floor must lie in [0, sigma]");
    }

    std::vector<double> sample(std::size_t dim, Rng& rng) {
        std::vector<double> n(dim);
        if (kind == Kind::gaussian) {
            for (double& v : n) v = rng.normal(0.0, sigma);
            return n;
        }
        if (ou_state_.size() != dim) ou_state_.assign(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            ou_state_[i] += -theta * ou_state_[i] + sigma * rng.normal();
            n[i] = ou_state_[i];
        }
        return n;
    }

    void end_episode() {
        sigma = std::max(floor, sigma * decay);
        ou_state_.clear();
    }

private:
    std::vector<double> ou_state_;
};

inline std::string to_string(NoiseProcess::Kind k) {
    return k == NoiseProcess::Kind::gaussian ? "gaussian" : "ornstein_uhlenbeck";
}

inline NoiseProcess::Kind noise_kind_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseProcess::Kind::gaussian;
    if (s == "ornstein_uhlenbeck") return NoiseProcess::Kind::ornstein_uhlenbeck;
    throw std::invalid_argument("unknown noise kind: " + s);
}

}  // namespace emplab
