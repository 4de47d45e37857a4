#pragma once

// Experience tuples and the fixed-capacity replay ring the value-based
// agents train from.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "emplab/rng.hpp"

namespace emplab {

// One stored experience. `state` is the flattened joint state
// (q_1, E_1, ..., q_N, E_N); `action` is whatever raw form the owning agent
// replays (pre-projection actor output for DDPG, catalog index for DQN).
struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double cost = 0.0;
    std::vector<double> next_state;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }

    void push(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[cursor_] = std::move(t);  // overwrite the oldest entry
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    const Transition& operator[](std::size_t i) const { return data_[i]; }

    // k uniform draws with replacement.
    std::vector<const Transition*> sample(std::size_t k, Rng& rng) const {
        if (data_.size() < k) throw std::invalid_argument("ReplayBuffer: fewer entries than requested");
        std::vector<const Transition*> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i)
            out.push_back(&data_[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(data_.size()) - 1))]);
        return out;
    }

private:
    std::size_t capacity_;
    std::vector<Transition> data_;
    std::size_t cursor_ = 0;
};

}  // namespace emplab
