#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rrmlab/nn.hpp"
#include "rrmlab/rng.hpp"

namespace rrm {

/// Minibatch of transitions; observations are stored one per column.
struct Batch {
    nn::Matrix obs;
    std::vector<int> actions;
    nn::Vector rewards;
    nn::Matrix next_obs;
    nn::Vector done;

    int size() const { return static_cast<int>(actions.size()); }
};

/// Fixed-capacity FIFO of transitions with uniform sampling.
class ReplayBuffer {
public:
    ReplayBuffer(int obs_dim, int capacity);

    void push(std::span<const double> obs, int action, double reward, std::span<const double> next_obs, bool done);
    Batch sample(int batch_size, Rng& rng) const;

    int size() const { return size_; }
    int capacity() const { return capacity_; }

private:
    int obs_dim_;
    int capacity_;
    int size_ = 0;
    int head_ = 0;
    nn::Matrix obs_;
    nn::Matrix next_obs_;
    std::vector<int> actions_;
    std::vector<double> rewards_;
    std::vector<double> done_;
};

}  // namespace rrm
