#include "rrmlab/batch.hpp"

#include "rrmlab/errors.hpp"

namespace rrm {

ReplayBuffer::ReplayBuffer(int obs_dim, int capacity)
    : obs_dim_(obs_dim),
      capacity_(capacity),
      obs_(obs_dim, capacity),
      next_obs_(obs_dim, capacity),
      actions_(static_cast<std::size_t>(capacity)),
      rewards_(static_cast<std::size_t>(capacity)),
      done_(static_cast<std::size_t>(capacity)) {
    require(obs_dim > 0 && capacity > 0, "ReplayBuffer: dimensions must be positive");
}

void ReplayBuffer::push(std::span<const double> obs, int action, double reward, std::span<const double> next_obs,
                        bool done) {
    require(static_cast<int>(obs.size()) == obs_dim_ && static_cast<int>(next_obs.size()) == obs_dim_,
            "ReplayBuffer::push: observation length mismatch");
    for (int i = 0; i < obs_dim_; ++i) {
        obs_(i, head_) = obs[static_cast<std::size_t>(i)];
        next_obs_(i, head_) = next_obs[static_cast<std::size_t>(i)];
    }
    const auto h = static_cast<std::size_t>(head_);
    actions_[h] = action;
    rewards_[h] = reward;
    done_[h] = done ? 1.0 : 0.0;
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

Batch ReplayBuffer::sample(int batch_size, Rng& rng) const {
    require(size_ > 0 && batch_size > 0, "ReplayBuffer::sample: empty buffer or batch");
    std::uniform_int_distribution<int> pick(0, size_ - 1);
    Batch b;
    b.obs.resize(obs_dim_, batch_size);
    b.next_obs.resize(obs_dim_, batch_size);
    b.actions.resize(static_cast<std::size_t>(batch_size));
    b.rewards.resize(batch_size);
    b.done.resize(batch_size);
    for (int c = 0; c < batch_size; ++c) {
        const int i = pick(rng);
        b.obs.col(c) = obs_.col(i);
        b.next_obs.col(c) = next_obs_.col(i);
        b.actions[static_cast<std::size_t>(c)] = actions_[static_cast<std::size_t>(i)];
        b.rewards(c) = rewards_[static_cast<std::size_t>(i)];
        b.done(c) = done_[static_cast<std::size_t>(i)];
    }
    return b;
}

}  // namespace rrm
