#pragma once

#include <cstdint>
#include <vector>

#include "rrmlab/batch.hpp"
#include "rrmlab/nn.hpp"
#include "rrmlab/rng.hpp"

namespace rrm {

struct SacConfig {
    std::vector<int> hidden{256, 256};
    double gamma = 0.99;
    double rho = 0.005;                 // target soft-update rate
    double entropy_target_scale = 0.3;  // entropy target = scale * log|A|
    double initial_temperature = 1.0;
    double reward_scale = 1.0;
    int replay_capacity = 100000;
    int batch_size = 64;
    int updates_per_step = 1;
    int warmup_steps = 1000;
    // Learning rates decay linearly to this fraction of adam.lr over the run; 1 keeps them constant.
    double lr_final_fraction = 1.0;
    nn::AdamConfig adam{};

    void validate() const;
};

struct SacLosses {
    double critic = 0.0;
    double actor = 0.0;
    double temperature_loss = 0.0;
    double entropy = 0.0;
};

/// Critic regression targets r + gamma (1 - done) sum_a pi(a|s')[min Q_target(s', a) - temp log pi(a|s')].
nn::Vector sac_critic_targets(const nn::Matrix& next_probs, const nn::Matrix& next_q1_target,
                              const nn::Matrix& next_q2_target, const nn::Vector& rewards, const nn::Vector& done,
                              double gamma, double temperature);

/// Gradient of sum_b sum_a pi(a|s_b)[temp log pi(a|s_b) - q(s_b, a)] with respect to the logits.
nn::Matrix sac_actor_logit_grad(const nn::Matrix& logits, const nn::Matrix& q, double temperature);

/// Discrete soft actor-critic over the flat joint action space.
class SacAgent {
public:
    SacAgent(int obs_dim, int n_actions, const SacConfig& cfg, std::uint64_t seed);

    /// Samples from softmax(logits) when exploring; argmax (lowest index on ties) otherwise.
    int act(const nn::Vector& obs, bool explore, Rng& rng) const;
    nn::Vector action_probs(const nn::Vector& obs) const;

    SacLosses update(const Batch& batch);
    /// Sets every optimizer's step size to adam.lr * scale.
    void set_lr_scale(double scale);

    double temperature() const;
    double entropy_target() const { return entropy_target_; }
    int n_actions() const { return n_actions_; }
    const SacConfig& config() const { return cfg_; }

    const nn::Mlp& policy() const { return policy_; }
    const nn::Mlp& q1() const { return q1_; }
    const nn::Mlp& q2() const { return q2_; }
    const nn::Mlp& q1_target() const { return q1_target_; }
    const nn::Mlp& q2_target() const { return q2_target_; }
    nn::Mlp& mutable_policy() { return policy_; }
    nn::Mlp& mutable_q1() { return q1_; }
    nn::Mlp& mutable_q2() { return q2_; }

    /// Policy-only checkpoint (kind "logits").
    nn::Checkpoint checkpoint() const;

private:
    SacConfig cfg_;
    int n_actions_;
    double entropy_target_;
    double log_temperature_;
    nn::Mlp policy_;
    nn::Mlp q1_;
    nn::Mlp q2_;
    nn::Mlp q1_target_;
    nn::Mlp q2_target_;
    nn::Adam policy_opt_;
    nn::Adam q1_opt_;
    nn::Adam q2_opt_;
    nn::ScalarAdam temperature_opt_;
};

}  // namespace rrm
