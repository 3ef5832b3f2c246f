#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rrmlab/batch.hpp"
#include "rrmlab/dataset.hpp"
#include "rrmlab/metrics.hpp"
#include "rrmlab/nn.hpp"
#include "rrmlab/scenario.hpp"

namespace rrm {

enum class OfflineAlgo { Bcq, Cql, Iql };

std::string to_string(OfflineAlgo algo);
OfflineAlgo parse_offline_algo(const std::string& name);

struct OfflineConfig {
    OfflineAlgo algo = OfflineAlgo::Iql;
    std::vector<int> hidden{256, 256};
    double bcq_tau = 0.3;
    double cql_alpha = 1.0;
    double iql_expectile = 0.7;
    double iql_beta = 3.0;
    double iql_weight_max = 100.0;
    double gamma = 0.99;
    double rho = 0.005;
    double reward_scale = 1.0;
    int batch_size = 64;
    int updates_per_epoch = 10000;
    int epochs = 30;
    std::uint64_t seed = 1;
    int runs = 1;
    nn::AdamConfig adam{};

    void validate() const;
};

/// |tau - 1(u < 0)| * u^2
double expectile_loss(double u, double tau);
/// d/du of expectile_loss.
double expectile_grad(double u, double tau);

/// {a : p_b(a) / max p_b >= tau}; always contains the behavior argmax.
std::vector<bool> bcq_eligible(const nn::Vector& behavior_probs, double tau);

/// logsumexp_a q(a) - q(a_data); nonnegative.
double cql_penalty(const nn::Vector& q, int action);

struct OfflineLosses {
    double q = 0.0;
    double penalty = 0.0;   // CQL
    double behavior = 0.0;  // BCQ cross-entropy
    double value = 0.0;     // IQL expectile
    double policy = 0.0;    // IQL weighted cross-entropy
};

struct OfflineGradients {
    nn::MlpGrads q1;
    nn::MlpGrads q2;
    nn::MlpGrads behavior;
    nn::MlpGrads value;
    nn::MlpGrads policy;
    nn::Vector iql_weights;  // advantage weights of the extraction step
    OfflineLosses losses;
};

/// Discrete BCQ / CQL / IQL learner. Twin Q critics with soft-updated targets for all three;
/// BCQ adds a behavior-cloning head, IQL a state-value net and an extracted policy.
class OfflineLearner {
public:
    OfflineLearner(int obs_dim, int n_actions, const OfflineConfig& cfg);

    /// Gradients of every loss on `batch` at the current parameters; no state changes.
    OfflineGradients gradients(const Batch& batch) const;
    void apply(const OfflineGradients& grads);
    OfflineLosses update(const Batch& batch);

    /// Greedy-acting checkpoint: "bcq" {q1,q2,behavior}, "q" {q1,q2} for CQL, "logits" {policy} for IQL.
    nn::Checkpoint checkpoint() const;

    const OfflineConfig& config() const { return cfg_; }
    const nn::Mlp& q1() const { return q1_; }
    const nn::Mlp& q2() const { return q2_; }
    const nn::Mlp& q1_target() const { return q1_target_; }
    const nn::Mlp& q2_target() const { return q2_target_; }
    const nn::Mlp& behavior() const { return behavior_; }
    const nn::Mlp& value() const { return value_; }
    const nn::Mlp& policy() const { return policy_; }
    nn::Mlp& mutable_behavior() { return behavior_; }
    nn::Mlp& mutable_value() { return value_; }
    std::int64_t updates() const { return updates_; }

private:
    OfflineConfig cfg_;
    int n_actions_;
    nn::Mlp q1_, q2_, q1_target_, q2_target_;
    nn::Mlp behavior_, value_, policy_;
    nn::Adam q1_opt_, q2_opt_, behavior_opt_, value_opt_, policy_opt_;
    std::int64_t updates_ = 0;
};

struct OfflineResult {
    std::vector<CurvePoint> curve;  // one row per epoch
    nn::Checkpoint final_policy;
    std::int64_t updates = 0;
    std::uint64_t env_steps_during_updates = 0;  // must stay 0
};

/// Per epoch: `updates_per_epoch` uniform minibatches from `dataset`, then greedy evaluation on the
/// validation seeds. `on_epoch` may return false to stop early.
OfflineResult train_offline(const Dataset& dataset, const Scenario& scenario, const OfflineConfig& cfg,
                            const std::string& out_dir = {},
                            const std::function<bool(const CurvePoint&)>& on_epoch = {});

}  // namespace rrm
