#pragma once

#include <string>

#include "rrmlab/nn.hpp"
#include "rrmlab/policies.hpp"

namespace rrm {

enum class ActMode { Greedy, Sample };

/// Scheduling policy backed by a network checkpoint. Supported kinds:
///   "logits": nets = {policy}; argmax or sample from softmax.
///   "q":      nets = {q1, q2}; scores are min(q1, q2).
///   "bcq":    nets = {q1, q2, behavior}; argmax of q1 over the behavior-eligible set.
class LearnedPolicy final : public SchedulingPolicy {
public:
    LearnedPolicy(nn::Checkpoint ckpt, ActMode mode, std::string name = "learned");
    static LearnedPolicy from_file(const std::string& path, ActMode mode);

    std::string name() const override { return name_; }
    JointAction act(const Environment& env, Rng& rng) override;

    int act_index(const nn::Vector& features, Rng& rng) const;
    int n_actions() const;
    const nn::Checkpoint& checkpoint() const { return ckpt_; }

private:
    enum class Kind { Logits, Q, Bcq };

    nn::Checkpoint ckpt_;
    ActMode mode_;
    std::string name_;
    Kind kind_ = Kind::Logits;
    double bcq_tau_ = 0.0;
};

}  // namespace rrm
