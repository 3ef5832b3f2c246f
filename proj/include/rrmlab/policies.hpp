#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rrmlab/env.hpp"
#include "rrmlab/rng.hpp"

namespace rrm {

struct ItlinqParams {
    double m_db = 25.0;
    double eta = 0.7;

    void validate() const;
};

JointAction act_random(const Observation& obs, Rng& rng);
JointAction act_greedy(const Observation& obs);

/// Round-robin over the concatenated valid top-k entries in (AP, slot) order.
/// Exactly one AP is active per slot; all OFF when no AP has a valid entry.
JointAction act_tdm(const Observation& obs, int slot_counter);

struct ItlinqLink {
    int ap = 0;
    int ue = 0;
    double snr = 0.0;
    double pf_ratio = 0.0;
};

/// Centralized independent-set scheduler over the per-AP top-PF nominees. Links are visited
/// by descending PF ratio and admitted if their SNR^eta dominates, by margin m, the INR
/// received from and caused to every link already admitted.
JointAction act_itlinq(const Environment& env, const ItlinqParams& params);

/// Admission order and links as act_itlinq sees them; exposed for post-hoc checks.
std::vector<ItlinqLink> itlinq_candidates(const Environment& env);
double inr(const Environment& env, int interfering_ap, int victim_ue);
bool itlinq_compatible(const Environment& env, const ItlinqLink& a, const ItlinqLink& b,
                       const ItlinqParams& params);

/// Anything that maps the current environment state to a joint action.
class SchedulingPolicy {
public:
    virtual ~SchedulingPolicy() = default;
    virtual std::string name() const = 0;
    virtual JointAction act(const Environment& env, Rng& rng) = 0;
};

class RandomPolicy final : public SchedulingPolicy {
public:
    std::string name() const override { return "random"; }
    JointAction act(const Environment& env, Rng& rng) override { return act_random(env.observation(), rng); }
};

class GreedyPolicy final : public SchedulingPolicy {
public:
    std::string name() const override { return "greedy"; }
    JointAction act(const Environment& env, Rng&) override { return act_greedy(env.observation()); }
};

class TdmPolicy final : public SchedulingPolicy {
public:
    std::string name() const override { return "tdm"; }
    JointAction act(const Environment& env, Rng&) override { return act_tdm(env.observation(), env.t()); }
};

class ItlinqPolicy final : public SchedulingPolicy {
public:
    explicit ItlinqPolicy(ItlinqParams params = {}) : params_(params) {}
    std::string name() const override { return "itlinq"; }
    JointAction act(const Environment& env, Rng&) override { return act_itlinq(env, params_); }

private:
    ItlinqParams params_;
};

}  // namespace rrm
