#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrmlab/env.hpp"
#include "rrmlab/policies.hpp"

namespace rrm {

enum class TailMode { Pooled, PerEnvMean };

struct MetricConfig {
    double mu = 1.0;
    double eta = 5.0;
    double quantile_level = 0.05;
    TailMode tail_mode = TailMode::Pooled;

    void validate() const;
};

/// Per-UE mean of the slot rates; `episode_rates[t][j]`.
std::vector<double> avg_user_throughput(std::span<const std::vector<double>> episode_rates);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double level);
double five_percentile_rate(std::span<const double> throughputs);

double r_score(double sum_rate, double p5_rate, const MetricConfig& cfg);

struct EnvEvaluation {
    std::uint64_t seed = 0;
    double sum_rate = 0.0;
    double p5_rate = 0.0;  // within this environment alone
    double r_score = 0.0;  // mu * sum_rate + eta * p5_rate, this environment alone
    double mean_reward = 0.0;
    std::vector<double> throughputs;
};

struct EvalReport {
    std::string policy;
    std::vector<EnvEvaluation> envs;
    double sum_rate_mean = 0.0;
    double sum_rate_std = 0.0;
    double p5_rate = 0.0;  // pooled or per-env mean, per MetricConfig::tail_mode
    double r_score = 0.0;
};

/// Recomputes the aggregate fields of `report` from its per-environment rows.
void aggregate(EvalReport& report, const MetricConfig& cfg);

/// One full episode per validation seed. Stochastic policies draw from a stream
/// derived from (policy_seed, env seed).
EvalReport evaluate_policy(SchedulingPolicy& policy, std::span<const std::uint64_t> seeds, const EnvConfig& env,
                           const RadioConfig& radio, const MetricConfig& metric, std::uint64_t policy_seed = 0);

std::vector<std::uint64_t> default_validation_seeds();

// One row of a learning curve.
struct CurvePoint {
    int epoch = 0;
    double r_score = 0.0;
    double sum_rate = 0.0;
    double p5_rate = 0.0;
};

}  // namespace rrm
