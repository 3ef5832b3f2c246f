#include "rrmlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rrmlab/errors.hpp"

namespace rrm {

void MetricConfig::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(eta)) throw ConfigError("metric.mu/eta must be finite");
    if (!(quantile_level > 0.0 && quantile_level < 1.0)) throw ConfigError("metric.quantile_level must be in (0, 1)");
}

std::vector<double> avg_user_throughput(std::span<const std::vector<double>> episode_rates) {
    require(!episode_rates.empty(), "avg_user_throughput: episode has no slots");
    std::vector<double> mean(episode_rates.front().size(), 0.0);
    for (const auto& slot : episode_rates) {
        require(slot.size() == mean.size(), "avg_user_throughput: ragged rate table");
        for (std::size_t j = 0; j < slot.size(); ++j) mean[j] += slot[j];
    }
    for (double& m : mean) m /= static_cast<double>(episode_rates.size());
    return mean;
}

double quantile(std::vector<double> values, double level) {
    require(!values.empty(), "quantile: empty input");
    std::sort(values.begin(), values.end());
    // Extended precision so that e.g. 19 * 0.05 does not round up past the exact position.
    const long double h = static_cast<long double>(values.size() - 1) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const long double frac = h - static_cast<long double>(lo);
    return static_cast<double>(values[lo] + frac * (static_cast<long double>(values[lo + 1]) - values[lo]));
}

double five_percentile_rate(std::span<const double> throughputs) {
    return quantile(std::vector<double>(throughputs.begin(), throughputs.end()), 0.05);
}

double r_score(double sum_rate, double p5_rate, const MetricConfig& cfg) {
    return cfg.mu * sum_rate + cfg.eta * p5_rate;
}

void aggregate(EvalReport& report, const MetricConfig& cfg) {
    require(!report.envs.empty(), "aggregate: report has no environments");
    const auto n = static_cast<double>(report.envs.size());
    double sum = 0.0;
    double tail_mean = 0.0;
    std::vector<double> pooled;
    for (const EnvEvaluation& e : report.envs) {
        sum += e.sum_rate;
        tail_mean += e.p5_rate;
        pooled.insert(pooled.end(), e.throughputs.begin(), e.throughputs.end());
    }
    report.sum_rate_mean = sum / n;
    double var = 0.0;
    for (const EnvEvaluation& e : report.envs) var += (e.sum_rate - report.sum_rate_mean) * (e.sum_rate - report.sum_rate_mean);
    report.sum_rate_std = std::sqrt(var / n);
    report.p5_rate = cfg.tail_mode == TailMode::Pooled ? quantile(pooled, cfg.quantile_level) : tail_mean / n;
    report.r_score = r_score(report.sum_rate_mean, report.p5_rate, cfg);
}

EvalReport evaluate_policy(SchedulingPolicy& policy, std::span<const std::uint64_t> seeds, const EnvConfig& env_cfg,
                           const RadioConfig& radio, const MetricConfig& metric, std::uint64_t policy_seed) {
    metric.validate();
    EvalReport report;
    report.policy = policy.name();
    for (std::uint64_t seed : seeds) {
        Environment env(env_cfg, radio, seed);
        Rng rng = make_stream(policy_seed, "eval-policy", seed);
        std::vector<std::vector<double>> rates;
        rates.reserve(static_cast<std::size_t>(env_cfg.episode_len));
        double reward = 0.0;
        while (!env.done()) {
            StepResult step = env.step(policy.act(env, rng));
            reward += step.reward;
            rates.push_back(std::move(step.per_ue_rate));
        }
        EnvEvaluation e;
        e.seed = seed;
        e.throughputs = avg_user_throughput(rates);
        e.sum_rate = std::accumulate(e.throughputs.begin(), e.throughputs.end(), 0.0);
        e.p5_rate = quantile(e.throughputs, metric.quantile_level);
        e.r_score = r_score(e.sum_rate, e.p5_rate, metric);
        e.mean_reward = reward / static_cast<double>(rates.size());
        report.envs.push_back(std::move(e));
    }
    aggregate(report, metric);
    return report;
}

std::vector<std::uint64_t> default_validation_seeds() {
    std::vector<std::uint64_t> seeds(10);
    std::iota(seeds.begin(), seeds.end(), 1000);
    return seeds;
}

}  // namespace rrm
