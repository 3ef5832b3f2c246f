#include "rrmlab/online.hpp"

#include <filesystem>

#include "rrmlab/errors.hpp"
#include "rrmlab/learned_policy.hpp"
#include "rrmlab/report.hpp"

namespace rrm {

std::uint64_t training_env_seed(std::uint64_t run_seed, std::uint64_t episode) {
    return mix64(mix64(run_seed ^ fnv1a("training-env")) + episode);
}

OnlineResult train_online(const Scenario& scenario, const OnlineConfig& cfg, const std::string& out_dir,
                          const std::function<void(const CurvePoint&)>& on_epoch) {
    scenario.validate();
    cfg.sac.validate();
    if (cfg.epochs < 0 || cfg.episodes_per_epoch < 1) throw ConfigError("online: epochs/episodes_per_epoch invalid");
    const EnvConfig& ec = scenario.env;
    SacAgent agent(ec.obs_dim(), ec.action_count(), cfg.sac, cfg.seed);
    ReplayBuffer replay(ec.obs_dim(), cfg.sac.replay_capacity);
    Rng act_rng = make_stream(cfg.seed, "sac-explore");
    Rng sample_rng = make_stream(cfg.seed, "sac-replay");

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
    OnlineResult result;
    std::int64_t env_steps = 0;
    const double total_steps =
        static_cast<double>(cfg.epochs) * cfg.episodes_per_epoch * static_cast<double>(ec.episode_len);
    std::uint64_t episode = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (int e = 0; e < cfg.episodes_per_epoch; ++e, ++episode) {
            Environment env(ec, scenario.radio, training_env_seed(cfg.seed, episode));
            while (!env.done()) {
                const auto& f = env.observation().features;
                const nn::Vector x = Eigen::Map<const nn::Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
                const int a = agent.act(x, true, act_rng);
                const StepResult step = env.step(decode_action(a, ec.n_aps, ec.topk));
                replay.push(f, a, step.reward, step.next_obs.features, step.done);
                ++env_steps;
                if (cfg.sac.lr_final_fraction != 1.0) {
                    const double progress = static_cast<double>(env_steps) / total_steps;
                    agent.set_lr_scale(1.0 - (1.0 - cfg.sac.lr_final_fraction) * progress);
                }
                if (env_steps >= cfg.sac.warmup_steps && replay.size() >= cfg.sac.batch_size) {
                    for (int u = 0; u < cfg.sac.updates_per_step; ++u) {
                        agent.update(replay.sample(cfg.sac.batch_size, sample_rng));
                    }
                }
            }
        }
        LearnedPolicy greedy(agent.checkpoint(), ActMode::Greedy, "sac");
        const EvalReport report =
            evaluate_policy(greedy, scenario.validation_seeds, ec, scenario.radio, scenario.metric, cfg.seed);
        const CurvePoint point{epoch, report.r_score, report.sum_rate_mean, report.p5_rate};
        result.curve.push_back(point);
        if (on_epoch) on_epoch(point);
        for (int snap : cfg.snapshot_epochs) {
            if (snap == epoch) {
                result.snapshots[epoch] = agent.checkpoint();
                if (!out_dir.empty()) {
                    nn::save_checkpoint(out_dir + "/sac_epoch_" + std::to_string(epoch) + ".rrmn", agent.checkpoint());
                }
            }
        }
        if (!out_dir.empty()) write_learning_curve(out_dir + "/learning_curve.csv", result.curve);
    }
    result.final_policy = agent.checkpoint();
    if (!out_dir.empty()) {
        nn::save_checkpoint(out_dir + "/sac_final.rrmn", result.final_policy);
        write_learning_curve(out_dir + "/learning_curve.csv", result.curve);
    }
    return result;
}

}  // namespace rrm
