#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "rrmlab/metrics.hpp"
#include "rrmlab/nn.hpp"
#include "rrmlab/sac.hpp"
#include "rrmlab/scenario.hpp"

namespace rrm {

struct OnlineConfig {
    SacConfig sac;
    int epochs = 350;
    int episodes_per_epoch = 15;           // 5000 episodes over 350 epochs
    std::vector<int> snapshot_epochs{125};  // kept as early-stopped behavior policies
    std::uint64_t seed = 1;
    int runs = 10;  // independent training runs, seeds seed, seed + 1, ...
};

struct OnlineResult {
    std::vector<CurvePoint> curve;            // one row per epoch
    std::map<int, nn::Checkpoint> snapshots;  // epoch -> policy checkpoint
    nn::Checkpoint final_policy;
};

/// Training environments are fresh per episode, seeded from (cfg.seed, episode index).
std::uint64_t training_env_seed(std::uint64_t run_seed, std::uint64_t episode);

/// Online SAC loop: explore on fresh environments, one update per step after warm-up, greedy
/// evaluation on the validation seeds after each epoch. With a non-empty `out_dir`, writes
/// learning_curve.csv and the snapshot/final checkpoints there.
OnlineResult train_online(const Scenario& scenario, const OnlineConfig& cfg, const std::string& out_dir = {},
                          const std::function<void(const CurvePoint&)>& on_epoch = {});

}  // namespace rrm
