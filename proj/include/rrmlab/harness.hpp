#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rrmlab/config.hpp"
#include "rrmlab/learned_policy.hpp"
#include "rrmlab/policies.hpp"

namespace rrm {

/// random | greedy | tdm | itlinq | ckpt:<path>. Checkpoints act per `mode`.
std::unique_ptr<SchedulingPolicy> make_policy(const std::string& spec, const Scenario& scenario, ActMode mode);

/// Entry point of the command-line tool; returns the process exit status
/// (0 ok, 1 runtime failure, 2 usage or configuration error).
int run_cli(const std::vector<std::string>& args);

}  // namespace rrm
