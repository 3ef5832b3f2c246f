#pragma once

#include <cstdint>
#include <vector>

#include "rrmlab/channel.hpp"
#include "rrmlab/env.hpp"
#include "rrmlab/metrics.hpp"
#include "rrmlab/policies.hpp"

namespace rrm {

// Everything needed to build and score environments, shared by all experiments.
struct Scenario {
    EnvConfig env;
    RadioConfig radio;
    MetricConfig metric;
    ItlinqParams itlinq;
    std::vector<std::uint64_t> validation_seeds = default_validation_seeds();

    void validate() const {
        env.validate();
        radio.validate();
        metric.validate();
        itlinq.validate();
    }
};

}  // namespace rrm
