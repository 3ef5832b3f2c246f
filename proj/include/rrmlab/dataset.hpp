#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rrmlab/batch.hpp"
#include "rrmlab/policies.hpp"
#include "rrmlab/scenario.hpp"

namespace rrm {

struct MixProvenance {
    std::string name;
    std::uint64_t count = 0;
};

struct DatasetHeader {
    std::uint32_t schema_version = 1;
    std::string env_digest;
    int obs_dim = 0;
    int action_count = 0;
    std::string bp_name;
    std::uint64_t env_seed = 0;     // base seed of the collection environments
    std::uint64_t policy_seed = 0;  // stream for stochastic behavior policies
    std::uint64_t count = 0;
    std::vector<MixProvenance> sources;  // set by mix()
};

/// Transitions in structure-of-arrays form at 32-bit precision.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(DatasetHeader header);

    void push(std::span<const double> obs, int action, double reward, std::span<const double> next_obs, bool done);
    /// Copies record `i` of `other` verbatim.
    void push_from(const Dataset& other, std::size_t i);

    std::size_t size() const { return actions_.size(); }
    bool empty() const { return actions_.empty(); }
    const DatasetHeader& header() const { return header_; }
    DatasetHeader& header() { return header_; }
    int obs_dim() const { return header_.obs_dim; }

    std::span<const float> obs(std::size_t i) const;
    std::span<const float> next_obs(std::size_t i) const;
    std::uint32_t action(std::size_t i) const { return actions_[i]; }
    float reward(std::size_t i) const { return rewards_[i]; }
    bool done(std::size_t i) const { return done_[i] != 0; }

    /// Uniform draws with replacement, widened to double.
    Batch sample(int batch_size, Rng& rng) const;
    Batch gather(std::span<const std::size_t> indices) const;

    void save(const std::string& path) const;
    static Dataset load(const std::string& path);

    /// Bytes of one serialized record for an observation dimension.
    static std::size_t record_size(int obs_dim) { return 8 * static_cast<std::size_t>(obs_dim) + 9; }

private:
    DatasetHeader header_;
    std::vector<float> obs_;
    std::vector<float> next_obs_;
    std::vector<std::uint32_t> actions_;
    std::vector<float> rewards_;
    std::vector<std::uint8_t> done_;
};

/// Hex FNV-1a digest of the canonical environment + radio configuration.
std::string env_digest(const EnvConfig& env, const RadioConfig& radio);

std::string header_text(const DatasetHeader& header);
DatasetHeader parse_header_text(const std::string& text);

/// Seed of the e-th collection environment for a base seed.
std::uint64_t collection_env_seed(std::uint64_t base_seed, std::uint64_t episode);

/// Runs full episodes of `bp` on fresh environments until `n_transitions` are recorded.
Dataset collect(SchedulingPolicy& bp, const Scenario& scenario, std::uint64_t env_seed, std::uint64_t n_transitions,
                std::uint64_t policy_seed);

struct MixSource {
    const Dataset* dataset = nullptr;
    std::string name;
    double proportion = 0.0;
};

/// floor(p_i * total) per source, remainders to the largest fractional parts (ties to the
/// earlier source).
std::vector<std::uint64_t> allocate_counts(std::span<const double> proportions, std::uint64_t total);

/// Uniform sampling without replacement inside each source, then a global shuffle.
Dataset mix(std::span<const MixSource> sources, std::uint64_t total, Rng& rng);

struct MixEntry {
    std::string path;
    double proportion = 0.0;
};

/// Parses "a.orld:0.5,b.orld:0.2,...".
std::vector<MixEntry> parse_mix_spec(const std::string& spec);

}  // namespace rrm
