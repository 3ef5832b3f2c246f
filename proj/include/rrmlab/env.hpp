#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rrmlab/channel.hpp"
#include "rrmlab/rng.hpp"

namespace rrm {

struct EnvConfig {
    int n_aps = 4;
    int n_ues = 16;
    int episode_len = 200;
    double area_side = 50.0;
    int topk = 3;
    double max_speed = 1.0;
    double slot_dt = 1.0;
    double min_dist_ap = 1.0;
    double min_dist_ue = 1.0;
    double pf_alpha = 0.05;
    double reward_lambda = 1.0;
    double pf_floor = 1e-3;

    void validate() const;

    int obs_dim() const { return n_aps * topk * 3; }
    int action_count() const;
};

struct Topology {
    std::vector<Point> ap_positions;
    std::vector<Point> ue_positions;
    std::vector<int> association;             // ue -> ap
    std::vector<std::vector<int>> user_pools;  // ap -> ues, ascending
    std::uint64_t seed = 0;
};

// Topology plus the large-scale channel it was associated under.
struct Deployment {
    Topology topology;
    ChannelState channel;
};

/// APs uniform in the square; UEs uniform with rejection against min_dist_ap / min_dist_ue
/// (10^4 attempts per UE); shadowing drawn; users associated by max RSRP.
Deployment generate_topology(const EnvConfig& cfg, const RadioConfig& radio, std::uint64_t seed);

/// argmax over APs of large-scale RSRP; ties go to the lowest AP index.
std::vector<int> associate_users(const ChannelState& state, const RadioConfig& radio);

std::vector<std::vector<int>> build_pools(std::span<const int> association, int n_aps);

/// Random-direction step of speed U[0, max_speed] per UE; area edges and the forbidden disks
/// around APs and other UEs mirror the overshoot back.
void step_mobility(std::vector<Point>& ues, std::span<const Point> aps, const EnvConfig& cfg, Rng& rng);

/// Mirrors `p` back into the area and out of the disks; returns false if still violating
/// after 8 passes.
bool resolve_position(Point& p, Point heading, int self, std::span<const Point> ues,
                      std::span<const Point> aps, const EnvConfig& cfg);

class PfTracker {
public:
    PfTracker() = default;
    PfTracker(int n_ues, double alpha, double floor);

    /// First call (t == 0) seeds the average with the observed rates.
    void update(std::span<const double> rates, int t);

    const std::vector<double>& smoothed() const { return tilde_c_; }
    const std::vector<double>& weights() const { return weights_; }

private:
    void refresh_weights();

    double alpha_ = 0.05;
    double floor_ = 1e-3;
    std::vector<double> tilde_c_;
    std::vector<double> weights_;
};

struct ObsSlot {
    int ue = -1;  // -1 marks a padded slot
    double sinr_db = 0.0;
    double weight = 0.0;
    bool valid() const { return ue >= 0; }
};

struct Observation {
    int n_aps = 0;
    int topk = 0;
    std::vector<ObsSlot> slots;    // ap-major, n_aps * topk
    std::vector<double> features;  // per slot: sinr feature, pf feature, valid flag

    const ObsSlot& slot(int ap, int k) const { return slots[static_cast<std::size_t>(ap * topk + k)]; }
    int valid_count(int ap) const;
};

double sinr_feature(double sinr_db);
double pf_feature(double weight);

/// Top-k by PF weight per AP (ties to the lower UE index) with all-APs-active SINR.
Observation build_observation(const Topology& topo, const ChannelState& channel, const RadioConfig& radio,
                              std::span<const double> weights, int topk);

struct JointAction {
    std::vector<int> choice;  // per AP: 0..k-1 serve that slot, k = OFF
};

int encode_action(std::span<const int> choice, int topk);
JointAction decode_action(int index, int n_aps, int topk);

double compute_reward(std::span<const double> weights, std::span<const double> rates, double lambda);

struct StepResult {
    Observation next_obs;
    double reward = 0.0;
    std::vector<double> per_ue_rate;
    std::vector<double> per_ue_sinr;  // 0 for unserved
    int action_index = 0;
    bool done = false;
};

/// One environment instance: fixed APs, one episode of UE motion and fading per reset().
class Environment {
public:
    Environment(const EnvConfig& cfg, const RadioConfig& radio, std::uint64_t seed);

    void reset();
    StepResult step(const JointAction& action);

    const EnvConfig& config() const { return cfg_; }
    const RadioConfig& radio() const { return radio_; }
    const Topology& topology() const { return deployment_.topology; }
    const ChannelState& channel() const { return deployment_.channel; }
    const PfTracker& pf() const { return pf_; }
    const Observation& observation() const { return obs_; }
    int t() const { return t_; }
    bool done() const { return t_ >= cfg_.episode_len; }

    /// Process-wide count of step() calls, for offline-purity assertions.
    static std::uint64_t total_steps();

private:
    void rebuild_observation();

    EnvConfig cfg_;
    RadioConfig radio_;
    std::uint64_t seed_;
    Deployment deployment_;
    Rng mobility_rng_;
    Rng fading_rng_;
    PfTracker pf_;
    Observation obs_;
    int t_ = 0;
};

void write_trace_header(std::ostream& os, int n_ues);
void write_trace_row(std::ostream& os, int t, const StepResult& step);

}  // namespace rrm
