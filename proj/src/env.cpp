#include "rrmlab/env.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "rrmlab/errors.hpp"

namespace rrm {

namespace {

constexpr int kPlacementAttempts = 10000;
constexpr int kMaxReflections = 8;

std::atomic<std::uint64_t> g_total_steps{0};

}  // namespace

void EnvConfig::validate() const {
    if (n_aps < 1) throw ConfigError("env.n_aps must be >= 1");
    if (n_ues < 1) throw ConfigError("env.n_ues must be >= 1");
    if (episode_len < 1) throw ConfigError("env.episode_len must be >= 1");
    if (topk < 1) throw ConfigError("env.topk must be >= 1");
    if (!(area_side > 0.0)) throw ConfigError("env.area_side must be > 0");
    if (!(pf_alpha > 0.0 && pf_alpha <= 1.0)) throw ConfigError("env.pf_alpha must be in (0, 1]");
    if (!(reward_lambda >= 0.0)) throw ConfigError("env.reward_lambda must be >= 0");
    if (!(pf_floor > 0.0)) throw ConfigError("env.pf_floor must be > 0");
    if (!(max_speed >= 0.0) || !(slot_dt > 0.0)) throw ConfigError("env.max_speed/slot_dt invalid");
    double count = std::pow(topk + 1.0, n_aps);
    if (count > 1 << 20) throw ConfigError("env: (topk+1)^n_aps is too large for a flat action space");
}

int EnvConfig::action_count() const {
    int count = 1;
    for (int i = 0; i < n_aps; ++i) count *= topk + 1;
    return count;
}

std::vector<int> associate_users(const ChannelState& state, const RadioConfig& radio) {
    std::vector<int> association(static_cast<std::size_t>(state.n_ues()), 0);
    for (int j = 0; j < state.n_ues(); ++j) {
        int best = 0;
        double best_rsrp = rsrp_dbm(0, j, state, radio);
        for (int i = 1; i < state.n_aps(); ++i) {
            const double r = rsrp_dbm(i, j, state, radio);
            if (r > best_rsrp) {
                best = i;
                best_rsrp = r;
            }
        }
        association[static_cast<std::size_t>(j)] = best;
    }
    return association;
}

std::vector<std::vector<int>> build_pools(std::span<const int> association, int n_aps) {
    std::vector<std::vector<int>> pools(static_cast<std::size_t>(n_aps));
    for (std::size_t j = 0; j < association.size(); ++j) {
        require(association[j] >= 0 && association[j] < n_aps, "build_pools: AP index out of range");
        pools[static_cast<std::size_t>(association[j])].push_back(static_cast<int>(j));
    }
    return pools;
}

Deployment generate_topology(const EnvConfig& cfg, const RadioConfig& radio, std::uint64_t seed) {
    cfg.validate();
    radio.validate();
    Deployment out;
    Topology& topo = out.topology;
    topo.seed = seed;

    Rng ap_rng = make_stream(seed, "ap-placement");
    std::uniform_real_distribution<double> coord(0.0, cfg.area_side);
    for (int i = 0; i < cfg.n_aps; ++i) topo.ap_positions.push_back({coord(ap_rng), coord(ap_rng)});

    Rng ue_rng = make_stream(seed, "ue-placement");
    for (int j = 0; j < cfg.n_ues; ++j) {
        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
            const Point p{coord(ue_rng), coord(ue_rng)};
            const bool ok_ap = std::all_of(topo.ap_positions.begin(), topo.ap_positions.end(),
                                           [&](Point a) { return distance(a, p) >= cfg.min_dist_ap; });
            const bool ok_ue = std::all_of(topo.ue_positions.begin(), topo.ue_positions.end(),
                                           [&](Point u) { return distance(u, p) >= cfg.min_dist_ue; });
            if (ok_ap && ok_ue) {
                topo.ue_positions.push_back(p);
                placed = true;
            }
        }
        if (!placed) {
            throw ConfigError("generate_topology: could not place UE " + std::to_string(j) + " after " +
                              std::to_string(kPlacementAttempts) + " attempts; area too small");
        }
    }

    out.channel = ChannelState(cfg.n_aps, cfg.n_ues);
    update_pathloss(out.channel, topo.ap_positions, topo.ue_positions, radio);
    Rng shadow_rng = make_stream(seed, "shadowing");
    draw_shadowing(out.channel, radio, shadow_rng);

    topo.association = associate_users(out.channel, radio);
    topo.user_pools = build_pools(topo.association, cfg.n_aps);
    return out;
}

bool resolve_position(Point& p, Point heading, int self, std::span<const Point> ues,
                      std::span<const Point> aps, const EnvConfig& cfg) {
    const double side = cfg.area_side;
    auto reflect_axis = [side](double v) {
        for (int i = 0; i < kMaxReflections && (v < 0.0 || v > side); ++i) v = v < 0.0 ? -v : 2.0 * side - v;
        return v;
    };
    // Pushes p radially out of the disk (center c, radius r) to distance 2r - d.
    auto reflect_disk = [&](Point c, double r) {
        const double d = distance(p, c);
        if (d >= r) return false;
        double ux = 0.0;
        double uy = 0.0;
        if (d > 0.0) {
            ux = (p.x - c.x) / d;
            uy = (p.y - c.y) / d;
        } else {
            const double hn = std::hypot(heading.x, heading.y);
            ux = hn > 0.0 ? -heading.x / hn : 1.0;
            uy = hn > 0.0 ? -heading.y / hn : 0.0;
        }
        p = {c.x + (2.0 * r - d) * ux, c.y + (2.0 * r - d) * uy};
        return true;
    };
    for (int pass = 0; pass < kMaxReflections; ++pass) {
        p.x = reflect_axis(p.x);
        p.y = reflect_axis(p.y);
        bool moved = false;
        for (const Point& a : aps) moved |= reflect_disk(a, cfg.min_dist_ap);
        for (std::size_t j = 0; j < ues.size(); ++j) {
            if (static_cast<int>(j) != self) moved |= reflect_disk(ues[j], cfg.min_dist_ue);
        }
        const bool inside = p.x >= 0.0 && p.x <= side && p.y >= 0.0 && p.y <= side;
        if (!moved && inside) return true;
    }
    return false;
}

void step_mobility(std::vector<Point>& ues, std::span<const Point> aps, const EnvConfig& cfg, Rng& rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> speed(0.0, cfg.max_speed);
    for (std::size_t j = 0; j < ues.size(); ++j) {
        const double theta = angle(rng);
        const double step = speed(rng) * cfg.slot_dt;
        const Point heading{step * std::cos(theta), step * std::sin(theta)};
        Point p{ues[j].x + heading.x, ues[j].y + heading.y};
        if (resolve_position(p, heading, static_cast<int>(j), ues, aps, cfg)) ues[j] = p;
    }
}

PfTracker::PfTracker(int n_ues, double alpha, double floor)
    : alpha_(alpha), floor_(floor), tilde_c_(static_cast<std::size_t>(n_ues), 0.0) {
    require(alpha > 0.0 && alpha <= 1.0, "PfTracker: alpha must be in (0, 1]");
    require(floor > 0.0, "PfTracker: floor must be > 0");
    refresh_weights();
}

void PfTracker::update(std::span<const double> rates, int t) {
    require(rates.size() == tilde_c_.size(), "PfTracker::update: rate vector has wrong length");
    for (std::size_t j = 0; j < rates.size(); ++j) {
        tilde_c_[j] = t == 0 ? rates[j] : alpha_ * rates[j] + (1.0 - alpha_) * tilde_c_[j];
    }
    refresh_weights();
}

void PfTracker::refresh_weights() {
    weights_.resize(tilde_c_.size());
    for (std::size_t j = 0; j < tilde_c_.size(); ++j) weights_[j] = 1.0 / std::max(tilde_c_[j], floor_);
}

int Observation::valid_count(int ap) const {
    int n = 0;
    for (int k = 0; k < topk; ++k) n += slot(ap, k).valid() ? 1 : 0;
    return n;
}

double sinr_feature(double sinr_db) {
    const double clipped = std::clamp(sinr_db, -20.0, 40.0);
    return (clipped + 20.0) / 30.0 - 1.0;
}

double pf_feature(double weight) {
    return std::clamp(std::log10(weight), -3.0, 3.0) / 3.0;
}

Observation build_observation(const Topology& topo, const ChannelState& channel, const RadioConfig& radio,
                              std::span<const double> weights, int topk) {
    const int n_aps = channel.n_aps();
    Observation obs;
    obs.n_aps = n_aps;
    obs.topk = topk;
    obs.slots.assign(static_cast<std::size_t>(n_aps * topk), ObsSlot{});
    obs.features.assign(static_cast<std::size_t>(n_aps * topk * 3), -1.0);
    const std::vector<bool> active(static_cast<std::size_t>(n_aps), true);

    for (int ap = 0; ap < n_aps; ++ap) {
        std::vector<int> pool = topo.user_pools[static_cast<std::size_t>(ap)];
        std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
            return weights[static_cast<std::size_t>(a)] > weights[static_cast<std::size_t>(b)];
        });
        const int kept = std::min<int>(topk, static_cast<int>(pool.size()));
        for (int k = 0; k < kept; ++k) {
            const int ue = pool[static_cast<std::size_t>(k)];
            ObsSlot& s = obs.slots[static_cast<std::size_t>(ap * topk + k)];
            s.ue = ue;
            s.sinr_db = linear_to_db(compute_sinr(ue, ap, active, channel, radio));
            s.weight = weights[static_cast<std::size_t>(ue)];
            const std::size_t base = static_cast<std::size_t>((ap * topk + k) * 3);
            obs.features[base] = sinr_feature(s.sinr_db);
            obs.features[base + 1] = pf_feature(s.weight);
            obs.features[base + 2] = 1.0;
        }
        for (int k = kept; k < topk; ++k) {
            obs.features[static_cast<std::size_t>((ap * topk + k) * 3 + 2)] = 0.0;
        }
    }
    return obs;
}

int encode_action(std::span<const int> choice, int topk) {
    int index = 0;
    int scale = 1;
    for (int a : choice) {
        require(a >= 0 && a <= topk, "encode_action: component outside [0, k]");
        index += a * scale;
        scale *= topk + 1;
    }
    return index;
}

JointAction decode_action(int index, int n_aps, int topk) {
    int count = 1;
    for (int i = 0; i < n_aps; ++i) count *= topk + 1;
    require(index >= 0 && index < count,
            "decode_action: index " + std::to_string(index) + " outside [0, " + std::to_string(count) + ")");
    JointAction action;
    action.choice.resize(static_cast<std::size_t>(n_aps));
    for (int i = 0; i < n_aps; ++i) {
        action.choice[static_cast<std::size_t>(i)] = index % (topk + 1);
        index /= topk + 1;
    }
    return action;
}

double compute_reward(std::span<const double> weights, std::span<const double> rates, double lambda) {
    require(weights.size() == rates.size(), "compute_reward: length mismatch");
    double r = 0.0;
    for (std::size_t j = 0; j < rates.size(); ++j) {
        require(weights[j] > 0.0, "compute_reward: weights must be positive");
        if (rates[j] != 0.0) r += std::pow(weights[j], lambda) * rates[j];
    }
    return r;
}

Environment::Environment(const EnvConfig& cfg, const RadioConfig& radio, std::uint64_t seed)
    : cfg_(cfg), radio_(radio), seed_(seed) {
    reset();
}

void Environment::reset() {
    deployment_ = generate_topology(cfg_, radio_, seed_);
    mobility_rng_ = make_stream(seed_, "mobility");
    fading_rng_ = make_stream(seed_, "fading");
    draw_fading(deployment_.channel, fading_rng_);
    pf_ = PfTracker(cfg_.n_ues, cfg_.pf_alpha, cfg_.pf_floor);
    t_ = 0;
    rebuild_observation();
}

void Environment::rebuild_observation() {
    obs_ = build_observation(deployment_.topology, deployment_.channel, radio_, pf_.weights(), cfg_.topk);
}

StepResult Environment::step(const JointAction& action) {
    require(!done(), "Environment::step: episode already finished");
    require(static_cast<int>(action.choice.size()) == cfg_.n_aps, "Environment::step: wrong action arity");
    g_total_steps.fetch_add(1, std::memory_order_relaxed);

    const auto n_aps = static_cast<std::size_t>(cfg_.n_aps);
    std::vector<bool> active(n_aps, false);
    std::vector<int> served(n_aps, -1);
    for (std::size_t i = 0; i < n_aps; ++i) {
        const int a = action.choice[i];
        require(a >= 0 && a <= cfg_.topk, "Environment::step: action component outside [0, k]");
        if (a < cfg_.topk) {
            const ObsSlot& s = obs_.slot(static_cast<int>(i), a);
            if (s.valid()) {
                active[i] = true;
                served[i] = s.ue;
            }
        }
    }

    StepResult result;
    result.action_index = encode_action(action.choice, cfg_.topk);
    result.per_ue_rate.assign(static_cast<std::size_t>(cfg_.n_ues), 0.0);
    result.per_ue_sinr.assign(static_cast<std::size_t>(cfg_.n_ues), 0.0);
    for (std::size_t i = 0; i < n_aps; ++i) {
        if (served[i] < 0) continue;
        const double sinr = compute_sinr(served[i], static_cast<int>(i), active, deployment_.channel, radio_);
        result.per_ue_sinr[static_cast<std::size_t>(served[i])] = sinr;
        result.per_ue_rate[static_cast<std::size_t>(served[i])] = std::log2(1.0 + sinr);
    }
    result.reward = compute_reward(pf_.weights(), result.per_ue_rate, cfg_.reward_lambda);
    pf_.update(result.per_ue_rate, t_);
    ++t_;

    Topology& topo = deployment_.topology;
    step_mobility(topo.ue_positions, topo.ap_positions, cfg_, mobility_rng_);
    update_pathloss(deployment_.channel, topo.ap_positions, topo.ue_positions, radio_);
    draw_fading(deployment_.channel, fading_rng_);
    rebuild_observation();

    result.next_obs = obs_;
    result.done = done();
    return result;
}

std::uint64_t Environment::total_steps() {
    return g_total_steps.load(std::memory_order_relaxed);
}

void write_trace_header(std::ostream& os, int n_ues) {
    os << "t";
    for (int j = 0; j < n_ues; ++j) os << ",rate_ue" << j;
    os << ",reward,action\n";
}

void write_trace_row(std::ostream& os, int t, const StepResult& step) {
    os << t;
    for (double r : step.per_ue_rate) os << ',' << r;
    os << ',' << step.reward << ',' << step.action_index << '\n';
}

}  // namespace rrm
