#include "rrmlab/channel.hpp"

#include <cmath>
#include <random>
#include <string>

#include "rrmlab/errors.hpp"

namespace rrm {

double distance(Point a, Point b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void RadioConfig::validate() const {
    if (!(bandwidth_hz > 0.0)) throw ConfigError("radio.bandwidth_hz must be > 0");
    if (!(min_prop_distance_m > 0.0)) throw ConfigError("radio.min_prop_distance_m must be > 0");
    if (!(shadowing_sigma_db >= 0.0)) throw ConfigError("radio.shadowing_sigma_db must be >= 0");
    if (!(carrier_freq_ghz > 0.0)) throw ConfigError("radio.carrier_freq_ghz must be > 0");
}

ChannelState::ChannelState(int n_aps, int n_ues)
    : pathloss_db(Eigen::MatrixXd::Zero(n_aps, n_ues)),
      shadowing_db(Eigen::MatrixXd::Zero(n_aps, n_ues)),
      fading_power(Eigen::MatrixXd::Ones(n_aps, n_ues)) {}

double path_loss_db(double distance_m, const RadioConfig& cfg) {
    require(distance_m >= 0.0, "path_loss_db: negative distance");
    const double d = std::max(distance_m, cfg.min_prop_distance_m);
    return 32.8 + 16.9 * std::log10(d) + 20.0 * std::log10(cfg.carrier_freq_ghz);
}

void update_pathloss(ChannelState& state, std::span<const Point> aps, std::span<const Point> ues,
                     const RadioConfig& cfg) {
    require(static_cast<int>(aps.size()) == state.n_aps() &&
                static_cast<int>(ues.size()) == state.n_ues(),
            "update_pathloss: position count does not match channel shape");
    for (int i = 0; i < state.n_aps(); ++i) {
        for (int j = 0; j < state.n_ues(); ++j) {
            state.pathloss_db(i, j) = path_loss_db(distance(aps[i], ues[j]), cfg);
        }
    }
}

void draw_shadowing(ChannelState& state, const RadioConfig& cfg, Rng& rng) {
    if (cfg.shadowing_sigma_db == 0.0) {
        state.shadowing_db.setZero();
        return;
    }
    std::normal_distribution<double> normal(0.0, cfg.shadowing_sigma_db);
    for (int i = 0; i < state.n_aps(); ++i) {
        for (int j = 0; j < state.n_ues(); ++j) state.shadowing_db(i, j) = normal(rng);
    }
}

void draw_fading(ChannelState& state, Rng& rng) {
    std::exponential_distribution<double> exponential(1.0);
    for (int i = 0; i < state.n_aps(); ++i) {
        for (int j = 0; j < state.n_ues(); ++j) state.fading_power(i, j) = exponential(rng);
    }
}

namespace {

void check_link(int ap, int ue, const ChannelState& state) {
    if (ap < 0 || ap >= state.n_aps() || ue < 0 || ue >= state.n_ues()) {
        throw ContractViolation("link index out of range: ap=" + std::to_string(ap) +
                                " ue=" + std::to_string(ue));
    }
}

}  // namespace

double rsrp_dbm(int ap, int ue, const ChannelState& state, const RadioConfig& cfg) {
    check_link(ap, ue, state);
    return cfg.tx_power_dbm - state.pathloss_db(ap, ue) - state.shadowing_db(ap, ue);
}

double db_to_linear(double db) {
    return std::pow(10.0, db / 10.0);
}

double linear_to_db(double lin) {
    return 10.0 * std::log10(lin);
}

double rx_power_mw(int ap, int ue, const ChannelState& state, const RadioConfig& cfg) {
    return db_to_linear(rsrp_dbm(ap, ue, state, cfg)) * state.fading_power(ap, ue);
}

double noise_power_mw(const RadioConfig& cfg) {
    return db_to_linear(-174.0 + 10.0 * std::log10(cfg.bandwidth_hz) + cfg.noise_figure_db);
}

double compute_sinr(int ue, int serving_ap, const std::vector<bool>& active, const ChannelState& state,
                    const RadioConfig& cfg) {
    check_link(serving_ap, ue, state);
    require(static_cast<int>(active.size()) == state.n_aps(),
            "compute_sinr: active mask must have one entry per AP");
    require(active[serving_ap], "compute_sinr: serving AP is not active");
    double interference = 0.0;
    for (int i = 0; i < state.n_aps(); ++i) {
        if (i != serving_ap && active[i]) interference += rx_power_mw(i, ue, state, cfg);
    }
    return rx_power_mw(serving_ap, ue, state, cfg) / (noise_power_mw(cfg) + interference);
}

}  // namespace rrm
