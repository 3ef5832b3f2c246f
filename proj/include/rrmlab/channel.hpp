#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "rrmlab/rng.hpp"

namespace rrm {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b);

struct RadioConfig {
    double carrier_freq_ghz = 2.4;
    double bandwidth_hz = 10e6;
    double tx_power_dbm = 24.0;
    double noise_figure_db = 7.0;
    double shadowing_sigma_db = 7.0;
    double min_prop_distance_m = 1.0;

    void validate() const;
};

/// Per-link gains, indexed (ap, ue). Shadowing is quasi-static for an episode,
/// fading is redrawn every slot.
struct ChannelState {
    Eigen::MatrixXd pathloss_db;
    Eigen::MatrixXd shadowing_db;
    Eigen::MatrixXd fading_power;

    ChannelState() = default;
    ChannelState(int n_aps, int n_ues);

    int n_aps() const { return static_cast<int>(pathloss_db.rows()); }
    int n_ues() const { return static_cast<int>(pathloss_db.cols()); }
};

/// Indoor-hotspot LOS form: 32.8 + 16.9 log10(d) + 20 log10(f_GHz), with d clamped
/// below at min_prop_distance.
double path_loss_db(double distance_m, const RadioConfig& cfg);

void update_pathloss(ChannelState& state, std::span<const Point> aps, std::span<const Point> ues,
                     const RadioConfig& cfg);

/// Episode-start phase: log-normal shadowing, N(0, sigma^2) in dB per link.
void draw_shadowing(ChannelState& state, const RadioConfig& cfg, Rng& rng);

/// Per-slot phase: Rayleigh amplitude, so power is Exp(1) per link.
void draw_fading(ChannelState& state, Rng& rng);

/// Large-scale received power (fading excluded). Positive shadowing adds loss.
double rsrp_dbm(int ap, int ue, const ChannelState& state, const RadioConfig& cfg);

/// Instantaneous received power in mW including fading.
double rx_power_mw(int ap, int ue, const ChannelState& state, const RadioConfig& cfg);

/// Thermal noise over the configured bandwidth, in mW.
double noise_power_mw(const RadioConfig& cfg);

double db_to_linear(double db);
double linear_to_db(double lin);

/// SINR of `ue` served by `serving_ap` while every AP flagged in `active` transmits.
/// `active` has one entry per AP; serving_ap must be active.
double compute_sinr(int ue, int serving_ap, const std::vector<bool>& active, const ChannelState& state,
                    const RadioConfig& cfg);

}  // namespace rrm
