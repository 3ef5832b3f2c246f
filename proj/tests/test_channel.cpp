#include <cmath>
#include <numeric>

#include "doctest.h"
#include "rrmlab/channel.hpp"
#include "rrmlab/errors.hpp"
#include "rrmlab/rng.hpp"

using namespace rrm;

namespace {

// Independent evaluation of the indoor LOS form.
double pl_oracle(double d, double f_ghz) { return 32.8 + 16.9 * std::log10(d) + 20.0 * std::log10(f_ghz); }

ChannelState flat_state(int n_aps, int n_ues, double pl_db) {
    ChannelState s(n_aps, n_ues);
    s.pathloss_db.setConstant(pl_db);
    s.shadowing_db.setZero();
    s.fading_power.setOnes();
    return s;
}

}  // namespace

TEST_CASE("path loss matches the closed form and clamps below min distance") {
    RadioConfig cfg;
    CHECK(path_loss_db(10.0, cfg) == doctest::Approx(pl_oracle(10.0, 2.4)).epsilon(1e-14));
    CHECK(path_loss_db(1.0, cfg) == doctest::Approx(40.404).epsilon(1e-3));
    CHECK(path_loss_db(0.0, cfg) == path_loss_db(1.0, cfg));
    CHECK(path_loss_db(0.3, cfg) == path_loss_db(1.0, cfg));
    CHECK_THROWS_AS(path_loss_db(-1.0, cfg), ContractViolation);

    double prev = path_loss_db(1.0, cfg);
    for (double d = 1.5; d < 200.0; d *= 1.3) {
        const double pl = path_loss_db(d, cfg);
        CHECK(pl > prev);
        prev = pl;
    }
}

TEST_CASE("rsrp follows the sign convention") {
    RadioConfig cfg;
    ChannelState s(1, 2);
    s.pathloss_db(0, 0) = 40.404;
    s.pathloss_db(0, 1) = 40.404;
    s.shadowing_db(0, 0) = 0.0;
    s.shadowing_db(0, 1) = 3.0;
    CHECK(rsrp_dbm(0, 0, s, cfg) == doctest::Approx(-16.404).epsilon(1e-12));
    CHECK(rsrp_dbm(0, 1, s, cfg) == doctest::Approx(-19.404).epsilon(1e-12));
    CHECK_THROWS_AS(rsrp_dbm(1, 0, s, cfg), ContractViolation);
    CHECK_THROWS_AS(rsrp_dbm(0, 2, s, cfg), ContractViolation);

    std::vector<Point> aps{{0, 0}};
    std::vector<Point> ues{{3, 0}, {8, 0}};
    ChannelState g(1, 2);
    update_pathloss(g, aps, ues, cfg);
    CHECK(rsrp_dbm(0, 0, g, cfg) > rsrp_dbm(0, 1, g, cfg));
}

TEST_CASE("noise power follows the thermal floor") {
    RadioConfig cfg;
    const double expected_dbm = -174.0 + 10.0 * std::log10(10e6) + 7.0;
    CHECK(linear_to_db(noise_power_mw(cfg)) == doctest::Approx(expected_dbm).epsilon(1e-12));
}

TEST_CASE("sinr direct ratio and single-link case") {
    RadioConfig cfg;
    const double noise = noise_power_mw(cfg);
    // Choose path losses so the serving signal is 2 * noise and the interferer 1 * noise.
    ChannelState s(2, 1);
    s.shadowing_db.setZero();
    s.fading_power.setOnes();
    s.pathloss_db(0, 0) = cfg.tx_power_dbm - linear_to_db(2.0 * noise);
    s.pathloss_db(1, 0) = cfg.tx_power_dbm - linear_to_db(noise);
    CHECK(compute_sinr(0, 0, {true, true}, s, cfg) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(compute_sinr(0, 0, {true, false}, s, cfg) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(compute_sinr(0, 0, {true, false}, s, cfg) == rx_power_mw(0, 0, s, cfg) / noise);
    CHECK_THROWS_AS(compute_sinr(0, 0, {false, true}, s, cfg), ContractViolation);
}

TEST_CASE("sinr is antitone in the active set") {
    RadioConfig cfg;
    Rng rng(42);
    std::uniform_real_distribution<double> pl(50.0, 90.0);
    for (int trial = 0; trial < 200; ++trial) {
        ChannelState s(4, 1);
        for (int i = 0; i < 4; ++i) s.pathloss_db(i, 0) = pl(rng);
        draw_shadowing(s, cfg, rng);
        draw_fading(s, rng);
        for (unsigned mask = 0; mask < 16; ++mask) {
            if (!(mask & 1u)) continue;
            std::vector<bool> sub(4), super(4);
            for (int i = 0; i < 4; ++i) sub[i] = super[i] = (mask >> i) & 1u;
            for (int extra = 1; extra < 4; ++extra) {
                if (sub[extra]) continue;
                super = sub;
                super[extra] = true;
                CHECK(compute_sinr(0, 0, super, s, cfg) <= compute_sinr(0, 0, sub, s, cfg));
            }
        }
    }
}

TEST_CASE("fading and shadowing statistics") {
    RadioConfig cfg;
    ChannelState s(10, 100);
    Rng rng = make_stream(7, "stats");
    double fsum = 0.0;
    double ssum = 0.0;
    double ssq = 0.0;
    const int rounds = 100;  // 10^5 samples each
    for (int r = 0; r < rounds; ++r) {
        draw_fading(s, rng);
        draw_shadowing(s, cfg, rng);
        fsum += s.fading_power.sum();
        ssum += s.shadowing_db.sum();
        ssq += s.shadowing_db.squaredNorm();
    }
    const double n = rounds * 1000.0;
    CHECK(std::abs(fsum / n - 1.0) < 0.02);
    const double mean = ssum / n;
    const double sd = std::sqrt(ssq / n - mean * mean);
    CHECK(std::abs(sd / cfg.shadowing_sigma_db - 1.0) < 0.02);
    CHECK((s.fading_power.array() >= 0.0).all());

    RadioConfig flat = cfg;
    flat.shadowing_sigma_db = 0.0;
    draw_shadowing(s, flat, rng);
    CHECK(s.shadowing_db.isZero(0.0));
}

TEST_CASE("same stream gives bit-identical channel state") {
    RadioConfig cfg;
    ChannelState a = flat_state(3, 5, 60.0);
    ChannelState b = flat_state(3, 5, 60.0);
    Rng ra = make_stream(99, "fading");
    Rng rb = make_stream(99, "fading");
    draw_shadowing(a, cfg, ra);
    draw_fading(a, ra);
    draw_shadowing(b, cfg, rb);
    draw_fading(b, rb);
    CHECK(a.shadowing_db == b.shadowing_db);
    CHECK(a.fading_power == b.fading_power);
}

TEST_CASE("radio config validation") {
    RadioConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RadioConfig{};
    cfg.shadowing_sigma_db = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
