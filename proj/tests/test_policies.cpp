#include <array>
#include <cmath>

#include "doctest.h"
#include "rrmlab/errors.hpp"
#include "rrmlab/policies.hpp"

using namespace rrm;

namespace {

// Hand-built observation: `valid[ap]` leading slots filled, sinr given per slot.
Observation make_obs(int n_aps, int topk, std::vector<int> valid, std::vector<double> sinr = {}) {
    Observation o;
    o.n_aps = n_aps;
    o.topk = topk;
    o.slots.resize(static_cast<std::size_t>(n_aps * topk));
    int ue = 0;
    for (int ap = 0; ap < n_aps; ++ap) {
        for (int k = 0; k < valid[ap]; ++k) {
            ObsSlot& s = o.slots[static_cast<std::size_t>(ap * topk + k)];
            s.ue = ue++;
            s.weight = 1.0;
            if (!sinr.empty()) s.sinr_db = sinr[static_cast<std::size_t>(ap * topk + k)];
        }
    }
    return o;
}

EnvConfig desk_env() {
    EnvConfig c;
    c.n_aps = 3;
    c.n_ues = 9;
    c.topk = 2;
    c.episode_len = 40;
    return c;
}

bool in_range(const JointAction& a, const Observation& obs) {
    for (int ap = 0; ap < obs.n_aps; ++ap) {
        const int c = a.choice[static_cast<std::size_t>(ap)];
        if (c < 0 || c > obs.topk) return false;
        if (c < obs.topk && !obs.slot(ap, c).valid()) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("random policy") {
    Rng rng(1);
    const Observation empty = make_obs(2, 3, {0, 3});
    for (int i = 0; i < 100; ++i) {
        const JointAction a = act_random(empty, rng);
        CHECK(a.choice[0] == 3);
        CHECK(a.choice[1] < 3);
    }

    // chi-square uniformity over 10^4 draws, 2 dof, critical value at p=0.001
    const Observation full = make_obs(1, 3, {3});
    std::array<int, 3> counts{};
    for (int i = 0; i < 10000; ++i) ++counts[static_cast<std::size_t>(act_random(full, rng).choice[0])];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - 10000.0 / 3.0) * (c - 10000.0 / 3.0) / (10000.0 / 3.0);
    CHECK(chi2 < 13.82);

    Rng r1(77), r2(77);
    const Observation partial = make_obs(3, 3, {1, 2, 3});
    for (int i = 0; i < 50; ++i) {
        const JointAction a = act_random(partial, r1);
        CHECK(a.choice == act_random(partial, r2).choice);
        CHECK(in_range(a, partial));
    }
}

TEST_CASE("greedy policy") {
    CHECK(act_greedy(make_obs(1, 3, {3}, {10, 20, 5})).choice[0] == 1);
    CHECK(act_greedy(make_obs(1, 2, {2}, {10, 10})).choice[0] == 0);
    CHECK(act_greedy(make_obs(2, 2, {0, 1}, {0, 0, 3, 0})).choice == std::vector<int>{2, 0});
    const Observation o = make_obs(2, 3, {3, 2}, {1, 7, 3, 9, 4, 0});
    CHECK(act_greedy(o).choice == act_greedy(o).choice);
    CHECK(act_greedy(o).choice == std::vector<int>{1, 0});
}

TEST_CASE("tdm enumerates valid entries in (AP, slot) order") {
    const Observation full = make_obs(4, 3, {3, 3, 3, 3});
    for (int t = 0; t < 24; ++t) {
        const JointAction a = act_tdm(full, t);
        int active = 0;
        for (int ap = 0; ap < 4; ++ap) {
            if (a.choice[ap] < 3) {
                ++active;
                CHECK(ap == (t % 12) / 3);
                CHECK(a.choice[ap] == (t % 12) % 3);
            }
        }
        CHECK(active == 1);
    }
    CHECK(act_tdm(full, 0).choice == std::vector<int>{0, 3, 3, 3});

    const Observation ragged = make_obs(3, 2, {1, 0, 2});
    CHECK(act_tdm(ragged, 0).choice == std::vector<int>{0, 2, 2});
    CHECK(act_tdm(ragged, 1).choice == std::vector<int>{2, 2, 0});
    CHECK(act_tdm(ragged, 2).choice == std::vector<int>{2, 2, 1});
    CHECK(act_tdm(ragged, 3).choice == std::vector<int>{0, 2, 2});

    const Observation none = make_obs(2, 2, {0, 0});
    CHECK(act_tdm(none, 5).choice == std::vector<int>{2, 2});
}

TEST_CASE("tdm served links see no interference") {
    EnvConfig cfg;
    cfg.episode_len = 60;
    Environment env(cfg, RadioConfig{}, 3);
    TdmPolicy tdm;
    Rng rng(0);
    while (!env.done()) {
        const JointAction a = tdm.act(env, rng);
        int ap = -1;
        for (int i = 0; i < cfg.n_aps; ++i) {
            if (a.choice[i] < cfg.topk) ap = i;
        }
        REQUIRE(ap >= 0);
        const int ue = env.observation().slot(ap, a.choice[ap]).ue;
        const double snr = inr(env, ap, ue);
        const StepResult r = env.step(a);
        CHECK(std::abs(r.per_ue_sinr[ue] - snr) <= 1e-12 * snr);
    }
}

TEST_CASE("itlinq") {
    EnvConfig one = desk_env();
    one.n_aps = 1;
    one.n_ues = 4;
    Environment single(one, RadioConfig{}, 8);
    const JointAction a = act_itlinq(single, ItlinqParams{});
    CHECK(a.choice[0] == 0);

    // A vanishing margin makes every cross gain negligible, so both links get in.
    RadioConfig radio;
    EnvConfig two = desk_env();
    two.n_aps = 2;
    two.n_ues = 4;
    Environment env(two, radio, 8);
    ItlinqParams lax;
    lax.m_db = -400.0;
    const JointAction both = act_itlinq(env, lax);
    CHECK(both.choice == std::vector<int>{0, 0});

    // Property: the top candidate is admitted, admitted links are pairwise compatible.
    const ItlinqParams params;
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        Environment e(desk_env(), radio, seed);
        Rng rng(seed);
        for (int t = 0; t < 10; ++t) {
            const auto cands = itlinq_candidates(e);
            const JointAction act = act_itlinq(e, params);
            CHECK(in_range(act, e.observation()));
            REQUIRE_FALSE(cands.empty());
            CHECK(act.choice[static_cast<std::size_t>(cands.front().ap)] == 0);
            for (std::size_t i = 1; i < cands.size(); ++i) {
                CHECK(cands[i - 1].pf_ratio >= cands[i].pf_ratio);
            }
            std::vector<ItlinqLink> admitted;
            for (const auto& c : cands) {
                if (act.choice[static_cast<std::size_t>(c.ap)] == 0) admitted.push_back(c);
            }
            for (std::size_t i = 0; i < admitted.size(); ++i) {
                for (std::size_t j = i + 1; j < admitted.size(); ++j) {
                    CHECK(itlinq_compatible(e, admitted[j], admitted[i], params));
                }
            }
            e.step(act);
        }
    }

    ItlinqParams bad;
    bad.eta = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("all policies stay inside the action space over whole episodes") {
    const EnvConfig cfg = desk_env();
    RandomPolicy rp;
    GreedyPolicy gp;
    TdmPolicy tp;
    ItlinqPolicy ip;
    for (SchedulingPolicy* p : std::vector<SchedulingPolicy*>{&rp, &gp, &tp, &ip}) {
        Environment env(cfg, RadioConfig{}, 31);
        Rng rng(4);
        while (!env.done()) {
            const JointAction a = p->act(env, rng);
            CHECK(in_range(a, env.observation()));
            const int idx = encode_action(a.choice, cfg.topk);
            CHECK(idx >= 0);
            CHECK(idx < cfg.action_count());
            env.step(a);
        }
    }
}
