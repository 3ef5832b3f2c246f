#include "rrmlab/policies.hpp"

#include <algorithm>
#include <cmath>

#include "rrmlab/errors.hpp"

namespace rrm {

void ItlinqParams::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw ConfigError("itlinq.eta must be in (0, 1]");
    if (!std::isfinite(m_db)) throw ConfigError("itlinq.m_db must be finite");
}

namespace {

JointAction all_off(const Observation& obs) {
    return JointAction{std::vector<int>(static_cast<std::size_t>(obs.n_aps), obs.topk)};
}

}  // namespace

JointAction act_random(const Observation& obs, Rng& rng) {
    JointAction action = all_off(obs);
    for (int ap = 0; ap < obs.n_aps; ++ap) {
        // valid slots are a prefix: pools are padded at the tail
        const int valid = obs.valid_count(ap);
        if (valid == 0) continue;
        std::uniform_int_distribution<int> pick(0, valid - 1);
        action.choice[static_cast<std::size_t>(ap)] = pick(rng);
    }
    return action;
}

JointAction act_greedy(const Observation& obs) {
    JointAction action = all_off(obs);
    for (int ap = 0; ap < obs.n_aps; ++ap) {
        int best = -1;
        for (int k = 0; k < obs.topk; ++k) {
            const ObsSlot& s = obs.slot(ap, k);
            if (s.valid() && (best < 0 || s.sinr_db > obs.slot(ap, best).sinr_db)) best = k;
        }
        if (best >= 0) action.choice[static_cast<std::size_t>(ap)] = best;
    }
    return action;
}

JointAction act_tdm(const Observation& obs, int slot_counter) {
    JointAction action = all_off(obs);
    std::vector<std::pair<int, int>> entries;
    for (int ap = 0; ap < obs.n_aps; ++ap) {
        for (int k = 0; k < obs.topk; ++k) {
            if (obs.slot(ap, k).valid()) entries.emplace_back(ap, k);
        }
    }
    if (entries.empty()) return action;
    const auto [ap, k] = entries[static_cast<std::size_t>(slot_counter) % entries.size()];
    action.choice[static_cast<std::size_t>(ap)] = k;
    return action;
}

double inr(const Environment& env, int interfering_ap, int victim_ue) {
    return rx_power_mw(interfering_ap, victim_ue, env.channel(), env.radio()) / noise_power_mw(env.radio());
}

std::vector<ItlinqLink> itlinq_candidates(const Environment& env) {
    const Observation& obs = env.observation();
    std::vector<ItlinqLink> links;
    for (int ap = 0; ap < obs.n_aps; ++ap) {
        const ObsSlot& top = obs.slot(ap, 0);
        if (!top.valid()) continue;
        ItlinqLink link;
        link.ap = ap;
        link.ue = top.ue;
        link.snr = inr(env, ap, top.ue);
        link.pf_ratio = top.weight * std::log2(1.0 + link.snr);
        links.push_back(link);
    }
    std::stable_sort(links.begin(), links.end(),
                     [](const ItlinqLink& a, const ItlinqLink& b) { return a.pf_ratio > b.pf_ratio; });
    return links;
}

bool itlinq_compatible(const Environment& env, const ItlinqLink& link, const ItlinqLink& admitted,
                       const ItlinqParams& params) {
    const double m_lin = db_to_linear(params.m_db);
    const double lhs = std::pow(link.snr, params.eta);
    return lhs >= m_lin * inr(env, admitted.ap, link.ue) && lhs >= m_lin * inr(env, link.ap, admitted.ue);
}

JointAction act_itlinq(const Environment& env, const ItlinqParams& params) {
    const Observation& obs = env.observation();
    JointAction action = all_off(obs);
    std::vector<ItlinqLink> admitted;
    for (const ItlinqLink& link : itlinq_candidates(env)) {
        const bool ok = std::all_of(admitted.begin(), admitted.end(), [&](const ItlinqLink& other) {
            return itlinq_compatible(env, link, other, params);
        });
        if (ok) {
            admitted.push_back(link);
            action.choice[static_cast<std::size_t>(link.ap)] = 0;
        }
    }
    return action;
}

}  // namespace rrm
