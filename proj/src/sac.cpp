#include "rrmlab/sac.hpp"

#include <cmath>

#include "json.hpp"

#include "rrmlab/errors.hpp"

namespace rrm {

namespace {

std::vector<int> layer_dims(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

nn::Matrix log_softmax_columns(const nn::Matrix& logits) {
    const nn::Vector lse = nn::logsumexp_columns(logits);
    return logits.rowwise() - lse.transpose();
}

}  // namespace

void SacConfig::validate() const {
    if (hidden.empty()) throw ConfigError("online.hidden must list at least one layer");
    for (int h : hidden) {
        if (h < 1) throw ConfigError("online.hidden sizes must be >= 1");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("online.gamma must be in [0, 1)");
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("online.rho must be in (0, 1]");
    if (!(reward_scale > 0.0)) throw ConfigError("online.reward_scale must be > 0");
    if (replay_capacity < batch_size || batch_size < 1) throw ConfigError("online: replay_capacity must be >= batch_size >= 1");
    if (updates_per_step < 0 || warmup_steps < 0) throw ConfigError("online: updates_per_step/warmup_steps must be >= 0");
    if (!(lr_final_fraction > 0.0 && lr_final_fraction <= 1.0)) {
        throw ConfigError("online.lr_final_fraction must be in (0, 1]");
    }
    if (!(adam.lr > 0.0)) throw ConfigError("online.lr must be > 0");
}

nn::Vector sac_critic_targets(const nn::Matrix& next_probs, const nn::Matrix& next_q1_target,
                              const nn::Matrix& next_q2_target, const nn::Vector& rewards, const nn::Vector& done,
                              double gamma, double temperature) {
    const nn::Matrix log_p = next_probs.array().max(1e-300).log().matrix();
    const nn::Matrix soft_q = next_q1_target.cwiseMin(next_q2_target) - temperature * log_p;
    nn::Vector v = next_probs.cwiseProduct(soft_q).colwise().sum().transpose();
    return rewards + gamma * (nn::Vector::Ones(done.size()) - done).cwiseProduct(v);
}

nn::Matrix sac_actor_logit_grad(const nn::Matrix& logits, const nn::Matrix& q, double temperature) {
    const nn::Matrix log_p = log_softmax_columns(logits);
    const nn::Matrix p = log_p.array().exp().matrix();
    const nn::Matrix g = temperature * log_p - q;
    const nn::Vector expected = p.cwiseProduct(g).colwise().sum().transpose();
    return p.cwiseProduct(g.rowwise() - expected.transpose());
}

SacAgent::SacAgent(int obs_dim, int n_actions, const SacConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      n_actions_(n_actions),
      entropy_target_(cfg.entropy_target_scale * std::log(static_cast<double>(n_actions))),
      log_temperature_(std::log(cfg.initial_temperature)),
      temperature_opt_(cfg.adam) {
    require(obs_dim > 0 && n_actions > 1, "SacAgent: bad dimensions");
    Rng rng = make_stream(seed, "sac-init");
    policy_ = nn::Mlp(layer_dims(obs_dim, cfg.hidden, n_actions), rng);
    q1_ = nn::Mlp(layer_dims(obs_dim, cfg.hidden, n_actions), rng);
    q2_ = nn::Mlp(layer_dims(obs_dim, cfg.hidden, n_actions), rng);
    q1_target_ = q1_;
    q2_target_ = q2_;
    policy_opt_ = nn::Adam(policy_, cfg.adam);
    q1_opt_ = nn::Adam(q1_, cfg.adam);
    q2_opt_ = nn::Adam(q2_, cfg.adam);
}

double SacAgent::temperature() const {
    return std::exp(log_temperature_);
}

nn::Vector SacAgent::action_probs(const nn::Vector& obs) const {
    return nn::softmax(policy_.forward_one(obs));
}

int SacAgent::act(const nn::Vector& obs, bool explore, Rng& rng) const {
    const nn::Vector logits = policy_.forward_one(obs);
    if (!explore) return nn::argmax(logits);
    const nn::Vector p = nn::softmax(logits);
    std::discrete_distribution<int> pick(p.data(), p.data() + p.size());
    return pick(rng);
}

SacLosses SacAgent::update(const Batch& batch) {
    const int n = batch.size();
    require(n > 0, "SacAgent::update: empty batch");
    const double temp = temperature();
    const double inv_n = 1.0 / n;
    SacLosses losses;

    // critics
    const nn::Matrix next_probs = nn::softmax_columns(policy_.forward(batch.next_obs));
    const nn::Vector y = sac_critic_targets(next_probs, q1_target_.forward(batch.next_obs),
                                            q2_target_.forward(batch.next_obs), cfg_.reward_scale * batch.rewards,
                                            batch.done, cfg_.gamma, temp);
    nn::MlpCache c1;
    nn::MlpCache c2;
    const nn::Matrix q1 = q1_.forward(batch.obs, &c1);
    const nn::Matrix q2 = q2_.forward(batch.obs, &c2);
    nn::Matrix g1 = nn::Matrix::Zero(n_actions_, n);
    nn::Matrix g2 = nn::Matrix::Zero(n_actions_, n);
    for (int b = 0; b < n; ++b) {
        const int a = batch.actions[static_cast<std::size_t>(b)];
        const double e1 = q1(a, b) - y(b);
        const double e2 = q2(a, b) - y(b);
        g1(a, b) = e1 * inv_n;
        g2(a, b) = e2 * inv_n;
        losses.critic += 0.5 * (e1 * e1 + e2 * e2) * inv_n;
    }
    q1_opt_.step(q1_, q1_.backward(c1, g1));
    q2_opt_.step(q2_, q2_.backward(c2, g2));

    // actor, against the pre-update critic values
    nn::MlpCache cp;
    const nn::Matrix logits = policy_.forward(batch.obs, &cp);
    const nn::Matrix q_min = q1.cwiseMin(q2);
    const nn::Matrix log_p = log_softmax_columns(logits);
    const nn::Matrix p = log_p.array().exp().matrix();
    losses.actor = p.cwiseProduct(temp * log_p - q_min).sum() * inv_n;
    const nn::Vector entropy = -p.cwiseProduct(log_p).colwise().sum().transpose();
    losses.entropy = entropy.mean();
    policy_opt_.step(policy_, policy_.backward(cp, inv_n * sac_actor_logit_grad(logits, q_min, temp)));

    // temperature: minimize -log(temp) * (target - H)
    losses.temperature_loss = -log_temperature_ * (entropy_target_ - losses.entropy);
    temperature_opt_.step(log_temperature_, -(entropy_target_ - losses.entropy));

    nn::soft_update(q1_target_, q1_, cfg_.rho);
    nn::soft_update(q2_target_, q2_, cfg_.rho);
    return losses;
}

void SacAgent::set_lr_scale(double scale) {
    require(scale > 0.0, "SacAgent::set_lr_scale: scale must be > 0");
    const double lr = cfg_.adam.lr * scale;
    policy_opt_.set_lr(lr);
    q1_opt_.set_lr(lr);
    q2_opt_.set_lr(lr);
    temperature_opt_.set_lr(lr);
}

nn::Checkpoint SacAgent::checkpoint() const {
    nlohmann::json meta = {{"kind", "logits"}, {"algo", "sac"}, {"n_actions", n_actions_},
                           {"temperature", temperature()}};
    return nn::Checkpoint{meta.dump(), {policy_}};
}

}  // namespace rrm
