#include "rrmlab/offline.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include "json.hpp"
#include "rrmlab/errors.hpp"
#include "rrmlab/learned_policy.hpp"
#include "rrmlab/report.hpp"

namespace rrm {

namespace {

std::vector<int> layer_dims(int in, const std::vector<int>& hidden, int out) {
    std::vector<int> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    return dims;
}

// Fills `grad` with (softmax(logits) - onehot(actions)) * scale_b / n and returns the
// per-sample negative log-likelihoods.
nn::Vector cross_entropy(const nn::Matrix& logits, const std::vector<int>& actions, const nn::Vector& scale,
                         nn::Matrix& grad) {
    const auto n = logits.cols();
    const nn::Vector lse = nn::logsumexp_columns(logits);
    grad = (logits.rowwise() - lse.transpose()).array().exp().matrix();
    nn::Vector nll(n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const int a = actions[static_cast<std::size_t>(b)];
        nll(b) = lse(b) - logits(a, b);
        grad(a, b) -= 1.0;
        grad.col(b) *= scale(b) / static_cast<double>(n);
    }
    return nll;
}

}  // namespace

std::string to_string(OfflineAlgo algo) {
    switch (algo) {
        case OfflineAlgo::Bcq: return "bcq";
        case OfflineAlgo::Cql: return "cql";
        case OfflineAlgo::Iql: return "iql";
    }
    return "?";
}

OfflineAlgo parse_offline_algo(const std::string& name) {
    if (name == "bcq") return OfflineAlgo::Bcq;
    if (name == "cql") return OfflineAlgo::Cql;
    if (name == "iql") return OfflineAlgo::Iql;
    throw ConfigError("unknown offline algorithm '" + name + "' (expected bcq|cql|iql)");
}

void OfflineConfig::validate() const {
    if (!(bcq_tau >= 0.0 && bcq_tau <= 1.0)) throw ConfigError("offline.bcq_tau must be in [0, 1]");
    if (!(cql_alpha >= 0.0)) throw ConfigError("offline.cql_alpha must be >= 0");
    if (!(iql_expectile > 0.0 && iql_expectile < 1.0)) throw ConfigError("offline.iql_expectile must be in (0, 1)");
    if (!(iql_beta > 0.0)) throw ConfigError("offline.iql_beta must be > 0");
    if (batch_size < 1 || updates_per_epoch < 0 || epochs < 0) throw ConfigError("offline: bad batch/epoch sizes");
}

double expectile_loss(double u, double tau) {
    return std::abs(tau - (u < 0.0 ? 1.0 : 0.0)) * u * u;
}

double expectile_grad(double u, double tau) {
    return 2.0 * std::abs(tau - (u < 0.0 ? 1.0 : 0.0)) * u;
}

std::vector<bool> bcq_eligible(const nn::Vector& behavior_probs, double tau) {
    const double top = behavior_probs.maxCoeff();
    std::vector<bool> eligible(static_cast<std::size_t>(behavior_probs.size()));
    for (Eigen::Index a = 0; a < behavior_probs.size(); ++a) {
        eligible[static_cast<std::size_t>(a)] = behavior_probs(a) >= tau * top;
    }
    return eligible;
}

double cql_penalty(const nn::Vector& q, int action) {
    return nn::logsumexp(std::span<const double>(q.data(), static_cast<std::size_t>(q.size()))) - q(action);
}

OfflineLearner::OfflineLearner(int obs_dim, int n_actions, const OfflineConfig& cfg) : cfg_(cfg), n_actions_(n_actions) {
    cfg.validate();
    require(obs_dim > 0 && n_actions > 1, "OfflineLearner: bad dimensions");
    Rng rng = make_stream(cfg.seed, "offline-init");
    const auto q_dims = layer_dims(obs_dim, cfg.hidden, n_actions);
    q1_ = nn::Mlp(q_dims, rng);
    q2_ = nn::Mlp(q_dims, rng);
    q1_target_ = q1_;
    q2_target_ = q2_;
    q1_opt_ = nn::Adam(q1_, cfg.adam);
    q2_opt_ = nn::Adam(q2_, cfg.adam);
    if (cfg.algo == OfflineAlgo::Bcq) {
        behavior_ = nn::Mlp(q_dims, rng);
        behavior_opt_ = nn::Adam(behavior_, cfg.adam);
    }
    if (cfg.algo == OfflineAlgo::Iql) {
        value_ = nn::Mlp(layer_dims(obs_dim, cfg.hidden, 1), rng);
        policy_ = nn::Mlp(q_dims, rng);
        value_opt_ = nn::Adam(value_, cfg.adam);
        policy_opt_ = nn::Adam(policy_, cfg.adam);
    }
}

OfflineGradients OfflineLearner::gradients(const Batch& batch) const {
    const int n = batch.size();
    require(n > 0, "OfflineLearner: empty batch");
    require(batch.obs.rows() == q1_.in_dim(), "OfflineLearner: observation dimension mismatch");
    for (int a : batch.actions) require(a >= 0 && a < n_actions_, "OfflineLearner: action outside the action space");
    const double inv_n = 1.0 / n;
    const nn::Vector rewards = cfg_.reward_scale * batch.rewards;
    const nn::Vector not_done = nn::Vector::Ones(n) - batch.done;
    OfflineGradients g;

    nn::MlpCache c1;
    nn::MlpCache c2;
    const nn::Matrix q1 = q1_.forward(batch.obs, &c1);
    const nn::Matrix q2 = q2_.forward(batch.obs, &c2);

    nn::Vector targets(n);
    if (cfg_.algo == OfflineAlgo::Iql) {
        const nn::Matrix t1 = q1_target_.forward(batch.obs);
        const nn::Matrix t2 = q2_target_.forward(batch.obs);
        nn::MlpCache cv;
        const nn::Matrix v = value_.forward(batch.obs, &cv);
        const nn::Matrix v_next = value_.forward(batch.next_obs);
        nn::Matrix dv(1, n);
        nn::Vector weights(n);
        for (int b = 0; b < n; ++b) {
            const int a = batch.actions[static_cast<std::size_t>(b)];
            const double u = std::min(t1(a, b), t2(a, b)) - v(0, b);
            g.losses.value += expectile_loss(u, cfg_.iql_expectile) * inv_n;
            dv(0, b) = -expectile_grad(u, cfg_.iql_expectile) * inv_n;
            weights(b) = std::min(std::exp(cfg_.iql_beta * u), cfg_.iql_weight_max);
            targets(b) = rewards(b) + cfg_.gamma * not_done(b) * v_next(0, b);
        }
        g.value = value_.backward(cv, dv);
        nn::MlpCache cp;
        nn::Matrix dlogits;
        const nn::Vector nll = cross_entropy(policy_.forward(batch.obs, &cp), batch.actions, weights, dlogits);
        g.losses.policy = weights.cwiseProduct(nll).mean();
        g.policy = policy_.backward(cp, dlogits);
        g.iql_weights = weights;
    } else {
        const nn::Matrix q1_next = q1_.forward(batch.next_obs);
        const nn::Matrix t1_next = q1_target_.forward(batch.next_obs);
        const nn::Matrix t2_next = q2_target_.forward(batch.next_obs);
        nn::Matrix behavior_next;
        if (cfg_.algo == OfflineAlgo::Bcq) behavior_next = nn::softmax_columns(behavior_.forward(batch.next_obs));
        for (int b = 0; b < n; ++b) {
            int best = -1;
            const std::vector<bool> eligible = cfg_.algo == OfflineAlgo::Bcq
                                                   ? bcq_eligible(behavior_next.col(b), cfg_.bcq_tau)
                                                   : std::vector<bool>(static_cast<std::size_t>(n_actions_), true);
            for (int a = 0; a < n_actions_; ++a) {
                if (eligible[static_cast<std::size_t>(a)] && (best < 0 || q1_next(a, b) > q1_next(best, b))) best = a;
            }
            targets(b) = rewards(b) + cfg_.gamma * not_done(b) * std::min(t1_next(best, b), t2_next(best, b));
        }
    }

    nn::Matrix dq1 = nn::Matrix::Zero(n_actions_, n);
    nn::Matrix dq2 = nn::Matrix::Zero(n_actions_, n);
    for (int b = 0; b < n; ++b) {
        const int a = batch.actions[static_cast<std::size_t>(b)];
        const double e1 = q1(a, b) - targets(b);
        const double e2 = q2(a, b) - targets(b);
        dq1(a, b) = e1 * inv_n;
        dq2(a, b) = e2 * inv_n;
        g.losses.q += 0.5 * (e1 * e1 + e2 * e2) * inv_n;
    }

    if (cfg_.algo == OfflineAlgo::Cql) {
        const nn::Vector alpha = nn::Vector::Constant(n, cfg_.cql_alpha);
        nn::Matrix p1;
        nn::Matrix p2;
        const nn::Vector pen1 = cross_entropy(q1, batch.actions, alpha, p1);
        const nn::Vector pen2 = cross_entropy(q2, batch.actions, alpha, p2);
        g.losses.penalty = 0.5 * (pen1.mean() + pen2.mean());
        dq1 += p1;
        dq2 += p2;
    }

    if (cfg_.algo == OfflineAlgo::Bcq) {
        nn::MlpCache cb;
        nn::Matrix dlogits;
        const nn::Vector nll =
            cross_entropy(behavior_.forward(batch.obs, &cb), batch.actions, nn::Vector::Ones(n), dlogits);
        g.losses.behavior = nll.mean();
        g.behavior = behavior_.backward(cb, dlogits);
    }

    g.q1 = q1_.backward(c1, dq1);
    g.q2 = q2_.backward(c2, dq2);
    return g;
}

void OfflineLearner::apply(const OfflineGradients& g) {
    q1_opt_.step(q1_, g.q1);
    q2_opt_.step(q2_, g.q2);
    if (cfg_.algo == OfflineAlgo::Bcq) behavior_opt_.step(behavior_, g.behavior);
    if (cfg_.algo == OfflineAlgo::Iql) {
        value_opt_.step(value_, g.value);
        policy_opt_.step(policy_, g.policy);
    }
    nn::soft_update(q1_target_, q1_, cfg_.rho);
    nn::soft_update(q2_target_, q2_, cfg_.rho);
    ++updates_;
}

OfflineLosses OfflineLearner::update(const Batch& batch) {
    OfflineGradients g = gradients(batch);
    apply(g);
    return g.losses;
}

nn::Checkpoint OfflineLearner::checkpoint() const {
    nlohmann::json meta = {{"algo", to_string(cfg_.algo)}, {"n_actions", n_actions_}, {"updates", updates_}};
    switch (cfg_.algo) {
        case OfflineAlgo::Bcq:
            meta["kind"] = "bcq";
            meta["bcq_tau"] = cfg_.bcq_tau;
            return {meta.dump(), {q1_, q2_, behavior_}};
        case OfflineAlgo::Cql:
            meta["kind"] = "q";
            return {meta.dump(), {q1_, q2_}};
        case OfflineAlgo::Iql:
            meta["kind"] = "logits";
            return {meta.dump(), {policy_}};
    }
    return {};
}

OfflineResult train_offline(const Dataset& dataset, const Scenario& scenario, const OfflineConfig& cfg,
                            const std::string& out_dir, const std::function<bool(const CurvePoint&)>& on_epoch) {
    scenario.validate();
    cfg.validate();
    require(!dataset.empty(), "train_offline: empty dataset");
    const EnvConfig& ec = scenario.env;
    const DatasetHeader& h = dataset.header();
    if (h.obs_dim != ec.obs_dim() || h.action_count != ec.action_count()) {
        throw ConfigError("dataset shape (obs " + std::to_string(h.obs_dim) + ", actions " +
                          std::to_string(h.action_count) + ") does not match environment (obs " +
                          std::to_string(ec.obs_dim()) + ", actions " + std::to_string(ec.action_count()) + ")");
    }
    if (h.env_digest != env_digest(ec, scenario.radio)) {
        throw ConfigError("dataset was collected under a different environment configuration (digest " +
                          h.env_digest + ")");
    }
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    OfflineLearner learner(ec.obs_dim(), ec.action_count(), cfg);
    Rng rng = make_stream(cfg.seed, "offline-minibatch");
    OfflineResult result;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const std::uint64_t before = Environment::total_steps();
        for (int u = 0; u < cfg.updates_per_epoch; ++u) learner.update(dataset.sample(cfg.batch_size, rng));
        result.env_steps_during_updates += Environment::total_steps() - before;

        LearnedPolicy greedy(learner.checkpoint(), ActMode::Greedy, to_string(cfg.algo));
        const EvalReport report = evaluate_policy(greedy, scenario.validation_seeds, ec, scenario.radio, scenario.metric, cfg.seed);
        const CurvePoint point{epoch, report.r_score, report.sum_rate_mean, report.p5_rate};
        result.curve.push_back(point);
        if (!out_dir.empty()) write_learning_curve(out_dir + "/learning_curve.csv", result.curve);
        if (on_epoch && !on_epoch(point)) break;
    }
    result.updates = learner.updates();
    result.final_policy = learner.checkpoint();
    if (!out_dir.empty()) {
        nn::save_checkpoint(out_dir + "/" + to_string(cfg.algo) + "_final.rrmn", result.final_policy);
        write_learning_curve(out_dir + "/learning_curve.csv", result.curve);
    }
    return result;
}

}  // namespace rrm
