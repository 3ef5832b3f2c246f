#include "rrmlab/learned_policy.hpp"

#include <limits>

#include "json.hpp"
#include "rrmlab/errors.hpp"

namespace rrm {

LearnedPolicy::LearnedPolicy(nn::Checkpoint ckpt, ActMode mode, std::string name)
    : ckpt_(std::move(ckpt)), mode_(mode), name_(std::move(name)) {
    const auto meta = nlohmann::json::parse(ckpt_.meta, nullptr, false);
    if (meta.is_discarded() || !meta.contains("kind")) throw FormatError("checkpoint meta lacks a kind");
    const std::string kind = meta.at("kind").get<std::string>();
    std::size_t need = 1;
    if (kind == "logits") {
        kind_ = Kind::Logits;
    } else if (kind == "q") {
        kind_ = Kind::Q;
        need = 2;
    } else if (kind == "bcq") {
        kind_ = Kind::Bcq;
        need = 3;
        bcq_tau_ = meta.value("bcq_tau", 0.0);
    } else {
        throw FormatError("unknown checkpoint kind '" + kind + "'");
    }
    if (ckpt_.nets.size() < need) throw FormatError("checkpoint of kind '" + kind + "' is missing networks");
}

LearnedPolicy LearnedPolicy::from_file(const std::string& path, ActMode mode) {
    return LearnedPolicy(nn::load_checkpoint(path), mode, "ckpt:" + path);
}

int LearnedPolicy::n_actions() const {
    return ckpt_.nets.front().out_dim();
}

int LearnedPolicy::act_index(const nn::Vector& features, Rng& rng) const {
    nn::Vector scores;
    switch (kind_) {
        case Kind::Logits:
            scores = ckpt_.nets[0].forward_one(features);
            break;
        case Kind::Q:
            scores = ckpt_.nets[0].forward_one(features).cwiseMin(ckpt_.nets[1].forward_one(features));
            break;
        case Kind::Bcq: {
            scores = ckpt_.nets[0].forward_one(features);
            const nn::Vector behavior = nn::softmax(ckpt_.nets[2].forward_one(features));
            const double top = behavior.maxCoeff();
            for (Eigen::Index a = 0; a < scores.size(); ++a) {
                if (behavior(a) < bcq_tau_ * top) scores(a) = -std::numeric_limits<double>::infinity();
            }
            break;
        }
    }
    if (mode_ == ActMode::Greedy) return nn::argmax(scores);
    const nn::Vector p = nn::softmax(scores);
    std::discrete_distribution<int> pick(p.data(), p.data() + p.size());
    return pick(rng);
}

JointAction LearnedPolicy::act(const Environment& env, Rng& rng) {
    const EnvConfig& cfg = env.config();
    if (ckpt_.nets.front().in_dim() != cfg.obs_dim() || n_actions() != cfg.action_count()) {
        throw ConfigError("checkpoint dimensions (" + std::to_string(ckpt_.nets.front().in_dim()) + " -> " +
                          std::to_string(n_actions()) + ") do not match environment (" +
                          std::to_string(cfg.obs_dim()) + " -> " + std::to_string(cfg.action_count()) + ")");
    }
    const auto& f = env.observation().features;
    const nn::Vector x = Eigen::Map<const nn::Vector>(f.data(), static_cast<Eigen::Index>(f.size()));
    return decode_action(act_index(x, rng), cfg.n_aps, cfg.topk);
}

}  // namespace rrm
