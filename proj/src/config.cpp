#include "rrmlab/config.hpp"

#include <fstream>
#include <set>

#include "rrmlab/errors.hpp"

namespace rrm {

using nlohmann::json;

namespace {

// Reads known keys out of one config section and rejects anything else.
class Section {
public:
    Section(const json& root, const char* name) : name_(name) {
        if (root.contains(name)) {
            obj_ = root.at(name);
            if (!obj_.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
        }
    }

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        try {
            out = obj_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(name_ + "." + key + ": " + e.what());
        }
    }

    ~Section() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) throw ConfigError("unknown config key '" + name_ + "." + key + "'");
        }
    }

private:
    std::string name_;
    json obj_ = json::object();
    std::set<std::string> seen_;
};

std::string tail_mode_name(TailMode m) {
    return m == TailMode::Pooled ? "pooled" : "per_env_mean";
}

}  // namespace

json to_json(const EnvConfig& c) {
    return {{"n_aps", c.n_aps},         {"n_ues", c.n_ues},         {"episode_len", c.episode_len},
            {"area_side", c.area_side}, {"topk", c.topk},           {"max_speed", c.max_speed},
            {"slot_dt", c.slot_dt},     {"min_dist_ap", c.min_dist_ap}, {"min_dist_ue", c.min_dist_ue},
            {"pf_alpha", c.pf_alpha},   {"reward_lambda", c.reward_lambda}, {"pf_floor", c.pf_floor}};
}

json to_json(const RadioConfig& c) {
    return {{"carrier_freq_ghz", c.carrier_freq_ghz},     {"bandwidth_hz", c.bandwidth_hz},
            {"tx_power_dbm", c.tx_power_dbm},             {"noise_figure_db", c.noise_figure_db},
            {"shadowing_sigma_db", c.shadowing_sigma_db}, {"min_prop_distance_m", c.min_prop_distance_m}};
}

json to_json(const ExperimentConfig& c) {
    const Scenario& s = c.scenario;
    const SacConfig& sac = c.online.sac;
    const OfflineConfig& off = c.offline;
    return {
        {"env", to_json(s.env)},
        {"radio", to_json(s.radio)},
        {"metric",
         {{"mu", s.metric.mu},
          {"eta", s.metric.eta},
          {"quantile_level", s.metric.quantile_level},
          {"tail_mode", tail_mode_name(s.metric.tail_mode)},
          {"validation_seeds", s.validation_seeds}}},
        {"policies", {{"itlinq_m_db", s.itlinq.m_db}, {"itlinq_eta", s.itlinq.eta}}},
        {"online",
         {{"epochs", c.online.epochs},
          {"episodes_per_epoch", c.online.episodes_per_epoch},
          {"snapshot_epochs", c.online.snapshot_epochs},
          {"seed", c.online.seed},
          {"runs", c.online.runs},
          {"hidden", sac.hidden},
          {"gamma", sac.gamma},
          {"rho", sac.rho},
          {"entropy_target_scale", sac.entropy_target_scale},
          {"initial_temperature", sac.initial_temperature},
          {"reward_scale", sac.reward_scale},
          {"replay_capacity", sac.replay_capacity},
          {"batch_size", sac.batch_size},
          {"updates_per_step", sac.updates_per_step},
          {"warmup_steps", sac.warmup_steps},
          {"lr", sac.adam.lr},
          {"lr_final_fraction", sac.lr_final_fraction},
          {"beta1", sac.adam.beta1},
          {"beta2", sac.adam.beta2},
          {"eps_opt", sac.adam.eps}}},
        {"offline",
         {{"algo", to_string(off.algo)},
          {"hidden", off.hidden},
          {"bcq_tau", off.bcq_tau},
          {"cql_alpha", off.cql_alpha},
          {"iql_expectile", off.iql_expectile},
          {"iql_beta", off.iql_beta},
          {"iql_weight_max", off.iql_weight_max},
          {"gamma", off.gamma},
          {"rho", off.rho},
          {"reward_scale", off.reward_scale},
          {"batch_size", off.batch_size},
          {"updates_per_epoch", off.updates_per_epoch},
          {"epochs", off.epochs},
          {"seed", off.seed},
          {"runs", off.runs},
          {"lr", off.adam.lr},
          {"beta1", off.adam.beta1},
          {"beta2", off.adam.beta2},
          {"eps_opt", off.adam.eps}}},
        {"dataset",
         {{"n_transitions", c.dataset.n_transitions},
          {"env_seed", c.dataset.env_seed},
          {"policy_seed", c.dataset.policy_seed},
          {"mix_seed", c.dataset.mix_seed}}},
    };
}

ExperimentConfig experiment_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    static const std::set<std::string> kSections{"env", "radio", "metric", "policies", "online", "offline", "dataset"};
    for (const auto& [key, value] : j.items()) {
        if (!kSections.contains(key)) throw ConfigError("unknown config section '" + key + "'");
    }
    ExperimentConfig c;
    {
        EnvConfig& e = c.scenario.env;
        Section s(j, "env");
        s.get("n_aps", e.n_aps);
        s.get("n_ues", e.n_ues);
        s.get("episode_len", e.episode_len);
        s.get("area_side", e.area_side);
        s.get("topk", e.topk);
        s.get("max_speed", e.max_speed);
        s.get("slot_dt", e.slot_dt);
        s.get("min_dist_ap", e.min_dist_ap);
        s.get("min_dist_ue", e.min_dist_ue);
        s.get("pf_alpha", e.pf_alpha);
        s.get("reward_lambda", e.reward_lambda);
        s.get("pf_floor", e.pf_floor);
    }
    {
        RadioConfig& r = c.scenario.radio;
        Section s(j, "radio");
        s.get("carrier_freq_ghz", r.carrier_freq_ghz);
        s.get("bandwidth_hz", r.bandwidth_hz);
        s.get("tx_power_dbm", r.tx_power_dbm);
        s.get("noise_figure_db", r.noise_figure_db);
        s.get("shadowing_sigma_db", r.shadowing_sigma_db);
        s.get("min_prop_distance_m", r.min_prop_distance_m);
    }
    {
        MetricConfig& m = c.scenario.metric;
        Section s(j, "metric");
        s.get("mu", m.mu);
        s.get("eta", m.eta);
        s.get("quantile_level", m.quantile_level);
        std::string mode = tail_mode_name(m.tail_mode);
        s.get("tail_mode", mode);
        if (mode == "pooled") {
            m.tail_mode = TailMode::Pooled;
        } else if (mode == "per_env_mean") {
            m.tail_mode = TailMode::PerEnvMean;
        } else {
            throw ConfigError("metric.tail_mode must be pooled|per_env_mean");
        }
        s.get("validation_seeds", c.scenario.validation_seeds);
    }
    {
        Section s(j, "policies");
        s.get("itlinq_m_db", c.scenario.itlinq.m_db);
        s.get("itlinq_eta", c.scenario.itlinq.eta);
    }
    {
        OnlineConfig& o = c.online;
        SacConfig& sac = o.sac;
        Section s(j, "online");
        s.get("epochs", o.epochs);
        s.get("episodes_per_epoch", o.episodes_per_epoch);
        s.get("snapshot_epochs", o.snapshot_epochs);
        s.get("seed", o.seed);
        s.get("runs", o.runs);
        s.get("hidden", sac.hidden);
        s.get("gamma", sac.gamma);
        s.get("rho", sac.rho);
        s.get("entropy_target_scale", sac.entropy_target_scale);
        s.get("initial_temperature", sac.initial_temperature);
        s.get("reward_scale", sac.reward_scale);
        s.get("replay_capacity", sac.replay_capacity);
        s.get("batch_size", sac.batch_size);
        s.get("updates_per_step", sac.updates_per_step);
        s.get("warmup_steps", sac.warmup_steps);
        s.get("lr", sac.adam.lr);
        s.get("lr_final_fraction", sac.lr_final_fraction);
        s.get("beta1", sac.adam.beta1);
        s.get("beta2", sac.adam.beta2);
        s.get("eps_opt", sac.adam.eps);
    }
    {
        OfflineConfig& o = c.offline;
        Section s(j, "offline");
        std::string algo = to_string(o.algo);
        s.get("algo", algo);
        o.algo = parse_offline_algo(algo);
        s.get("hidden", o.hidden);
        s.get("bcq_tau", o.bcq_tau);
        s.get("cql_alpha", o.cql_alpha);
        s.get("iql_expectile", o.iql_expectile);
        s.get("iql_beta", o.iql_beta);
        s.get("iql_weight_max", o.iql_weight_max);
        s.get("gamma", o.gamma);
        s.get("rho", o.rho);
        s.get("reward_scale", o.reward_scale);
        s.get("batch_size", o.batch_size);
        s.get("updates_per_epoch", o.updates_per_epoch);
        s.get("epochs", o.epochs);
        s.get("seed", o.seed);
        s.get("runs", o.runs);
        s.get("lr", o.adam.lr);
        s.get("beta1", o.adam.beta1);
        s.get("beta2", o.adam.beta2);
        s.get("eps_opt", o.adam.eps);
    }
    {
        DatasetConfig& d = c.dataset;
        Section s(j, "dataset");
        s.get("n_transitions", d.n_transitions);
        s.get("env_seed", d.env_seed);
        s.get("policy_seed", d.policy_seed);
        s.get("mix_seed", d.mix_seed);
    }
    c.scenario.validate();
    c.offline.validate();
    c.online.sac.validate();
    if (c.online.runs < 1 || c.offline.runs < 1) throw ConfigError("online.runs and offline.runs must be >= 1");
    return c;
}

void apply_override(json& j, const std::string& dotted_path, const std::string& value) {
    const auto dot = dotted_path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_path.size() ||
        dotted_path.find('.', dot + 1) != std::string::npos) {
        throw ConfigError("override '" + dotted_path + "' must have the form section.key");
    }
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    j[dotted_path.substr(0, dot)][dotted_path.substr(dot + 1)] = parsed;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
    json j = json::object();
    if (!path.empty()) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot open config file: " + path);
        j = json::parse(is, nullptr, false, true);
        if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    }
    for (const auto& [key, value] : overrides) apply_override(j, key, value);
    return experiment_from_json(j);
}

}  // namespace rrm
