#include "rrmlab/harness.hpp"

#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "rrmlab/dataset.hpp"
#include "rrmlab/errors.hpp"
#include "rrmlab/metrics.hpp"
#include "rrmlab/offline.hpp"
#include "rrmlab/online.hpp"
#include "rrmlab/report.hpp"

namespace rrm {

namespace fs = std::filesystem;

std::unique_ptr<SchedulingPolicy> make_policy(const std::string& spec, const Scenario& scenario, ActMode mode) {
    if (spec == "random") return std::make_unique<RandomPolicy>();
    if (spec == "greedy") return std::make_unique<GreedyPolicy>();
    if (spec == "tdm") return std::make_unique<TdmPolicy>();
    if (spec == "itlinq") return std::make_unique<ItlinqPolicy>(scenario.itlinq);
    if (spec.rfind("ckpt:", 0) == 0) {
        return std::make_unique<LearnedPolicy>(LearnedPolicy::from_file(spec.substr(5), mode));
    }
    throw ConfigError("unknown policy '" + spec + "' (expected random|greedy|tdm|itlinq|ckpt:<path>)");
}

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_summary(const std::string& path, const EvalReport& report) {
    const nlohmann::json j = {{"policy", report.policy},
                              {"r_score", report.r_score},
                              {"sum_rate_mean", report.sum_rate_mean},
                              {"sum_rate_std", report.sum_rate_std},
                              {"p5_rate", report.p5_rate},
                              {"n_envs", report.envs.size()}};
    write_text(path, j.dump(2) + "\n");
}

Baseline read_summary(const std::string& dir) {
    std::ifstream is(dir + "/summary.json");
    if (!is) throw ConfigError("no summary.json in baseline run " + dir);
    const auto j = nlohmann::json::parse(is, nullptr, false);
    if (j.is_discarded()) throw FormatError("malformed summary.json in " + dir);
    return {j.value("policy", fs::path(dir).filename().string()), j.at("r_score").get<double>()};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// Splits "--section.key value" / "--section.key=value" pairs out of the argument list.
std::vector<std::string> extract_overrides(const std::vector<std::string>& args,
                                           std::vector<std::pair<std::string, std::string>>& overrides) {
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& a = args[i];
        static const std::set<std::string> kSections{"env",    "radio",   "metric", "policies",
                                                     "online", "offline", "dataset"};
        const auto dot = a.find('.', 2);
        const bool dotted = a.rfind("--", 0) == 0 && dot != std::string::npos && kSections.count(a.substr(2, dot - 2));
        if (!dotted) {
            rest.push_back(a);
            continue;
        }
        const auto eq = a.find('=');
        if (eq != std::string::npos) {
            overrides.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
        } else {
            if (i + 1 >= args.size()) throw UsageError("override " + a + " needs a value");
            overrides.emplace_back(a.substr(2), args[++i]);
        }
    }
    return rest;
}

void prepare_run_dir(const std::string& dir, const ExperimentConfig& cfg, const std::string& command) {
    fs::create_directories(dir);
    nlohmann::json j = to_json(cfg);
    j["command"] = command;
    write_text(dir + "/config.resolved.json", j.dump(2) + "\n");
}

std::vector<std::uint64_t> validation_subset(const Scenario& scenario, int n) {
    std::vector<std::uint64_t> seeds = scenario.validation_seeds;
    if (n <= 0) return seeds;
    while (static_cast<int>(seeds.size()) < n) seeds.push_back(seeds.empty() ? 1000 : seeds.back() + 1);
    seeds.resize(static_cast<std::size_t>(n));
    return seeds;
}

// Single runs write straight into the run directory, repeated runs into run_<i>/ below it.
std::string run_subdir(const std::string& out_dir, int run, int runs) {
    return runs == 1 ? out_dir : out_dir + "/run_" + std::to_string(run);
}

// Writes the epoch-wise mean curve and a summary of the final scores across runs.
void finish_runs(const std::string& out_dir, const std::vector<std::vector<CurvePoint>>& curves) {
    std::size_t len = curves.front().size();
    for (const auto& c : curves) len = std::min(len, c.size());
    std::vector<CurvePoint> mean(len);
    for (std::size_t e = 0; e < len; ++e) {
        mean[e].epoch = curves.front()[e].epoch;
        for (const auto& c : curves) {
            mean[e].r_score += c[e].r_score / static_cast<double>(curves.size());
            mean[e].sum_rate += c[e].sum_rate / static_cast<double>(curves.size());
            mean[e].p5_rate += c[e].p5_rate / static_cast<double>(curves.size());
        }
    }
    write_learning_curve(out_dir + "/learning_curve.csv", mean);
    nlohmann::json finals = nlohmann::json::array();
    for (const auto& c : curves) finals.push_back(c.empty() ? 0.0 : c.back().r_score);
    const double final_mean = mean.empty() ? 0.0 : mean.back().r_score;
    write_text(out_dir + "/summary.json",
               nlohmann::json{{"runs", curves.size()}, {"final_r_score", finals}, {"r_score", final_mean}}.dump(2) + "\n");
    std::cout << "final r_score (mean of " << curves.size() << " runs) " << final_mean << "\n";
}

Dataset build_mix(const std::string& spec, std::uint64_t total, std::uint64_t seed) {
    const std::vector<MixEntry> entries = parse_mix_spec(spec);
    std::vector<Dataset> loaded;
    loaded.reserve(entries.size());
    for (const MixEntry& e : entries) loaded.push_back(Dataset::load(e.path));
    std::vector<MixSource> sources;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        sources.push_back({&loaded[i], loaded[i].header().bp_name, entries[i].proportion});
    }
    Rng rng = make_stream(seed, "mix");
    return mix(sources, total, rng);
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args) {
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> args;
    try {
        args = extract_overrides(raw_args, overrides);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App app{"rrmlab: multi-AP user scheduling with online and offline reinforcement learning"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir = "run";
    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "run directory for outputs");

    std::string policy = "tdm";
    std::uint64_t seed = 1000;
    int n_seeds = 0;
    std::uint64_t n_transitions = 0;
    std::string mix_spec;
    std::uint64_t total = 0;
    std::string algo;
    std::string dataset_path;
    std::string runs;
    std::string baselines;
    std::string title = "R_score vs. epoch";

    CLI::App* simulate = app.add_subcommand("simulate", "run one episode and write its trace");
    simulate->add_option("--policy", policy, "random|greedy|tdm|itlinq|ckpt:<path>");
    simulate->add_option("--seed", seed, "environment seed");

    CLI::App* collect_cmd = app.add_subcommand("collect", "record a behavior-policy dataset");
    collect_cmd->add_option("--policy", policy, "behavior policy")->required();
    collect_cmd->add_option("--n", n_transitions, "number of transitions (default: dataset.n_transitions)");

    CLI::App* mix_cmd = app.add_subcommand("mix", "combine datasets under fixed proportions");
    mix_cmd->add_option("--mix", mix_spec, "a.orld:0.5,b.orld:0.2,...")->required();
    mix_cmd->add_option("--total", total, "output size (default: dataset.n_transitions)");

    CLI::App* online_cmd = app.add_subcommand("train-online", "train the online SAC scheduler");

    CLI::App* offline_cmd = app.add_subcommand("train-offline", "train BCQ/CQL/IQL from a dataset");
    offline_cmd->add_option("--algo", algo, "bcq|cql|iql")->check(CLI::IsMember({"bcq", "cql", "iql"}));
    offline_cmd->add_option("--dataset", dataset_path, "dataset file (.orld)");
    offline_cmd->add_option("--mix", mix_spec, "build the training set from a mix spec instead");
    offline_cmd->add_option("--total", total, "mixture size (default: dataset.n_transitions)");

    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score a policy on the validation environments");
    evaluate_cmd->add_option("--policy", policy, "random|greedy|tdm|itlinq|ckpt:<path>")->required();
    evaluate_cmd->add_option("--seeds", n_seeds, "number of validation environments (default: all configured)");

    CLI::App* report_cmd = app.add_subcommand("report", "render learning curves as SVG");
    report_cmd->add_option("--runs", runs, "comma-separated run directories with learning_curve.csv")->required();
    report_cmd->add_option("--baselines", baselines, "comma-separated evaluate run directories (dashed lines)");
    report_cmd->add_option("--title", title, "chart title");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = load_config(config_path, overrides);
        const Scenario& sc = cfg.scenario;
        if (simulate->parsed()) {
            prepare_run_dir(out_dir, cfg, "simulate");
            auto pol = make_policy(policy, sc, ActMode::Greedy);
            Environment env(sc.env, sc.radio, seed);
            Rng rng = make_stream(seed, "simulate-policy");
            std::ofstream trace(out_dir + "/trace.csv");
            write_trace_header(trace, sc.env.n_ues);
            while (!env.done()) {
                const int t = env.t();
                write_trace_row(trace, t, env.step(pol->act(env, rng)));
            }
            std::cout << "wrote " << out_dir << "/trace.csv\n";
        } else if (collect_cmd->parsed()) {
            prepare_run_dir(out_dir, cfg, "collect");
            auto bp = make_policy(policy, sc, ActMode::Sample);
            const std::uint64_t n = n_transitions > 0 ? n_transitions : cfg.dataset.n_transitions;
            const Dataset ds = collect(*bp, sc, cfg.dataset.env_seed, n, cfg.dataset.policy_seed);
            ds.save(out_dir + "/dataset.orld");
            std::cout << "collected " << ds.size() << " transitions from " << bp->name() << " -> " << out_dir
                      << "/dataset.orld\n";
        } else if (mix_cmd->parsed()) {
            prepare_run_dir(out_dir, cfg, "mix");
            const Dataset ds = build_mix(mix_spec, total > 0 ? total : cfg.dataset.n_transitions, cfg.dataset.mix_seed);
            ds.save(out_dir + "/dataset.orld");
            std::cout << "mixed " << ds.size() << " transitions -> " << out_dir << "/dataset.orld\n";
        } else if (online_cmd->parsed()) {
            prepare_run_dir(out_dir, cfg, "train-online");
            std::vector<std::vector<CurvePoint>> curves;
            for (int run = 0; run < cfg.online.runs; ++run) {
                OnlineConfig oc = cfg.online;
                oc.seed = cfg.online.seed + static_cast<std::uint64_t>(run);
                const std::string dir = run_subdir(out_dir, run, cfg.online.runs);
                curves.push_back(train_online(sc, oc, dir, [&](const CurvePoint& p) {
                    std::cout << "run " << run << " epoch " << p.epoch << " r_score " << p.r_score << "\n";
                }).curve);
            }
            finish_runs(out_dir, curves);
        } else if (offline_cmd->parsed()) {
            if (dataset_path.empty() == mix_spec.empty()) {
                std::cerr << "error: train-offline needs exactly one of --dataset <path> or --mix <spec>\n";
                return 2;
            }
            if (!algo.empty()) cfg.offline.algo = parse_offline_algo(algo);
            prepare_run_dir(out_dir, cfg, "train-offline");
            const Dataset ds = dataset_path.empty()
                                   ? build_mix(mix_spec, total > 0 ? total : cfg.dataset.n_transitions, cfg.dataset.mix_seed)
                                   : Dataset::load(dataset_path);
            std::vector<std::vector<CurvePoint>> curves;
            for (int run = 0; run < cfg.offline.runs; ++run) {
                OfflineConfig oc = cfg.offline;
                oc.seed = cfg.offline.seed + static_cast<std::uint64_t>(run);
                const std::string dir = run_subdir(out_dir, run, cfg.offline.runs);
                const OfflineResult r = train_offline(ds, sc, oc, dir, [&](const CurvePoint& p) {
                    std::cout << "run " << run << " epoch " << p.epoch << " r_score " << p.r_score << "\n";
                    return true;
                });
                std::cout << "run " << run << ": " << r.updates << " updates, env steps during updates "
                          << r.env_steps_during_updates << "\n";
                curves.push_back(r.curve);
            }
            finish_runs(out_dir, curves);
        } else if (evaluate_cmd->parsed()) {
            prepare_run_dir(out_dir, cfg, "evaluate");
            auto pol = make_policy(policy, sc, ActMode::Greedy);
            const auto seeds = validation_subset(sc, n_seeds);
            const EvalReport report = evaluate_policy(*pol, seeds, sc.env, sc.radio, sc.metric);
            write_metrics_csv(out_dir + "/metrics.csv", report);
            write_summary(out_dir + "/summary.json", report);
            std::cout << report.policy << ": r_score " << report.r_score << " sum_rate " << report.sum_rate_mean
                      << " p5_rate " << report.p5_rate << "\n";
        } else if (report_cmd->parsed()) {
            fs::create_directories(out_dir);
            std::vector<CurveSeries> series;
            for (const std::string& run : split_list(runs)) {
                series.push_back({fs::path(run).filename().string(), read_learning_curve(run + "/learning_curve.csv")});
            }
            std::vector<Baseline> lines;
            for (const std::string& b : split_list(baselines)) lines.push_back(read_summary(b));
            write_text(out_dir + "/curves.svg", render_curves_svg(series, lines, title));
            std::cout << "wrote " << out_dir << "/curves.svg\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace rrm
