#include "rrmlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rrmlab/binary_io.hpp"
#include "rrmlab/config.hpp"
#include "rrmlab/errors.hpp"

namespace rrm {

namespace {

constexpr char kMagic[4] = {'O', 'R', 'L', 'D'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

Dataset::Dataset(DatasetHeader header) : header_(std::move(header)) {
    require(header_.obs_dim > 0 && header_.action_count > 0, "Dataset: header dimensions must be positive");
    header_.count = 0;
}

void Dataset::push(std::span<const double> obs, int action, double reward, std::span<const double> next_obs,
                   bool done) {
    require(static_cast<int>(obs.size()) == header_.obs_dim && static_cast<int>(next_obs.size()) == header_.obs_dim,
            "Dataset::push: observation length does not match the dataset schema");
    require(action >= 0 && action < header_.action_count, "Dataset::push: action outside the action space");
    for (double v : obs) obs_.push_back(static_cast<float>(v));
    for (double v : next_obs) next_obs_.push_back(static_cast<float>(v));
    actions_.push_back(static_cast<std::uint32_t>(action));
    rewards_.push_back(static_cast<float>(reward));
    done_.push_back(done ? 1 : 0);
    header_.count = actions_.size();
}

void Dataset::push_from(const Dataset& other, std::size_t i) {
    require(other.obs_dim() == obs_dim(), "Dataset::push_from: schema mismatch");
    const auto o = other.obs(i);
    const auto n = other.next_obs(i);
    obs_.insert(obs_.end(), o.begin(), o.end());
    next_obs_.insert(next_obs_.end(), n.begin(), n.end());
    actions_.push_back(other.actions_[i]);
    rewards_.push_back(other.rewards_[i]);
    done_.push_back(other.done_[i]);
    header_.count = actions_.size();
}

std::span<const float> Dataset::obs(std::size_t i) const {
    return {obs_.data() + i * static_cast<std::size_t>(header_.obs_dim), static_cast<std::size_t>(header_.obs_dim)};
}

std::span<const float> Dataset::next_obs(std::size_t i) const {
    return {next_obs_.data() + i * static_cast<std::size_t>(header_.obs_dim),
            static_cast<std::size_t>(header_.obs_dim)};
}

Batch Dataset::gather(std::span<const std::size_t> indices) const {
    const auto n = static_cast<Eigen::Index>(indices.size());
    Batch b;
    b.obs.resize(header_.obs_dim, n);
    b.next_obs.resize(header_.obs_dim, n);
    b.actions.resize(indices.size());
    b.rewards.resize(n);
    b.done.resize(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        const std::size_t i = indices[static_cast<std::size_t>(c)];
        require(i < size(), "Dataset::gather: index out of range");
        const auto o = obs(i);
        const auto x = next_obs(i);
        for (int r = 0; r < header_.obs_dim; ++r) {
            b.obs(r, c) = o[static_cast<std::size_t>(r)];
            b.next_obs(r, c) = x[static_cast<std::size_t>(r)];
        }
        b.actions[static_cast<std::size_t>(c)] = static_cast<int>(actions_[i]);
        b.rewards(c) = rewards_[i];
        b.done(c) = done_[i];
    }
    return b;
}

Batch Dataset::sample(int batch_size, Rng& rng) const {
    require(!empty() && batch_size > 0, "Dataset::sample: empty dataset or batch");
    std::uniform_int_distribution<std::size_t> pick(0, size() - 1);
    std::vector<std::size_t> idx(static_cast<std::size_t>(batch_size));
    for (auto& i : idx) i = pick(rng);
    return gather(idx);
}

std::string header_text(const DatasetHeader& h) {
    nlohmann::json j = {{"schema_version", h.schema_version},
                        {"env_digest", h.env_digest},
                        {"obs_dim", h.obs_dim},
                        {"action_count", h.action_count},
                        {"bp_name", h.bp_name},
                        {"env_seed", h.env_seed},
                        {"policy_seed", h.policy_seed},
                        {"count", h.count}};
    nlohmann::json sources = nlohmann::json::array();
    for (const MixProvenance& s : h.sources) sources.push_back({{"name", s.name}, {"count", s.count}});
    j["sources"] = sources;
    return j.dump();
}

DatasetHeader parse_header_text(const std::string& text) {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw FormatError("dataset header is not a JSON object");
    DatasetHeader h;
    try {
        h.schema_version = j.at("schema_version").get<std::uint32_t>();
        h.env_digest = j.at("env_digest").get<std::string>();
        h.obs_dim = j.at("obs_dim").get<int>();
        h.action_count = j.at("action_count").get<int>();
        h.bp_name = j.at("bp_name").get<std::string>();
        h.env_seed = j.at("env_seed").get<std::uint64_t>();
        h.policy_seed = j.at("policy_seed").get<std::uint64_t>();
        h.count = j.at("count").get<std::uint64_t>();
        for (const auto& s : j.at("sources")) h.sources.push_back({s.at("name"), s.at("count")});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("dataset header field error: ") + e.what());
    }
    return h;
}

void Dataset::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot open dataset for writing: " + path);
    const std::string text = header_text(header_);
    os.write(kMagic, sizeof(kMagic));
    io::put_u32(os, kFormatVersion);
    io::put_u32(os, static_cast<std::uint32_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (std::size_t i = 0; i < size(); ++i) {
        for (float v : obs(i)) io::put_f32(os, v);
        io::put_u32(os, actions_[i]);
        io::put_f32(os, rewards_[i]);
        for (float v : next_obs(i)) io::put_f32(os, v);
        os.put(static_cast<char>(done_[i]));
    }
    if (!os) throw FormatError("failed writing dataset: " + path);
}

Dataset Dataset::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open dataset: " + path);
    char magic[4];
    if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
        throw FormatError("not a dataset file (bad magic, expected ORLD): " + path);
    }
    const std::uint32_t version = io::get_u32(is, "dataset version");
    if (version != kFormatVersion) {
        throw FormatError("unsupported dataset version " + std::to_string(version) + " in " + path);
    }
    std::string text(io::get_u32(is, "header length"), '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw FormatError("truncated dataset header in " + path);
    }
    DatasetHeader header = parse_header_text(text);
    if (header.obs_dim <= 0 || header.action_count <= 0) throw FormatError("dataset header has bad dimensions");
    const std::uint64_t expected = header.count;

    const auto body_start = is.tellg();
    is.seekg(0, std::ios::end);
    const auto body_bytes = static_cast<std::uint64_t>(is.tellg() - body_start);
    is.seekg(body_start);
    const std::size_t rec = record_size(header.obs_dim);
    if (body_bytes != expected * rec) {
        throw FormatError("dataset " + path + ": header declares " + std::to_string(expected) + " records, found " +
                          std::to_string(body_bytes / rec) + " complete records (" + std::to_string(body_bytes) +
                          " bytes)");
    }

    Dataset ds(header);
    const auto dim = static_cast<std::size_t>(header.obs_dim);
    ds.obs_.reserve(expected * dim);
    ds.next_obs_.reserve(expected * dim);
    for (std::uint64_t i = 0; i < expected; ++i) {
        for (std::size_t d = 0; d < dim; ++d) ds.obs_.push_back(io::get_f32(is, "observation"));
        const std::uint32_t action = io::get_u32(is, "action");
        if (action >= static_cast<std::uint32_t>(header.action_count)) {
            throw FormatError("dataset " + path + ": action " + std::to_string(action) + " out of range at record " +
                              std::to_string(i));
        }
        ds.actions_.push_back(action);
        ds.rewards_.push_back(io::get_f32(is, "reward"));
        for (std::size_t d = 0; d < dim; ++d) ds.next_obs_.push_back(io::get_f32(is, "next observation"));
        char done = 0;
        if (!is.get(done)) throw FormatError("unexpected end of file while reading done flag");
        ds.done_.push_back(static_cast<std::uint8_t>(done));
    }
    ds.header_ = header;
    return ds;
}

std::string env_digest(const EnvConfig& env, const RadioConfig& radio) {
    const nlohmann::json j = {{"env", to_json(env)}, {"radio", to_json(radio)}};
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

std::uint64_t collection_env_seed(std::uint64_t base_seed, std::uint64_t episode) {
    return mix64(mix64(base_seed ^ fnv1a("collection-env")) + episode);
}

Dataset collect(SchedulingPolicy& bp, const Scenario& scenario, std::uint64_t env_seed, std::uint64_t n_transitions,
                std::uint64_t policy_seed) {
    require(n_transitions >= 1, "collect: need at least one transition");
    scenario.validate();
    const EnvConfig& ec = scenario.env;
    DatasetHeader h;
    h.env_digest = env_digest(ec, scenario.radio);
    h.obs_dim = ec.obs_dim();
    h.action_count = ec.action_count();
    h.bp_name = bp.name();
    h.env_seed = env_seed;
    h.policy_seed = policy_seed;
    Dataset ds(h);
    Rng rng = make_stream(policy_seed, "behavior-policy");
    for (std::uint64_t episode = 0; ds.size() < n_transitions; ++episode) {
        Environment env(ec, scenario.radio, collection_env_seed(env_seed, episode));
        while (!env.done() && ds.size() < n_transitions) {
            const std::vector<double> obs = env.observation().features;
            const StepResult step = env.step(bp.act(env, rng));
            ds.push(obs, step.action_index, step.reward, step.next_obs.features, step.done);
        }
    }
    return ds;
}

std::vector<std::uint64_t> allocate_counts(std::span<const double> proportions, std::uint64_t total) {
    if (proportions.empty()) throw ConfigError("mix: no sources");
    double sum = 0.0;
    for (double p : proportions) {
        if (!(p >= 0.0)) throw ConfigError("mix: proportions must be >= 0");
        sum += p;
    }
    if (!(std::abs(sum - 1.0) <= 1e-9)) throw ConfigError("mix: proportions must sum to 1 (got " + std::to_string(sum) + ")");
    std::vector<std::uint64_t> counts(proportions.size());
    std::vector<double> remainder(proportions.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < proportions.size(); ++i) {
        const double exact = proportions[i] * static_cast<double>(total);
        counts[i] = static_cast<std::uint64_t>(std::floor(exact + 1e-9));
        remainder[i] = exact - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(proportions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k % order.size()]];
    return counts;
}

Dataset mix(std::span<const MixSource> sources, std::uint64_t total, Rng& rng) {
    require(!sources.empty(), "mix: no sources");
    for (const MixSource& s : sources) require(s.dataset != nullptr, "mix: null source dataset");
    const DatasetHeader& first = sources.front().dataset->header();
    for (const MixSource& s : sources) {
        const DatasetHeader& h = s.dataset->header();
        if (h.env_digest != first.env_digest || h.obs_dim != first.obs_dim || h.action_count != first.action_count ||
            h.schema_version != first.schema_version) {
            throw ConfigError("mix: source '" + s.name + "' is not schema-compatible with '" + sources.front().name +
                              "' (digest " + h.env_digest + " vs " + first.env_digest + ")");
        }
    }
    std::vector<double> proportions;
    for (const MixSource& s : sources) proportions.push_back(s.proportion);
    const std::vector<std::uint64_t> counts = allocate_counts(proportions, total);

    DatasetHeader h = first;
    h.bp_name = "mix";
    h.sources.clear();
    Dataset out(h);
    std::vector<std::pair<std::size_t, std::size_t>> picks;  // (source, record)
    for (std::size_t s = 0; s < sources.size(); ++s) {
        const Dataset& src = *sources[s].dataset;
        if (src.size() < counts[s]) {
            throw ConfigError("mix: source '" + sources[s].name + "' has " + std::to_string(src.size()) +
                              " transitions, needs " + std::to_string(counts[s]));
        }
        // partial Fisher-Yates: first counts[s] entries become a uniform sample without replacement
        std::vector<std::size_t> idx(src.size());
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = 0; i < counts[s]; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
            std::swap(idx[i], idx[pick(rng)]);
            picks.emplace_back(s, idx[i]);
        }
        out.header().sources.push_back({sources[s].name, counts[s]});
    }
    std::shuffle(picks.begin(), picks.end(), rng);
    for (const auto& [s, i] : picks) out.push_from(*sources[s].dataset, i);
    return out;
}

std::vector<MixEntry> parse_mix_spec(const std::string& spec) {
    std::vector<MixEntry> entries;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == item.size()) {
            throw ConfigError("mix spec entry '" + item + "' is not of the form <path>:<proportion>");
        }
        MixEntry e;
        e.path = item.substr(0, colon);
        try {
            e.proportion = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("mix spec entry '" + item + "' has a non-numeric proportion");
        }
        entries.push_back(e);
    }
    if (entries.empty()) throw ConfigError("empty mix spec");
    return entries;
}

}  // namespace rrm
