#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>

#include "doctest.h"
#include "rrmlab/dataset.hpp"
#include "rrmlab/errors.hpp"

using namespace rrm;
namespace fs = std::filesystem;

namespace {

Scenario tiny_scenario() {
    Scenario sc;
    sc.env.n_aps = 2;
    sc.env.n_ues = 5;
    sc.env.topk = 2;
    sc.env.episode_len = 20;
    return sc;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// A record flattened to a comparable key.
std::vector<float> record(const Dataset& d, std::size_t i) {
    std::vector<float> r(d.obs(i).begin(), d.obs(i).end());
    r.push_back(static_cast<float>(d.action(i)));
    r.push_back(d.reward(i));
    r.insert(r.end(), d.next_obs(i).begin(), d.next_obs(i).end());
    r.push_back(d.done(i) ? 1.0f : 0.0f);
    return r;
}

// Dataset of n records whose reward field tags the record.
Dataset tagged(const Scenario& sc, int n, float base) {
    DatasetHeader h;
    h.env_digest = env_digest(sc.env, sc.radio);
    h.obs_dim = sc.env.obs_dim();
    h.action_count = sc.env.action_count();
    h.bp_name = "tagged";
    Dataset d(h);
    const std::vector<double> obs(static_cast<std::size_t>(h.obs_dim), 0.5);
    for (int i = 0; i < n; ++i) d.push(obs, i % h.action_count, base + i, obs, i % 4 == 3);
    return d;
}

}  // namespace

TEST_CASE("collection records whole episodes") {
    Scenario sc = tiny_scenario();
    TdmPolicy tdm;
    const Dataset d = collect(tdm, sc, 7, 5 * 20, 11);
    CHECK(d.size() == 100);
    CHECK(d.header().count == 100);
    CHECK(d.header().bp_name == "tdm");
    int dones = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        dones += d.done(i) ? 1 : 0;
        CHECK(d.done(i) == ((i + 1) % 20 == 0));
        CHECK(d.action(i) < static_cast<std::uint32_t>(sc.env.action_count()));
        CHECK(d.obs(i).size() == static_cast<std::size_t>(sc.env.obs_dim()));
    }
    CHECK(dones == 5);
    // Consecutive records chain within an episode.
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
        if (!d.done(i)) CHECK(std::equal(d.next_obs(i).begin(), d.next_obs(i).end(), d.obs(i + 1).begin()));
    }
    CHECK_THROWS_AS(collect(tdm, sc, 7, 0, 11), ContractViolation);
}

TEST_CASE("collection is byte-deterministic") {
    TempDir dir("rrmlab_ds_det");
    Scenario sc = tiny_scenario();
    RandomPolicy a, b;
    collect(a, sc, 3, 90, 4).save((dir.path / "a.orld").string());
    collect(b, sc, 3, 90, 4).save((dir.path / "b.orld").string());
    CHECK(slurp(dir.path / "a.orld") == slurp(dir.path / "b.orld"));
    RandomPolicy c;
    collect(c, sc, 3, 90, 5).save((dir.path / "c.orld").string());
    CHECK(slurp(dir.path / "a.orld") != slurp(dir.path / "c.orld"));
}

TEST_CASE("serialization round trip and error contract") {
    TempDir dir("rrmlab_ds_io");
    Scenario sc = tiny_scenario();
    GreedyPolicy g;
    const Dataset d = collect(g, sc, 1, 45, 2);
    const fs::path p1 = dir.path / "one.orld";
    const fs::path p2 = dir.path / "two.orld";
    d.save(p1.string());
    const Dataset back = Dataset::load(p1.string());
    back.save(p2.string());
    CHECK(slurp(p1) == slurp(p2));
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(record(back, i) == record(d, i));
    CHECK(back.header().env_digest == d.header().env_digest);

    // file size arithmetic for a single transition
    const Dataset single = collect(g, sc, 1, 1, 2);
    const fs::path ps = dir.path / "single.orld";
    single.save(ps.string());
    const std::size_t header_bytes = 4 + 4 + 4 + header_text(single.header()).size();
    CHECK(fs::file_size(ps) == header_bytes + Dataset::record_size(sc.env.obs_dim()));
    CHECK(Dataset::record_size(sc.env.obs_dim()) == 8u * 12u + 9u);

    // magic, little-endian version and header length
    const std::string bytes = slurp(ps);
    CHECK(bytes.substr(0, 4) == "ORLD");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);

    // truncation names expected vs found
    fs::resize_file(p1, fs::file_size(p1) - Dataset::record_size(sc.env.obs_dim()) - 3);
    try {
        Dataset::load(p1.string());
        FAIL("truncated dataset loaded");
    } catch (const FormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("declares 45 records") != std::string::npos);
        CHECK(msg.find("found 43 complete records") != std::string::npos);
    }

    {
        std::ofstream os(p2, std::ios::binary | std::ios::trunc);
        os << "XXXX";
    }
    CHECK_THROWS_AS(Dataset::load(p2.string()), FormatError);
    std::string wrong_version = slurp(ps);
    wrong_version[4] = 9;
    {
        std::ofstream os(p2, std::ios::binary | std::ios::trunc);
        os << wrong_version;
    }
    CHECK_THROWS_AS(Dataset::load(p2.string()), FormatError);
}

TEST_CASE("allocation by largest remainder") {
    const std::vector<double> headline{0.5, 0.2, 0.2, 0.1};
    CHECK(allocate_counts(headline, 1000000) == std::vector<std::uint64_t>{500000, 200000, 200000, 100000});
    const std::vector<double> thirds{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    CHECK(allocate_counts(thirds, 10) == std::vector<std::uint64_t>{4, 3, 3});
    const std::vector<double> bad{0.5, 0.4};
    CHECK_THROWS_AS(allocate_counts(bad, 10), ConfigError);
    const std::vector<double> negative{1.2, -0.2};
    CHECK_THROWS_AS(allocate_counts(negative, 10), ConfigError);

    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(1 + trial % 6);
        double s = 0.0;
        for (double& x : p) s += (x = u(rng));
        for (double& x : p) x /= s;
        const std::uint64_t total = 1 + static_cast<std::uint64_t>(u(rng) * 5000);
        const auto counts = allocate_counts(p, total);
        std::uint64_t sum = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            sum += counts[i];
            CHECK(std::abs(static_cast<double>(counts[i]) - p[i] * static_cast<double>(total)) < 1.0);
        }
        CHECK(sum == total);
    }
}

TEST_CASE("mixing") {
    Scenario sc = tiny_scenario();
    const Dataset a = tagged(sc, 40, 0.0f);
    const Dataset b = tagged(sc, 30, 1000.0f);
    const Dataset c = tagged(sc, 30, 2000.0f);
    std::vector<MixSource> sources{{&a, "a", 0.5}, {&b, "b", 0.3}, {&c, "c", 0.2}};
    Rng rng(1);
    const Dataset m = mix(sources, 50, rng);
    CHECK(m.size() == 50);
    REQUIRE(m.header().sources.size() == 3);
    CHECK(m.header().sources[0].count == 25);
    CHECK(m.header().sources[1].count == 15);
    CHECK(m.header().sources[2].count == 10);

    // every output record appears verbatim in its source, with no repeats
    std::map<float, int> seen;
    int from_a = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const float tag = m.reward(i);
        ++seen[tag];
        const Dataset& src = tag < 1000.0f ? a : (tag < 2000.0f ? b : c);
        const auto idx = static_cast<std::size_t>(tag - (tag < 1000.0f ? 0.0f : (tag < 2000.0f ? 1000.0f : 2000.0f)));
        CHECK(record(m, i) == record(src, idx));
        from_a += tag < 1000.0f ? 1 : 0;
    }
    CHECK(from_a == 25);
    for (const auto& [tag, n] : seen) CHECK(n == 1);

    // output is shuffled across sources
    bool interleaved = false;
    for (std::size_t i = 1; i < 25; ++i) interleaved |= (m.reward(i) >= 1000.0f);
    CHECK(interleaved);

    // single source at proportion 1 is a permutation of a subset
    std::vector<MixSource> one{{&a, "a", 1.0}};
    Rng r2(2);
    const Dataset sub = mix(one, 40, r2);
    std::vector<float> tags;
    for (std::size_t i = 0; i < sub.size(); ++i) tags.push_back(sub.reward(i));
    std::sort(tags.begin(), tags.end());
    for (int i = 0; i < 40; ++i) CHECK(tags[static_cast<std::size_t>(i)] == static_cast<float>(i));

    // determinism
    Rng r3(1);
    const Dataset again = mix(sources, 50, r3);
    for (std::size_t i = 0; i < 50; ++i) CHECK(again.reward(i) == m.reward(i));
}

TEST_CASE("mixing rejects incompatible or undersized sources") {
    Scenario sc = tiny_scenario();
    const Dataset a = tagged(sc, 10, 0.0f);
    Scenario other = sc;
    other.env.pf_alpha = 0.1;
    const Dataset b = tagged(other, 10, 100.0f);
    std::vector<MixSource> bad{{&a, "a", 0.5}, {&b, "b", 0.5}};
    Rng rng(1);
    CHECK_THROWS_AS(mix(bad, 10, rng), ConfigError);

    const Dataset small = tagged(sc, 3, 100.0f);
    std::vector<MixSource> under{{&a, "a", 0.5}, {&small, "small.orld", 0.5}};
    try {
        mix(under, 10, rng);
        FAIL("undersized source accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("small.orld") != std::string::npos);
    }
}

TEST_CASE("mix spec parsing") {
    const auto e = parse_mix_spec("a.orld:0.5,dir/b.orld:0.2,c.orld:0.2,d.orld:0.1");
    REQUIRE(e.size() == 4);
    CHECK(e[1].path == "dir/b.orld");
    CHECK(e[3].proportion == 0.1);
    CHECK_THROWS_AS(parse_mix_spec("a.orld"), ConfigError);
    CHECK_THROWS_AS(parse_mix_spec("a.orld:x"), ConfigError);
    CHECK_THROWS_AS(parse_mix_spec(""), ConfigError);
}

TEST_CASE("digest tracks the environment configuration") {
    Scenario sc = tiny_scenario();
    CHECK(env_digest(sc.env, sc.radio) == env_digest(sc.env, sc.radio));
    Scenario other = sc;
    other.radio.noise_figure_db = 9.0;
    CHECK(env_digest(sc.env, sc.radio) != env_digest(other.env, other.radio));
    CHECK(collection_env_seed(7, 0) != collection_env_seed(7, 1));
    // collection environments never coincide with the validation seeds
    for (std::uint64_t ep = 0; ep < 10000; ++ep) {
        const auto s = collection_env_seed(7, ep);
        CHECK_FALSE((s >= 1000 && s <= 1009));
    }
}
