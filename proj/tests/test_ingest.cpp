#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "helpers.hpp"
#include "windregime/dataset_io.hpp"
#include "windregime/diagnostics.hpp"
#include "windregime/error.hpp"
#include "windregime/synthetic.hpp"

using namespace windregime;
using testutil::day;
namespace fs = std::filesystem;

namespace {

SyntheticRegimeSpec six_regimes(double p_stay, std::uint64_t seed)
{
    SyntheticRegimeSpec s;
    const double probs[6] = {0.3, 0.1, 0.15, 0.15, 0.2, 0.1};
    for (int k = 0; k < 6; ++k) {
        s.regimes.push_back({6.0 + k, k * std::numbers::pi / 3.0, 1.0, probs[k]});
    }
    s.p_stay = p_stay;
    s.seed = seed;
    s.start = day(0);
    return s;
}

} // namespace

TEST_CASE("dataset write/read round trip is bit exact")
{
    testutil::TempDir tmp("io");
    const WeatherDataset ds = testutil::random_dataset(testutil::small_grid(2, 2), 2, 1, 11);
    const DatasetManifest m = write_dataset(ds, tmp.path() / "ds");
    CHECK(m.times.size() == 2);
    CHECK(read_dataset(tmp.path() / "ds") == ds);
    CHECK(read_dataset(tmp.path() / "ds" / kManifestName) == ds);

    // Values chosen to exercise float32 edge cases.
    const WeatherDataset edge(GridSpec{55.0, 55.0, 2.0, 2.3, 1, 4}, {day(0)}, {{"a", "1"}},
                              {-0.0f, 1e-38f, 3.4e38f, 0.1f});
    write_dataset(edge, tmp.path() / "edge");
    const WeatherDataset back = read_dataset(tmp.path() / "edge");
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::bit_cast<std::uint32_t>(back.data()[i]) == std::bit_cast<std::uint32_t>(edge.data()[i]));
    }
}

TEST_CASE("data file length follows the size formula")
{
    testutil::TempDir tmp("size");
    const WeatherDataset ds = testutil::random_dataset(testutil::small_grid(3, 5), 1, 2, 1);
    write_dataset(ds, tmp.path());
    CHECK(fs::file_size(tmp.path() / kDataName) == 2 * 3 * 5 * 4);
}

TEST_CASE("manifest has exactly the documented keys")
{
    testutil::TempDir tmp("keys");
    write_dataset(testutil::random_dataset(testutil::small_grid(), 2, 1, 2), tmp.path());
    const auto j = read_json_file(tmp.path() / kManifestName);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) {
        keys.push_back(k);
    }
    CHECK(keys == std::vector<std::string>{"channels", "data_file", "dtype", "format_version", "grid", "layout",
                                           "times"});
    CHECK(j["layout"] == "time,channel,lat,lon");
}

TEST_CASE("corrupt inputs are rejected")
{
    testutil::TempDir tmp("bad");
    const WeatherDataset ds = testutil::random_dataset(testutil::small_grid(2, 2), 2, 1, 3);
    write_dataset(ds, tmp.path());

    SUBCASE("truncated data file")
    {
        fs::resize_file(tmp.path() / kDataName, fs::file_size(tmp.path() / kDataName) - 4);
        CHECK_THROWS_AS(read_dataset(tmp.path()), CorruptionError);
    }
    SUBCASE("shuffled times")
    {
        auto j = read_json_file(tmp.path() / kManifestName);
        std::swap(j["times"][0], j["times"][1]);
        write_json_file(tmp.path() / kManifestName, j);
        CHECK_THROWS_AS(read_dataset(tmp.path()), ValidationError);
    }
    SUBCASE("unknown version")
    {
        auto j = read_json_file(tmp.path() / kManifestName);
        j["format_version"] = 7;
        write_json_file(tmp.path() / kManifestName, j);
        CHECK_THROWS_AS(read_dataset(tmp.path()), VersionError);
    }
    SUBCASE("extra key")
    {
        auto j = read_json_file(tmp.path() / kManifestName);
        j["comment"] = "x";
        write_json_file(tmp.path() / kManifestName, j);
        CHECK_THROWS_AS(read_dataset(tmp.path()), ValidationError);
    }
    SUBCASE("malformed json")
    {
        write_text_file(tmp.path() / kManifestName, "{\"format_version\": ");
        CHECK_THROWS_AS(read_dataset(tmp.path()), ValidationError);
    }
    SUBCASE("missing directory")
    {
        CHECK_THROWS_AS(read_dataset(tmp.path() / "nope"), IoError);
    }
}

TEST_CASE("single field round trip")
{
    testutil::TempDir tmp("field");
    const GridSpec g = testutil::small_grid();
    std::vector<float> v(g.cells());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = 0.25f * static_cast<float>(i);
    }
    const GriddedField f(g, day(3), {{"deficit", "m s-1"}}, v);
    write_field(f, tmp.path());
    CHECK(read_field(tmp.path()) == f);
}

TEST_CASE("noiseless generator reproduces regime means")
{
    SyntheticRegimeSpec s = six_regimes(0.0, 4);
    s.include_pressure = true;
    const GridSpec g = testutil::small_grid(5, 6);
    const SyntheticDataset syn = generate_synthetic(s, 30, g);
    REQUIRE(syn.labels.size() == 30);
    for (std::size_t t = 0; t < 30; ++t) {
        const GriddedField mean = regime_mean_field(s, static_cast<std::size_t>(syn.labels[t]), g, syn.dataset.times()[t]);
        CHECK(syn.dataset.field(t) == mean);
    }
}

TEST_CASE("regime mean field matches the documented formula")
{
    SyntheticRegimeSpec s;
    s.regimes = {{10.0, 0.5, 0.0, 1.0}};
    const GridSpec g = testutil::small_grid(2, 2);
    const GriddedField f = regime_mean_field(s, 0, g, day(0));
    for (float u : f.channel("u100")) {
        CHECK(u == doctest::Approx(10.0 * std::cos(0.5)).epsilon(1e-6));
    }
    for (float v : f.channel("v100")) {
        CHECK(v == doctest::Approx(10.0 * std::sin(0.5)).epsilon(1e-6));
    }
}

TEST_CASE("absorbing chain keeps the first label")
{
    const SyntheticDataset syn = generate_synthetic(six_regimes(1.0, 9), 50, testutil::small_grid(2, 2));
    for (int l : syn.labels) {
        CHECK(l == syn.labels.front());
    }
}

TEST_CASE("empirical persistence matches the chain")
{
    // P(stay) = p_stay + (1 - p_stay) * p_k.
    const SyntheticRegimeSpec s = six_regimes(0.8, 12345);
    const SyntheticDataset syn = generate_synthetic(s, 10000, GridSpec{55.0, 55.0, 2.0, 2.0, 1, 1});
    const TransitionMatrix tm = transition_matrix(syn.labels, syn.dataset.times(), 6);
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(std::abs(tm.at(k, k) - (0.8 + 0.2 * s.regimes[k].probability)) <= 0.02);
    }
}

TEST_CASE("generator is deterministic in its seed")
{
    SyntheticRegimeSpec s = six_regimes(0.3, 77);
    s.noise_std = 0.5;
    s.daily_speed_std = 1.0;
    s.daily_direction_std = 0.1;
    const GridSpec g = testutil::small_grid(4, 4);
    const SyntheticDataset a = generate_synthetic(s, 120, g);
    const SyntheticDataset b = generate_synthetic(s, 120, g);
    CHECK(a.dataset == b.dataset);
    CHECK(a.labels == b.labels);
    s.seed = 78;
    const SyntheticDataset c = generate_synthetic(s, 120, g);
    CHECK(c.labels != a.labels);
}

TEST_CASE("synthetic spec validation and json round trip")
{
    SyntheticRegimeSpec s = six_regimes(0.4, 3);
    s.noise_std = 0.25;
    s.include_pressure = true;
    const SyntheticRegimeSpec back = synthetic_spec_from_json(synthetic_spec_to_json(s));
    CHECK(back.regimes.size() == 6);
    CHECK(back.regimes[2].direction == doctest::Approx(s.regimes[2].direction));
    CHECK(back.noise_std == 0.25);
    CHECK(back.start == s.start);
    CHECK(back.include_pressure);

    SyntheticRegimeSpec empty;
    CHECK_THROWS_AS(empty.validate(), ValidationError);
    s.regimes[0].probability = 0.9;
    CHECK_THROWS_AS(s.validate(), ValidationError);

    auto j = synthetic_spec_to_json(six_regimes(0.4, 3));
    j["regimes"][0].erase("direction");
    j["regimes"][0]["direction_deg"] = 90.0;
    CHECK(synthetic_spec_from_json(j).regimes[0].direction == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("pressure channel is geostrophically oriented")
{
    SyntheticRegimeSpec s;
    s.regimes = {{10.0, 0.0, 0.0, 1.0}};
    s.include_pressure = true;
    const GridSpec g{55.0, 56.0, 2.0, 3.0, 3, 3};
    const GriddedField f = regime_mean_field(s, 0, g, day(0));
    // Eastward flow in the northern hemisphere: pressure falls to the north.
    CHECK(f.at(2, 0, 1) > f.at(2, 2, 1));
    CHECK(f.at(2, 1, 0) == doctest::Approx(f.at(2, 1, 2)));
}
