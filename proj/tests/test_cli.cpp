#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>

#include "cli.hpp"
#include "helpers.hpp"
#include "windregime/dataset_io.hpp"

namespace fs = std::filesystem;
using windregime::cli::run_cli;

namespace {

const std::string kTiny = std::string(WINDREGIME_SCENARIO_DIR) + "/tiny.json";

int cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "windregime-cli");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), root).string()] = slurp(e.path());
        }
    }
    return files;
}

std::size_t line_count(const fs::path& p)
{
    const std::string s = slurp(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

struct QuietLog {
    QuietLog() { setenv("WINDREGIME_LOG", "off", 1); }
};
const QuietLog quiet;

} // namespace

TEST_CASE("synth writes a dataset deterministically")
{
    testutil::TempDir tmp("synth");
    REQUIRE(cli({"synth", "--config", kTiny, "--out", (tmp.path() / "a").string()}) == 0);
    REQUIRE(cli({"synth", "--config", kTiny, "--out", (tmp.path() / "b").string()}) == 0);
    CHECK(fs::exists(tmp.path() / "a" / "dataset" / windregime::kManifestName));
    CHECK(slurp(tmp.path() / "a" / "dataset" / windregime::kDataName) ==
          slurp(tmp.path() / "b" / "dataset" / windregime::kDataName));
    REQUIRE(cli({"synth", "--config", kTiny, "--out", (tmp.path() / "c").string(), "--seed", "6"}) == 0);
    CHECK(slurp(tmp.path() / "a" / "dataset" / windregime::kDataName) !=
          slurp(tmp.path() / "c" / "dataset" / windregime::kDataName));
}

TEST_CASE("exit codes")
{
    testutil::TempDir tmp("codes");
    const std::string out = (tmp.path() / "out").string();
    windregime::write_text_file(tmp.path() / "bad.json", "{\"regimes\": [");
    CHECK(cli({"synth", "--config", (tmp.path() / "bad.json").string(), "--out", out}) == 2);
    CHECK(cli({"cluster", "--config", (tmp.path() / "missing.json").string(), "--out", out}) == 2);
    CHECK(cli({"frobnicate", "--config", kTiny}) == 2);
    CHECK(cli({"cluster"}) == 2);
    CHECK(cli({"cluster", "--config", kTiny, "--out", out}) == 3);
    REQUIRE(cli({"synth", "--config", kTiny, "--out", out}) == 0);
    CHECK(cli({"cluster", "--config", kTiny, "--out", out, "--window", "1,2,3"}) == 2);
    CHECK(cli({"cluster", "--config", kTiny, "--out", out, "--solver", "les"}) == 2);
    CHECK(cli({"aggregate", "--config", kTiny, "--out", out}) == 3);
    REQUIRE(cli({"cluster", "--config", kTiny, "--out", out}) == 0);
    CHECK(cli({"aggregate", "--config", kTiny, "--out", out}) == 3);
    CHECK(cli({"validate", "--config", kTiny, "--out", out}) == 3);
    CHECK(cli({"simulate", "--config", kTiny, "--out", out, "--solver", "external"}) == 2);
    CHECK(cli({"simulate", "--config", kTiny, "--out", out, "--k", "4"}) == 3);
    // More clusters than days is a numerical error.
    CHECK(cli({"cluster", "--config", kTiny, "--out", out, "--k", "41"}) == 4);
    // A window outside the domain.
    CHECK(cli({"cluster", "--config", kTiny, "--out", out, "--window", "10,11,2,3"}) == 4);
}

TEST_CASE("elbow rows follow k_range")
{
    testutil::TempDir tmp("elbow");
    auto j = windregime::read_json_file(kTiny);
    j["k_range"] = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    windregime::write_json_file(tmp.path() / "cfg.json", j);
    const std::string cfg = (tmp.path() / "cfg.json").string();
    const std::string out = (tmp.path() / "out").string();
    REQUIRE(cli({"synth", "--config", cfg, "--out", out}) == 0);
    REQUIRE(cli({"elbow", "--config", cfg, "--out", out}) == 0);
    CHECK(line_count(tmp.path() / "out" / "elbow.csv") == 12);
}

TEST_CASE("pipeline artifacts are byte identical on re-run")
{
    testutil::TempDir tmp("idem");
    const std::string a = (tmp.path() / "a").string();
    const std::string b = (tmp.path() / "b").string();
    REQUIRE(cli({"run", "--config", kTiny, "--out", a}) == 0);
    const auto first = tree(a);
    REQUIRE(cli({"run", "--config", kTiny, "--out", a}) == 0);
    CHECK(tree(a) == first);
    REQUIRE(cli({"run", "--config", kTiny, "--out", b, "--threads", "3"}) == 0);
    CHECK(tree(b) == first);

    for (const char* f : {"elbow.csv", "model.json", "transitions.csv", "labels.csv", "report.json",
                          "results/index.json", "results/cluster_2/manifest.json", "predictions/simple/summary.json",
                          "predictions/complex/mean_wake/data.bin", "validation/oracle_mean_wake/data.bin",
                          "validation/random_benchmark.csv"}) {
        CHECK_MESSAGE(first.count(f) == 1, f);
    }
    const auto report = windregime::read_json_file(tmp.path() / "a" / "report.json");
    CHECK(report["compute"]["cluster_runs"] == 3);
    CHECK(report["compute"]["oracle_runs"] == 40);
    CHECK(report["feedback"]["label_changes"].get<int>() >= 0);
}

TEST_CASE("stages can be run one by one")
{
    testutil::TempDir tmp("stages");
    const std::string out = (tmp.path() / "out").string();
    for (const char* stage : {"synth", "cluster", "simulate", "aggregate", "validate"}) {
        CHECK_MESSAGE(cli({stage, "--config", kTiny, "--out", out}) == 0, stage);
    }
    // The dataset is not touched by later stages.
    const std::string before = slurp(tmp.path() / "out" / "dataset" / windregime::kDataName);
    REQUIRE(cli({"validate", "--config", kTiny, "--out", out}) == 0);
    CHECK(slurp(tmp.path() / "out" / "dataset" / windregime::kDataName) == before);
}
