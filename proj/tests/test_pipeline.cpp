#include <doctest.h>

#include "helpers.hpp"
#include "windregime/dataset_io.hpp"
#include "windregime/error.hpp"
#include "windregime/pipeline.hpp"

using namespace windregime;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config()
{
    const fs::path p = fs::path(WINDREGIME_SCENARIO_DIR) / "tiny.json";
    return run_config_from_json(read_json_file(p), p.parent_path());
}

WeatherDataset synthesize(const RunConfig& c, const fs::path& out)
{
    const auto& s = *c.synthetic;
    write_dataset(generate_synthetic(s.spec, s.n_days, s.grid).dataset, out / "dataset");
    return load_dataset(c, out);
}

} // namespace

TEST_CASE("run config parsing")
{
    const RunConfig c = tiny_config();
    CHECK(c.k == 3);
    CHECK(c.seed == 3);
    CHECK(c.n_init == 4);
    CHECK(c.jensen.samples_per_cell == 2);
    CHECK(c.random_sample_size == 3);
    REQUIRE(c.synthetic);
    CHECK(c.synthetic->n_days == 40);
    CHECK(c.synthetic->grid.n_lat == 16);

    const RunConfig back = run_config_from_json(run_config_to_json(c), fs::current_path());
    CHECK(back.k == c.k);
    CHECK(back.k_range == c.k_range);
    CHECK(back.jensen.k_wake == c.jensen.k_wake);

    CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"k", 3}}, "."), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"dataset", "x"}, {"solver", "les"}}, "."), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"dataset", "x"}, {"k", "six"}}, "."), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(nlohmann::json{{"dataset", "x"}, {"solver", "external"}}, "."),
                    ValidationError);
}

TEST_CASE("missing dataset is a dependency error")
{
    testutil::TempDir tmp("nods");
    CHECK_THROWS_AS(load_dataset(tiny_config(), tmp.path()), DependencyError);
}

TEST_CASE("tiny scenario end to end")
{
    testutil::TempDir tmp("tiny");
    const RunConfig c = tiny_config();
    const WeatherDataset ds = synthesize(c, tmp.path());
    CHECK(ds.size() == 40);
    const FarmSpec farm = resolve_farm(c, ds.grid());
    const auto solver = make_solver(c);

    const PipelineResult p = run_cluster_pipeline(ds, c, farm, *solver);
    CHECK(p.solver_runs == 3);
    CHECK(p.cluster_results.size() == 3);
    CHECK(p.simple.power->total_power > 0.0);
    CHECK(p.complex.power->total_power > 0.0);

    const ValidationOutcome v = run_validation(ds, c, farm, *solver, p);
    CHECK(v.oracle.solver_runs == 40);
    CHECK(v.simple.cluster_runs == 3);
    CHECK(v.random.estimates.size() == 50);
    CHECK(v.power_curve_total >= v.oracle.total_power);
    REQUIRE(v.feedback);
    CHECK(v.feedback->without_farm.labels == p.model.labels);

    // Repeat runs agree exactly.
    const PipelineResult q = run_cluster_pipeline(ds, c, farm, *solver);
    CHECK(q.model.labels == p.model.labels);
    CHECK(q.complex.power->total_power == p.complex.power->total_power);
    CHECK(q.complex.wake->total_wake.values == p.complex.wake->total_wake.values);
}

TEST_CASE("validation period and window")
{
    testutil::TempDir tmp("period");
    RunConfig c = tiny_config();
    const WeatherDataset full = synthesize(c, tmp.path());
    c.validation_start = full.times()[10];
    c.validation_end = full.times()[20];
    CHECK(validation_period(c, full) == std::pair<std::size_t, std::size_t>{10, 20});
    c.validation_end = full.times()[10];
    CHECK_THROWS_AS(validation_period(c, full), RangeError);

    c.window = std::array<double, 4>{55.95, 56.05, 2.9, 3.1};
    const WeatherDataset w = load_dataset(c, tmp.path());
    CHECK(w.grid().n_lat < full.grid().n_lat);
    CHECK(w.grid().lat_min >= 55.95 - 1e-9);
}

TEST_CASE("external solver directory naming")
{
    testutil::TempDir tmp("extdir");
    RunConfig c = tiny_config();
    const WeatherDataset ds = synthesize(c, tmp.path());
    const FarmSpec farm = resolve_farm(c, ds.grid());
    const auto jensen = make_solver(c);
    CHECK(external_result_dirname(ds.times()[0]) == "2007-01-01T12-00-00Z");
    for (std::size_t t = 0; t < 2; ++t) {
        export_wake_result(simulate_day(ds, t, farm, *jensen), tmp.path() / "ext" / external_result_dirname(ds.times()[t]));
    }
    c.solver = SolverKind::external;
    c.external_results = tmp.path() / "ext";
    const auto ext = make_solver(c);
    CHECK(simulate_day(ds, 1, farm, *ext).deficit == simulate_day(ds, 1, farm, *jensen).deficit);
    CHECK_THROWS_AS(simulate_day(ds, 2, farm, *ext), DependencyError);
    c.external_results = tmp.path() / "none";
    CHECK_THROWS_AS(make_solver(c), DependencyError);
}
