#include "windregime/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "windregime/dataset_io.hpp"
#include "windregime/error.hpp"
#include "windregime/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace windregime {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

CenterSampling sampling_from_string(const std::string& s)
{
    if (s == "nearest_cell") {
        return CenterSampling::nearest_cell;
    }
    if (s == "bilinear") {
        return CenterSampling::bilinear;
    }
    throw ValidationError("unknown center_sampling '" + s + "'");
}

} // namespace

SyntheticScenario synthetic_scenario_from_json(const json& j)
{
    try {
        const json& body = j.contains("synthetic") ? j.at("synthetic") : j;
        SyntheticScenario s;
        s.spec = synthetic_spec_from_json(body);
        s.grid = grid_from_json(body.at("grid"));
        s.n_days = body.value("n_days", std::size_t{365});
        if (s.n_days < 1) {
            throw ValidationError("n_days must be at least 1");
        }
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid synthetic scenario: ") + e.what());
    }
}

void RunConfig::validate() const
{
    if (k < 1) {
        throw ValidationError("k must be at least 1");
    }
    if (n_init < 1 || max_iter < 1 || tol < 0.0) {
        throw ValidationError("invalid k-means options");
    }
    if (channels.empty()) {
        throw ValidationError("at least one clustering channel is required");
    }
    if (!dataset && !synthetic) {
        throw ValidationError("config needs a 'dataset' path or a 'synthetic' scenario");
    }
    if (solver == SolverKind::external && !external_results) {
        throw ValidationError("the external solver needs 'external_results'");
    }
    if (window && ((*window)[0] > (*window)[1] || (*window)[2] > (*window)[3])) {
        throw ValidationError("window bounds must be ordered min,max");
    }
    if (random_sample_size < 1 || random_draws < 1) {
        throw ValidationError("random benchmark sizes must be positive");
    }
    if (jensen.k_wake <= 0.0 || jensen.samples_per_cell < 1) {
        throw ValidationError("invalid jensen options");
    }
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir)
{
    RunConfig c;
    try {
        if (j.contains("dataset")) {
            c.dataset = resolve(base_dir, j.at("dataset").get<std::string>());
        }
        if (j.contains("synthetic")) {
            c.synthetic = synthetic_scenario_from_json(j.at("synthetic"));
        }
        c.channels = j.value("channels", c.channels);
        if (j.contains("window")) {
            c.window = j.at("window").get<std::array<double, 4>>();
        }
        c.k = j.value("k", c.k);
        c.seed = j.value("seed", c.seed);
        c.n_init = j.value("n_init", c.n_init);
        c.max_iter = j.value("max_iter", c.max_iter);
        c.tol = j.value("tol", c.tol);
        c.k_range = j.value("k_range", c.k_range);
        if (j.contains("farm")) {
            const json& f = j.at("farm");
            c.farm = farm_from_json(f.is_string() ? read_json_file(resolve(base_dir, f.get<std::string>())) : f);
        }
        const std::string solver = j.value("solver", std::string("jensen"));
        if (solver == "jensen") {
            c.solver = SolverKind::jensen;
        } else if (solver == "external") {
            c.solver = SolverKind::external;
        } else {
            throw ValidationError("unknown solver '" + solver + "'");
        }
        if (j.contains("jensen")) {
            c.jensen.k_wake = j.at("jensen").value("k_wake", c.jensen.k_wake);
            c.jensen.samples_per_cell = j.at("jensen").value("samples_per_cell", c.jensen.samples_per_cell);
        }
        if (j.contains("external_results")) {
            c.external_results = resolve(base_dir, j.at("external_results").get<std::string>());
        }
        if (j.contains("validation")) {
            const json& v = j.at("validation");
            if (v.contains("start")) {
                c.validation_start = parse_timestamp(v.at("start").get<std::string>());
            }
            if (v.contains("end")) {
                c.validation_end = parse_timestamp(v.at("end").get<std::string>());
            }
            c.random_draws = v.value("random_draws", c.random_draws);
            c.random_sample_size = v.value("random_sample_size", c.random_sample_size);
            c.feedback = v.value("feedback", c.feedback);
        }
        c.sampling = sampling_from_string(j.value("center_sampling", std::string("nearest_cell")));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid run config: ") + e.what());
    }
    c.validate();
    return c;
}

json run_config_to_json(const RunConfig& c)
{
    json j{{"channels", c.channels},
           {"k", c.k},
           {"seed", c.seed},
           {"n_init", c.n_init},
           {"max_iter", c.max_iter},
           {"tol", c.tol},
           {"k_range", c.k_range},
           {"solver", c.solver == SolverKind::jensen ? "jensen" : "external"},
           {"jensen", {{"k_wake", c.jensen.k_wake}, {"samples_per_cell", c.jensen.samples_per_cell}}},
           {"center_sampling", c.sampling == CenterSampling::nearest_cell ? "nearest_cell" : "bilinear"}};
    if (c.dataset) {
        j["dataset"] = c.dataset->string();
    }
    if (c.synthetic) {
        json syn = synthetic_spec_to_json(c.synthetic->spec);
        syn["grid"] = grid_to_json(c.synthetic->grid);
        syn["n_days"] = c.synthetic->n_days;
        j["synthetic"] = syn;
    }
    if (c.window) {
        j["window"] = *c.window;
    }
    if (c.farm) {
        j["farm"] = farm_to_json(*c.farm);
    }
    if (c.external_results) {
        j["external_results"] = c.external_results->string();
    }
    json v{{"random_draws", c.random_draws}, {"random_sample_size", c.random_sample_size}, {"feedback", c.feedback}};
    if (c.validation_start) {
        v["start"] = format_timestamp(*c.validation_start);
    }
    if (c.validation_end) {
        v["end"] = format_timestamp(*c.validation_end);
    }
    j["validation"] = v;
    return j;
}

WeatherDataset load_dataset(const RunConfig& config, const fs::path& out_dir)
{
    const fs::path path = config.dataset ? *config.dataset : out_dir / "dataset";
    if (!fs::exists(path)) {
        throw DependencyError("dataset not found: " + path.string() + " (run 'synth' first)");
    }
    WeatherDataset ds = read_dataset(path);
    if (config.window) {
        const auto& w = *config.window;
        ds = extract_window(ds, window_from_bounds(ds.grid(), w[0], w[1], w[2], w[3]));
    }
    return ds;
}

FarmSpec resolve_farm(const RunConfig& config, const GridSpec& grid)
{
    FarmSpec farm = config.farm ? *config.farm : default_farm({grid.center_lat(), grid.center_lon()});
    farm.validate();
    return farm;
}

std::pair<std::size_t, std::size_t> validation_period(const RunConfig& config, const WeatherDataset& ds)
{
    const std::size_t first = config.validation_start ? ds.lower_bound(*config.validation_start) : 0;
    const std::size_t last = config.validation_end ? ds.lower_bound(*config.validation_end) : ds.size();
    if (first >= last) {
        throw RangeError("validation period contains no datapoints");
    }
    return {first, last};
}

std::string external_result_dirname(Timestamp t)
{
    std::string s = format_timestamp(t);
    std::replace(s.begin(), s.end(), ':', '-');
    return s;
}

std::unique_ptr<FlowSolver> make_solver(const RunConfig& config)
{
    if (config.solver == SolverKind::jensen) {
        return std::make_unique<JensenSolver>(config.jensen);
    }
    const fs::path root = *config.external_results;
    if (!fs::is_directory(root)) {
        throw DependencyError("external results directory not found: " + root.string());
    }
    std::map<Timestamp, fs::path> results;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) {
            continue;
        }
        std::string name = entry.path().filename().string();
        // YYYY-MM-DDTHH-MM-SSZ back to the ISO form.
        if (name.size() >= 19 && name[10] == 'T') {
            name[13] = ':';
            name[16] = ':';
            try {
                results.emplace(parse_timestamp(name), entry.path());
            } catch (const ValidationError&) {
            }
        }
    }
    return std::make_unique<ExternalSolver>(std::move(results));
}

PipelineResult run_cluster_pipeline(const WeatherDataset& ds, const RunConfig& config, const FarmSpec& farm,
                                    const FlowSolver& solver)
{
    const auto start = std::chrono::steady_clock::now();
    const auto [first, last] = validation_period(config, ds);
    PipelineResult r;
    r.model = kmeans_fit(ds, config.channels, config.kmeans_options());
    r.transitions = transition_matrix(r.model.labels, ds.times(), r.model.k);

    CountingSolver counter(solver);
    std::vector<std::optional<WakeResult>> results(r.model.k);
    parallel_for(r.model.k, [&](std::size_t c) {
        results[c] = simulate_day(ds, r.model.representative_idx[c], farm, counter);
    });
    for (auto& res : results) {
        r.cluster_results.push_back(std::move(*res));
    }
    r.solver_runs = counter.calls();

    r.inputs = make_aggregation_inputs(ds, r.model.labels, r.model.representative_idx, r.cluster_results, farm, first,
                                       last, config.sampling);
    r.simple = simple_sum(r.inputs);
    r.complex = complex_sum(r.inputs);
    r.seconds = seconds_since(start);
    return r;
}

ValidationOutcome run_validation(const WeatherDataset& ds, const RunConfig& config, const FarmSpec& farm,
                                 const FlowSolver& solver, const PipelineResult& pipeline)
{
    const auto [first, last] = validation_period(config, ds);
    const auto start = std::chrono::steady_clock::now();
    CountingSolver counter(solver);
    ValidationOutcome v;
    v.oracle = run_oracle(ds, farm, counter, first, last);
    v.oracle_seconds = seconds_since(start);
    v.oracle.solver_runs = counter.calls();

    const std::span<const int> labels(pipeline.model.labels.data() + first, last - first);
    v.simple = compare(pipeline.simple, v.oracle, labels);
    v.complex = compare(pipeline.complex, v.oracle, labels);
    v.simple.cluster_runs = v.complex.cluster_runs = pipeline.solver_runs;

    v.random = random_sample_benchmark(v.oracle, config.random_draws,
                                       std::min(config.random_sample_size, v.oracle.size()), config.seed);
    v.power_curve_total = power_curve_baseline(ds, farm, first, last, config.sampling);
    for (ValidationReport* r : {&v.simple, &v.complex}) {
        r->random_benchmark = v.random.summary;
        r->power_curve_baseline = v.power_curve_total;
    }
    if (config.feedback) {
        v.feedback = farm_feedback_recluster(ds, v.oracle, config.kmeans_options());
    }
    return v;
}

} // namespace windregime
