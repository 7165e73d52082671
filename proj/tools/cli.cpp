#include "cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "windregime/dataset_io.hpp"
#include "windregime/diagnostics.hpp"
#include "windregime/error.hpp"
#include "windregime/parallel.hpp"
#include "windregime/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace windregime::cli {

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> solver;
    std::optional<std::size_t> k;
    std::optional<std::string> window;
};

// Anything wrong with the config file or flags.
class ConfigError : public Error {
public:
    using Error::Error;
};

std::shared_ptr<spdlog::logger> logger()
{
    auto log = spdlog::get("windregime");
    if (!log) {
        log = spdlog::stderr_color_mt("windregime");
        log->set_pattern("[%l] %v");
    }
    const char* env = std::getenv("WINDREGIME_LOG");
    log->set_level(env ? spdlog::level::from_str(env) : spdlog::level::info);
    return log;
}

std::array<double, 4> parse_window(const std::string& text)
{
    std::array<double, 4> w{};
    std::stringstream ss(text);
    std::string item;
    std::size_t n = 0;
    while (std::getline(ss, item, ',')) {
        if (n == 4) {
            throw ConfigError("--window takes exactly four values");
        }
        try {
            std::size_t used = 0;
            w[n] = std::stod(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError("--window value '" + item + "' is not a number");
        }
        ++n;
    }
    if (n != 4) {
        throw ConfigError("--window takes latmin,latmax,lonmin,lonmax");
    }
    return w;
}

json read_config_json(const Options& o)
{
    try {
        return read_json_file(o.config);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

RunConfig load_config(const Options& o)
{
    try {
        RunConfig c = run_config_from_json(read_config_json(o), fs::path(o.config).parent_path());
        if (o.seed) {
            c.seed = *o.seed;
        }
        if (o.k) {
            c.k = *o.k;
        }
        if (o.solver) {
            c.solver = *o.solver == "external" ? SolverKind::external : SolverKind::jensen;
        }
        if (o.window) {
            c.window = parse_window(*o.window);
        }
        c.validate();
        return c;
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
}

std::string num(double v)
{
    return fmt::format("{}", v);
}

void require(const fs::path& p, const std::string& stage)
{
    if (!fs::exists(p)) {
        throw DependencyError("missing " + p.string() + " (run '" + stage + "' first)");
    }
}

ClusterModel read_model(const fs::path& out)
{
    require(out / "model.json", "cluster");
    return cluster_model_from_json(read_json_file(out / "model.json"));
}

std::vector<WakeResult> read_results(const WeatherDataset& ds, const ClusterModel& model, const fs::path& out)
{
    std::vector<WakeResult> results;
    for (std::size_t c = 0; c < model.k; ++c) {
        const fs::path dir = out / "results" / ("cluster_" + std::to_string(c));
        require(dir / kManifestName, "simulate");
        results.push_back(read_wake_result(dir, InflowCondition(ds.field(model.representative_idx[c]))));
    }
    return results;
}

void check_model(const ClusterModel& model, const WeatherDataset& ds, const RunConfig& c)
{
    if (model.labels.size() != ds.size() || model.k != c.k) {
        throw DependencyError("model.json does not match the current dataset and k (re-run 'cluster')");
    }
}

// --- stages -------------------------------------------------------------

void cmd_synth(const Options& o, const fs::path& out)
{
    SyntheticScenario s;
    try {
        s = synthetic_scenario_from_json(read_config_json(o));
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    if (o.seed) {
        s.spec.seed = *o.seed;
    }
    const SyntheticDataset syn = generate_synthetic(s.spec, s.n_days, s.grid);
    write_dataset(syn.dataset, out / "dataset");
    std::string csv = "time,regime\n";
    for (std::size_t t = 0; t < syn.labels.size(); ++t) {
        csv += format_timestamp(syn.dataset.times()[t]) + "," + std::to_string(syn.labels[t]) + "\n";
    }
    write_text_file(out / "dataset" / "regimes.csv", csv);
    logger()->info("synth: {} days on a {}x{} grid -> {}", s.n_days, s.grid.n_lat, s.grid.n_lon,
                   (out / "dataset").string());
}

void cmd_elbow(const RunConfig& c, const fs::path& out)
{
    const WeatherDataset ds = load_dataset(c, out);
    const ElbowReport r = elbow_scan(ds, c.channels, c.k_range, c.kmeans_options());
    std::string csv = "k,avg_distance,avg_correlation,silhouette,inertia\n";
    for (const auto& row : r.rows) {
        csv += fmt::format("{},{},{},{},{}\n", row.k, num(row.avg_distance), num(row.avg_correlation),
                           row.silhouette ? num(*row.silhouette) : std::string(), num(row.inertia));
    }
    write_text_file(out / "elbow.csv", csv);
    logger()->info("elbow: {} rows -> {}", r.rows.size(), (out / "elbow.csv").string());
}

void cmd_cluster(const RunConfig& c, const fs::path& out)
{
    const WeatherDataset ds = load_dataset(c, out);
    const ClusterModel model = kmeans_fit(ds, c.channels, c.kmeans_options());
    write_json_file(out / "model.json", cluster_model_to_json(model));

    const TransitionMatrix tm = transition_matrix(model.labels, ds.times(), model.k);
    std::string csv = "from,to,count,probability\n";
    for (std::size_t i = 0; i < tm.k; ++i) {
        for (std::size_t j = 0; j < tm.k; ++j) {
            csv += fmt::format("{},{},{},{}\n", i, j, tm.counts[i * tm.k + j], num(tm.at(i, j)));
        }
    }
    write_text_file(out / "transitions.csv", csv);

    std::string labels = "time,label\n";
    for (std::size_t t = 0; t < ds.size(); ++t) {
        labels += format_timestamp(ds.times()[t]) + "," + std::to_string(model.labels[t]) + "\n";
    }
    write_text_file(out / "labels.csv", labels);
    logger()->info("cluster: k={} inertia={:.6g} iterations={}", model.k, model.inertia, model.iterations_run);
}

void cmd_simulate(const RunConfig& c, const fs::path& out)
{
    const WeatherDataset ds = load_dataset(c, out);
    const ClusterModel model = read_model(out);
    check_model(model, ds, c);
    const FarmSpec farm = resolve_farm(c, ds.grid());
    const auto solver = make_solver(c);
    std::vector<std::optional<WakeResult>> results(model.k);
    parallel_for(model.k, [&](std::size_t i) {
        results[i] = simulate_day(ds, model.representative_idx[i], farm, *solver);
    });
    json index = json::array();
    for (std::size_t i = 0; i < model.k; ++i) {
        export_wake_result(*results[i], out / "results" / ("cluster_" + std::to_string(i)));
        index.push_back({{"cluster", i},
                         {"representative", model.representative_idx[i]},
                         {"time", format_timestamp(ds.times()[model.representative_idx[i]])},
                         {"farm_power_w", results[i]->farm_power}});
    }
    write_json_file(out / "results" / "index.json",
                    json{{"solver", solver->name()}, {"solver_runs", model.k}, {"clusters", index},
                         {"farm", farm_to_json(farm)}});
    logger()->info("simulate: {} {} runs", model.k, solver->name());
}

PipelineResult aggregate_from_artifacts(const WeatherDataset& ds, const RunConfig& c, const FarmSpec& farm,
                                        const fs::path& out)
{
    PipelineResult p;
    p.model = read_model(out);
    check_model(p.model, ds, c);
    p.cluster_results = read_results(ds, p.model, out);
    p.solver_runs = p.model.k;
    p.transitions = transition_matrix(p.model.labels, ds.times(), p.model.k);
    const auto [first, last] = validation_period(c, ds);
    p.inputs = make_aggregation_inputs(ds, p.model.labels, p.model.representative_idx, p.cluster_results, farm, first,
                                       last, c.sampling);
    p.simple = simple_sum(p.inputs);
    p.complex = complex_sum(p.inputs);
    return p;
}

void cmd_aggregate(const RunConfig& c, const fs::path& out)
{
    const WeatherDataset ds = load_dataset(c, out);
    const FarmSpec farm = resolve_farm(c, ds.grid());
    const PipelineResult p = aggregate_from_artifacts(ds, c, farm, out);
    const Timestamp stamp = ds.times()[validation_period(c, ds).first];
    write_prediction(p.simple, out / "predictions" / "simple", stamp);
    write_prediction(p.complex, out / "predictions" / "complex", stamp);
    for (const auto& w : p.complex.warnings) {
        logger()->warn("aggregate: {}", w);
    }
    logger()->info("aggregate: simple {:.6e} W*days, complex {:.6e} W*days", p.simple.power->total_power,
                   p.complex.power->total_power);
}

void cmd_validate(const RunConfig& c, const fs::path& out)
{
    const WeatherDataset ds = load_dataset(c, out);
    const FarmSpec farm = resolve_farm(c, ds.grid());
    require(out / "predictions" / "complex" / "summary.json", "aggregate");
    const PipelineResult p = aggregate_from_artifacts(ds, c, farm, out);
    const auto solver = make_solver(c);
    const ValidationOutcome v = run_validation(ds, c, farm, *solver, p);
    const auto [first, last] = validation_period(c, ds);

    json report{{"period",
                 {{"start", format_timestamp(ds.times()[first])},
                  {"end", format_timestamp(ds.times()[last - 1])},
                  {"days", last - first}}},
                {"k", p.model.k},
                {"solver", solver->name()},
                {"compute",
                 {{"cluster_runs", p.solver_runs},
                  {"oracle_runs", v.oracle.solver_runs},
                  {"run_fraction", static_cast<double>(p.solver_runs) / static_cast<double>(v.oracle.solver_runs)}}},
                {"simple", report_to_json(v.simple)},
                {"complex", report_to_json(v.complex)}};
    if (v.feedback) {
        report["feedback"] = feedback_to_json(*v.feedback);
    }
    write_json_file(out / "report.json", report);

    const fs::path dir = out / "validation";
    const Timestamp stamp = ds.times()[first];
    write_field(oracle_mean_wake(v.oracle).to_field(stamp), dir / "oracle_mean_wake");
    const std::span<const int> labels(p.model.labels.data() + first, last - first);
    const auto means = oracle_cluster_means(v.oracle, labels, p.model.k);
    for (std::size_t i = 0; i < means.size(); ++i) {
        write_field(means[i].to_field(stamp), dir / ("oracle_cluster_" + std::to_string(i)));
        Raster diff = p.complex.wake->per_cluster_mean[i];
        for (std::size_t j = 0; j < diff.values.size(); ++j) {
            diff.values[j] -= means[i].values[j];
        }
        write_field(diff.to_field(stamp, "deficit_error"), dir / ("complex_minus_oracle_" + std::to_string(i)));
    }
    std::string csv = "draw,estimate_w_days\n";
    for (std::size_t d = 0; d < v.random.estimates.size(); ++d) {
        csv += fmt::format("{},{}\n", d, num(v.random.estimates[d]));
    }
    write_text_file(dir / "random_benchmark.csv", csv);
    std::string days = "time,label,oracle_power_w\n";
    for (std::size_t d = 0; d < v.oracle.size(); ++d) {
        days += fmt::format("{},{},{}\n", format_timestamp(ds.times()[first + d]), labels[d],
                            num(v.oracle.days[d].farm_power));
    }
    write_text_file(dir / "oracle_days.csv", days);

    logger()->info("validate: oracle {:.6e}, simple err {:.2f}%, complex err {:.2f}%, runs {}/{}",
                   v.oracle.total_power, 100.0 * *v.simple.rel_error, 100.0 * *v.complex.rel_error, p.solver_runs,
                   v.oracle.solver_runs);
}

void cmd_run(const Options& o, const RunConfig& c, const fs::path& out)
{
    if (!c.dataset) {
        cmd_synth(o, out);
    }
    cmd_elbow(c, out);
    cmd_cluster(c, out);
    cmd_simulate(c, out);
    cmd_aggregate(c, out);
    cmd_validate(c, out);
}

} // namespace

int run_cli(int argc, const char* const* argv)
{
    CLI::App app{"Weather-regime clustering and wind-farm wake aggregation"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "Run config (JSON)")->required();
    app.add_option("--out", o.out, "Artifact directory")->capture_default_str();
    app.add_option("--seed", o.seed, "Override the k-means (or, for synth, the generator) seed");
    app.add_option("--threads", o.threads, "Cap worker threads")->check(CLI::PositiveNumber);
    app.add_option("--solver", o.solver, "Flow solver")->check(CLI::IsMember({"jensen", "external"}));
    app.add_option("--k", o.k, "Override the cluster count")->check(CLI::PositiveNumber);
    app.add_option("--window", o.window, "Domain window latmin,latmax,lonmin,lonmax");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "Generate the synthetic dataset into <out>/dataset"},
        {"elbow", "Cluster diagnostics over k_range -> elbow.csv"},
        {"cluster", "Fit k-means -> model.json, transitions.csv, labels.csv"},
        {"simulate", "One flow simulation per cluster representative -> results/"},
        {"aggregate", "Simple and complex long-term predictions -> predictions/"},
        {"validate", "Oracle comparison -> report.json, validation/"},
        {"run", "All stages in order"}};
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    const fs::path out(o.out);
    auto log = logger();
    try {
        if (o.threads) {
            set_max_threads(*o.threads);
        }
        if (cmd == "synth") {
            cmd_synth(o, out);
            return ok;
        }
        const RunConfig c = load_config(o);
        if (cmd == "elbow") {
            cmd_elbow(c, out);
        } else if (cmd == "cluster") {
            cmd_cluster(c, out);
        } else if (cmd == "simulate") {
            cmd_simulate(c, out);
        } else if (cmd == "aggregate") {
            cmd_aggregate(c, out);
        } else if (cmd == "validate") {
            cmd_validate(c, out);
        } else {
            cmd_run(o, c, out);
        }
        return ok;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const DependencyError& e) {
        std::cerr << "dependency error: " << e.what() << "\n";
        return dependency_error;
    } catch (const IoError& e) {
        std::cerr << "dependency error: " << e.what() << "\n";
        return dependency_error;
    } catch (const Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return validation_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
}

} // namespace windregime::cli
