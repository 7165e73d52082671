#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "windregime/aggregate.hpp"
#include "windregime/diagnostics.hpp"
#include "windregime/synthetic.hpp"
#include "windregime/validate.hpp"

namespace windregime {

/// A synthetic dataset recipe: generator parameters, grid and length.
struct SyntheticScenario {
    SyntheticRegimeSpec spec;
    GridSpec grid;
    std::size_t n_days = 365;
};

/// Accepts either {"synthetic": {...}, "grid": {...}, "n_days": N} or a bare
/// generator spec with "grid" and "n_days" beside "regimes".
SyntheticScenario synthetic_scenario_from_json(const nlohmann::json& j);

enum class SolverKind { jensen, external };

struct RunConfig {
    std::optional<std::filesystem::path> dataset;   ///< existing dataset; otherwise <out>/dataset
    std::optional<SyntheticScenario> synthetic;
    std::vector<std::string> channels{"u100", "v100"};
    std::optional<std::array<double, 4>> window;     ///< lat_min, lat_max, lon_min, lon_max
    std::size_t k = 6;
    std::uint64_t seed = 0;
    std::size_t n_init = 10;
    std::size_t max_iter = 300;
    double tol = 1e-6;
    std::vector<std::size_t> k_range{2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::optional<FarmSpec> farm;                    ///< default: 10 x 10 farm at the domain center
    SolverKind solver = SolverKind::jensen;
    JensenOptions jensen;
    std::optional<std::filesystem::path> external_results;
    std::optional<Timestamp> validation_start;       ///< inclusive
    std::optional<Timestamp> validation_end;         ///< exclusive
    CenterSampling sampling = CenterSampling::nearest_cell;
    std::size_t random_draws = 365;
    std::size_t random_sample_size = 6;
    bool feedback = true;

    KMeansOptions kmeans_options() const { return {k, seed, max_iter, tol, n_init}; }
    void validate() const;
};

/// Relative paths are resolved against base_dir. Throws ValidationError.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json run_config_to_json(const RunConfig& config);

/// The configured dataset (read, or generated when no path is given) with the
/// domain window applied.
WeatherDataset load_dataset(const RunConfig& config, const std::filesystem::path& out_dir);
FarmSpec resolve_farm(const RunConfig& config, const GridSpec& grid);
/// [first, last) time indices of the validation period.
std::pair<std::size_t, std::size_t> validation_period(const RunConfig& config, const WeatherDataset& ds);

/// Builds the configured solver. The external solver reads
/// <external_results>/<YYYY-MM-DDTHH-MM-SSZ>/ directories.
std::unique_ptr<FlowSolver> make_solver(const RunConfig& config);
std::string external_result_dirname(Timestamp t);

/// Everything the cluster-based workflow produces: one model, k solver runs,
/// both aggregations over the validation period.
struct PipelineResult {
    ClusterModel model;
    TransitionMatrix transitions;
    std::vector<WakeResult> cluster_results;
    std::size_t solver_runs = 0;
    AggregationInputs inputs;
    LongTermPrediction simple;
    LongTermPrediction complex;
    double seconds = 0.0;
};

PipelineResult run_cluster_pipeline(const WeatherDataset& ds, const RunConfig& config, const FarmSpec& farm,
                                    const FlowSolver& solver);

/// Oracle run plus the reports for both aggregations, the random-sampling
/// benchmark and the power-curve baseline.
struct ValidationOutcome {
    OracleResult oracle;
    double oracle_seconds = 0.0;
    ValidationReport simple;
    ValidationReport complex;
    RandomBenchmark random;
    double power_curve_total = 0.0;
    std::optional<FeedbackReport> feedback;
};

ValidationOutcome run_validation(const WeatherDataset& ds, const RunConfig& config, const FarmSpec& farm,
                                 const FlowSolver& solver, const PipelineResult& pipeline);

} // namespace windregime
