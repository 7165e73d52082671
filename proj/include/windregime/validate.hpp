#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "windregime/aggregate.hpp"

namespace windregime {

/// Every day of a period simulated individually; the brute-force reference.
struct OracleResult {
    std::size_t first = 0;          ///< dataset index of the first day
    std::vector<WakeResult> days;
    double total_power = 0.0;       ///< W * days
    std::size_t solver_runs = 0;

    std::size_t size() const { return days.size(); }
};

/// One solver run per day of [first, last). Days run in parallel; results
/// are stored by day so the outcome is thread-count independent.
OracleResult run_oracle(const WeatherDataset& ds, const FarmSpec& farm, const FlowSolver& solver, std::size_t first,
                        std::size_t last);

/// Mean oracle wake over the days carrying each label (zero raster when none).
std::vector<Raster> oracle_cluster_means(const OracleResult& oracle, std::span<const int> period_labels,
                                         std::size_t k);
Raster oracle_mean_wake(const OracleResult& oracle);

/// Sum over days of n_turbines * power_curve(farm-center speed); no wakes.
double power_curve_baseline(const WeatherDataset& ds, const FarmSpec& farm, std::size_t first, std::size_t last,
                            CenterSampling sampling = CenterSampling::nearest_cell);

struct DistributionSummary {
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double stddev = 0.0;

    double iqr_half_width() const { return 0.5 * (q75 - q25); }
};

DistributionSummary summarize(std::vector<double> values);

struct RandomBenchmark {
    std::vector<double> estimates; ///< W * days, one per draw
    DistributionSummary summary;
};

/// Each draw picks sample_size distinct days and scales their summed oracle
/// power by days / sample_size. Uses only cached oracle results.
RandomBenchmark random_sample_benchmark(const OracleResult& oracle, std::size_t n_draws, std::size_t sample_size,
                                        std::uint64_t seed);

struct ClusterWakeMetrics {
    std::size_t cluster = 0;
    std::size_t count = 0;
    double mae = 0.0;                 ///< m/s
    double correlation = 0.0;
    bool correlation_defined = true;  ///< false when a raster has zero variance (correlation then 0)
};

struct ValidationReport {
    std::string method;
    std::optional<double> predicted_power;
    double oracle_power = 0.0;
    std::optional<double> abs_error;
    std::optional<double> rel_error;
    std::vector<ClusterWakeMetrics> clusters;
    std::optional<ClusterWakeMetrics> overall;
    std::size_t cluster_runs = 0;
    std::size_t oracle_runs = 0;
    std::optional<DistributionSummary> random_benchmark;
    std::optional<double> power_curve_baseline;
};

/// Scores a prediction against the oracle. period_labels label each oracle
/// day. Throws ValidationError when grids differ.
ValidationReport compare(const LongTermPrediction& prediction, const OracleResult& oracle,
                         std::span<const int> period_labels);

/// Pearson and MAE between two rasters on one grid.
ClusterWakeMetrics raster_metrics(const Raster& predicted, const Raster& reference);

nlohmann::json report_to_json(const ValidationReport& report);

/// Minimal-total-distance assignment of clusters of A onto clusters of B by
/// exhaustive search over permutations (k <= 10).
struct ClusterMatching {
    std::vector<std::size_t> permutation; ///< A cluster a corresponds to B cluster permutation[a]
    std::vector<double> cost;             ///< k x k centroid distances, row = A
    double total_cost = 0.0;
};
ClusterMatching match_clusters(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

struct FeedbackReport {
    ClusterModel without_farm;
    ClusterModel with_farm;
    ClusterMatching matching;
    std::size_t label_changes = 0;
    std::vector<std::size_t> changed_days;  ///< indices within the period
    /// Speed of each matched with-farm centroid minus the farm-free one, per without-farm cluster.
    std::vector<Raster> centroid_difference;
};

/// Clusters two datasets with identical options and counts days whose matched
/// label differs. Both datasets must hold u100/v100 on one grid and times.
FeedbackReport compare_clusterings(const WeatherDataset& without_farm, const WeatherDataset& with_farm,
                                   const KMeansOptions& options);

/// Farm-free and waked wind for the oracle period: the waked speed is the
/// free speed minus the oracle deficit, direction unchanged.
std::pair<WeatherDataset, WeatherDataset> feedback_datasets(const WeatherDataset& ds, const OracleResult& oracle);

FeedbackReport farm_feedback_recluster(const WeatherDataset& ds, const OracleResult& oracle,
                                       const KMeansOptions& options);
FeedbackReport farm_feedback_recluster(const WeatherDataset& ds, const FarmSpec& farm, const FlowSolver& solver,
                                       std::size_t first, std::size_t last, const KMeansOptions& options);

nlohmann::json feedback_to_json(const FeedbackReport& report);

} // namespace windregime
