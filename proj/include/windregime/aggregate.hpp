#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "windregime/flow.hpp"
#include "windregime/kmeans.hpp"

namespace windregime {

/// Double-precision raster used for accumulated wake fields.
struct Raster {
    GridSpec grid;
    std::vector<double> values;

    static Raster zeros(const GridSpec& grid) { return {grid, std::vector<double>(grid.cells(), 0.0)}; }
    static Raster from_field(const GriddedField& field, std::size_t channel = 0);
    GriddedField to_field(Timestamp time, std::string name = std::string(kChannelDeficit)) const;
    double sum() const;
};

/// Rotates a raster by dtheta (counter-clockwise) about `center`: each output
/// cell takes the bilinear sample at its position rotated by -dtheta, in local
/// meters. Sources outside the grid give 0; dtheta == 0 returns the input.
Raster rotate_wake(const Raster& wake, double dtheta, GeoPoint center);
GriddedField rotate_wake(const GriddedField& wake, double dtheta, GeoPoint center);

enum class CenterSampling { nearest_cell, bilinear };

/// Farm-absent wind (speed, direction) at the farm center on day t.
WindPolar farm_center_wind(const WeatherDataset& ds, std::size_t t, GeoPoint center,
                           CenterSampling sampling = CenterSampling::nearest_cell);

struct AggregationInputs {
    std::size_t k = 0;
    std::vector<int> labels;                  ///< per datapoint being aggregated
    std::vector<WindPolar> datapoint_wind;    ///< |u_j|, theta_j per datapoint
    std::vector<WindPolar> cluster_wind;      ///< |u_i|, theta_i per cluster representative
    std::vector<WakeResult> cluster_results;  ///< one simulation per cluster
    double rated_farm_power = 0.0;            ///< W
    GeoPoint farm_center;

    /// Throws ValidationError.
    void validate() const;
    std::vector<std::size_t> counts() const;
};

/// Gathers inputs for datapoints [first, last) of ds. `labels` covers all of
/// ds; `representatives` are ds indices, one per cluster.
AggregationInputs make_aggregation_inputs(const WeatherDataset& ds, std::span<const int> labels,
                                          std::span<const std::size_t> representatives,
                                          std::vector<WakeResult> cluster_results, const FarmSpec& farm,
                                          std::size_t first, std::size_t last,
                                          CenterSampling sampling = CenterSampling::nearest_cell);

enum class AggregationMethod { simple, complex };
std::string to_string(AggregationMethod m);

struct PowerAggregate {
    double total_power = 0.0;               ///< W * days
    std::vector<double> per_cluster_power;  ///< W * days
    std::size_t capped_terms = 0;           ///< datapoint terms limited by the rated farm power
};

struct WakeAggregate {
    Raster total_wake;                      ///< sum over datapoints, m/s * days
    Raster mean_wake;                       ///< total divided by the datapoint count
    std::vector<Raster> per_cluster_total;
    std::vector<Raster> per_cluster_mean;   ///< zero raster for clusters without members
};

struct LongTermPrediction {
    AggregationMethod method = AggregationMethod::simple;
    std::vector<std::size_t> counts;
    std::optional<PowerAggregate> power;
    std::optional<WakeAggregate> wake;
    std::vector<std::string> warnings;
};

/// Occupancy-weighted sum of cluster results.
LongTermPrediction simple_sum(const AggregationInputs& inputs);
/// Per datapoint: min(|u_j| / |u_i| * P_i, rated farm power).
LongTermPrediction complex_power(const AggregationInputs& inputs);
/// Per datapoint: |u_j| / |u_i| * rotate(W_i, theta_j - theta_i).
LongTermPrediction complex_wake(const AggregationInputs& inputs);
/// complex_power and complex_wake together.
LongTermPrediction complex_sum(const AggregationInputs& inputs);

nlohmann::json prediction_summary_json(const LongTermPrediction& prediction);
/// summary.json plus mean_wake/, total_wake/ and cluster_<i>/ rasters under dir.
void write_prediction(const LongTermPrediction& prediction, const std::filesystem::path& dir, Timestamp stamp);

} // namespace windregime
