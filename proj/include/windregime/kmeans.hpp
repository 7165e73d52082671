#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "windregime/field.hpp"

namespace windregime {

/// Dense row-major n x d matrix of feature vectors, one row per datapoint.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Rows are field_vectorize(ds.field(t), channels) for every time t.
FeatureMatrix dataset_features(const WeatherDataset& ds, std::span<const std::string> channels);

double squared_distance(std::span<const double> a, std::span<const double> b);

struct KMeansOptions {
    std::size_t k = 6;
    std::uint64_t seed = 0;
    std::size_t max_iter = 300;
    double tol = 1e-6;      ///< relative inertia decrease that ends a run
    std::size_t n_init = 10; ///< k-means++ restarts; the lowest inertia wins
};

struct ClusterModel {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> channels;
    std::vector<std::vector<double>> centroids;
    std::vector<int> labels;
    std::vector<std::size_t> counts;
    std::vector<std::size_t> representative_idx;
    double inertia = 0.0;
    std::size_t iterations_run = 0;
    /// Inertia after every assignment step of the winning restart.
    std::vector<double> inertia_history;
    /// The same trace for every restart, in restart order.
    std::vector<std::vector<double>> restart_histories;
};

/// Lloyd iterations from k-means++ seeding. Throws ValidationError for
/// k < 1, k > n or an empty matrix.
ClusterModel kmeans_fit(const FeatureMatrix& features, const KMeansOptions& options);
ClusterModel kmeans_fit(const WeatherDataset& ds, std::span<const std::string> channels, const KMeansOptions& options);

/// Per cluster, the member closest to its centroid (ties: lowest index).
std::vector<std::size_t> nearest_datapoint(const ClusterModel& model, const FeatureMatrix& features);
std::vector<std::size_t> nearest_datapoint(const ClusterModel& model, const WeatherDataset& ds);

/// Nearest-centroid labels for arbitrary feature rows (ties: lowest cluster).
std::vector<int> assign_labels(const ClusterModel& model, const FeatureMatrix& features);

nlohmann::json cluster_model_to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const nlohmann::json& j);

} // namespace windregime
