#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "windregime/kmeans.hpp"

namespace windregime {

/// Pearson product-moment correlation of two equally long vectors.
/// Returns nullopt when either vector has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

struct ElbowRow {
    std::size_t k = 0;
    double avg_distance = 0.0;
    double avg_correlation = 0.0;
    std::optional<double> silhouette; ///< undefined for k = 1
    double inertia = 0.0;
};

struct ElbowReport {
    std::vector<ElbowRow> rows;
};

/// Mean distance of points to their own centroid.
double average_centroid_distance(const FeatureMatrix& x, const ClusterModel& model);

/// Mean over clusters (with >= 2 members) of the mean pairwise Pearson
/// correlation between member vectors; zero-variance pairs count as 0.
double average_cluster_correlation(const FeatureMatrix& x, std::span<const int> labels, std::size_t k);

/// Mean silhouette (b - a) / max(a, b) over points. Points in singleton
/// clusters score 0. Requires k >= 2.
double silhouette_score(const FeatureMatrix& x, std::span<const int> labels, std::size_t k);

/// Fits k-means for every k in k_values and records the three heuristics.
ElbowReport elbow_scan(const FeatureMatrix& x, std::span<const std::size_t> k_values, const KMeansOptions& base);
ElbowReport elbow_scan(const WeatherDataset& ds, std::span<const std::string> channels,
                       std::span<const std::size_t> k_values, const KMeansOptions& base);

/// k x k row-stochastic matrix of day-to-day label transitions.
struct TransitionMatrix {
    std::size_t k = 0;
    std::vector<double> probabilities; ///< row-major
    std::vector<std::size_t> counts;   ///< raw transition counts, row-major

    double at(std::size_t from, std::size_t to) const { return probabilities[from * k + to]; }
};

/// Counts only pairs exactly one calendar day apart; rows without
/// observations are uniform. Throws ValidationError on size mismatch.
TransitionMatrix transition_matrix(std::span<const int> labels, std::span<const Timestamp> times, std::size_t k);

} // namespace windregime
