#include "windregime/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "windregime/error.hpp"
#include "windregime/parallel.hpp"

namespace windregime {

namespace {

/// Symmetric n x n matrix of pairwise Euclidean distances.
std::vector<double> pairwise_distances(const FeatureMatrix& x)
{
    const std::size_t n = x.rows();
    std::vector<double> dist(n * n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[i * n + j] = std::sqrt(squared_distance(x.row(i), x.row(j)));
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            dist[j * n + i] = dist[i * n + j];
        }
    }
    return dist;
}

/// Mean-centered, unit-norm copies of each row; zero rows flag no variance.
FeatureMatrix normalized_rows(const FeatureMatrix& x, std::vector<bool>& has_variance)
{
    FeatureMatrix out(x.rows(), x.cols());
    has_variance.assign(x.rows(), false);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto r = x.row(i);
        double mean = 0.0;
        for (double v : r) {
            mean += v;
        }
        mean /= static_cast<double>(r.size());
        auto o = out.row(i);
        double norm = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) {
            o[j] = r[j] - mean;
            norm += o[j] * o[j];
        }
        if (norm > 0.0) {
            has_variance[i] = true;
            const double inv = 1.0 / std::sqrt(norm);
            for (double& v : o) {
                v *= inv;
            }
        }
    }
    return out;
}

double silhouette_from_distances(const std::vector<double>& dist, std::size_t n, std::span<const int> labels,
                                 std::size_t k)
{
    std::vector<std::size_t> counts(k, 0);
    for (int l : labels) {
        ++counts[static_cast<std::size_t>(l)];
    }
    std::vector<double> scores(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const auto own = static_cast<std::size_t>(labels[i]);
        if (counts[own] < 2) {
            scores[i] = 0.0;
            return;
        }
        std::vector<double> sums(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            sums[static_cast<std::size_t>(labels[j])] += dist[i * n + j];
        }
        const double a = sums[own] / static_cast<double>(counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c != own && counts[c] > 0) {
                b = std::min(b, sums[c] / static_cast<double>(counts[c]));
            }
        }
        const double denom = std::max(a, b);
        scores[i] = (std::isfinite(b) && denom > 0.0) ? (b - a) / denom : 0.0;
    });
    double total = 0.0;
    for (double s : scores) {
        total += s;
    }
    return total / static_cast<double>(n);
}

double correlation_from_normalized(const FeatureMatrix& z, const std::vector<bool>& has_variance,
                                   std::span<const int> labels, std::size_t k)
{
    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    double total = 0.0;
    std::size_t clusters = 0;
    for (const auto& m : members) {
        if (m.size() < 2) {
            continue;
        }
        double sum = 0.0;
        for (std::size_t a = 0; a < m.size(); ++a) {
            for (std::size_t b = a + 1; b < m.size(); ++b) {
                if (has_variance[m[a]] && has_variance[m[b]]) {
                    double dot = 0.0;
                    const auto ra = z.row(m[a]);
                    const auto rb = z.row(m[b]);
                    for (std::size_t j = 0; j < ra.size(); ++j) {
                        dot += ra[j] * rb[j];
                    }
                    sum += std::clamp(dot, -1.0, 1.0);
                }
            }
        }
        const double pairs = 0.5 * static_cast<double>(m.size()) * static_cast<double>(m.size() - 1);
        total += sum / pairs;
        ++clusters;
    }
    return clusters > 0 ? total / static_cast<double>(clusters) : 0.0;
}

} // namespace

std::optional<double> pearson(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.empty()) {
        throw ValidationError("pearson requires two non-empty vectors of equal length");
    }
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(a.size());
    mb /= static_cast<double>(b.size());
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        return std::nullopt;
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double average_centroid_distance(const FeatureMatrix& x, const ClusterModel& model)
{
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        total += std::sqrt(squared_distance(x.row(i), model.centroids[static_cast<std::size_t>(model.labels[i])]));
    }
    return total / static_cast<double>(x.rows());
}

double average_cluster_correlation(const FeatureMatrix& x, std::span<const int> labels, std::size_t k)
{
    std::vector<bool> has_variance;
    const FeatureMatrix z = normalized_rows(x, has_variance);
    return correlation_from_normalized(z, has_variance, labels, k);
}

double silhouette_score(const FeatureMatrix& x, std::span<const int> labels, std::size_t k)
{
    if (k < 2) {
        throw ValidationError("silhouette requires k >= 2");
    }
    return silhouette_from_distances(pairwise_distances(x), x.rows(), labels, k);
}

ElbowReport elbow_scan(const FeatureMatrix& x, std::span<const std::size_t> k_values, const KMeansOptions& base)
{
    // Pairwise distances and normalized rows do not depend on k.
    const std::vector<double> dist = pairwise_distances(x);
    std::vector<bool> has_variance;
    const FeatureMatrix z = normalized_rows(x, has_variance);

    ElbowReport report;
    for (const std::size_t k : k_values) {
        KMeansOptions opt = base;
        opt.k = k;
        const ClusterModel model = kmeans_fit(x, opt);
        ElbowRow row;
        row.k = k;
        row.inertia = model.inertia;
        row.avg_distance = average_centroid_distance(x, model);
        row.avg_correlation = correlation_from_normalized(z, has_variance, model.labels, k);
        if (k >= 2) {
            row.silhouette = silhouette_from_distances(dist, x.rows(), model.labels, k);
        }
        report.rows.push_back(row);
    }
    return report;
}

ElbowReport elbow_scan(const WeatherDataset& ds, std::span<const std::string> channels,
                       std::span<const std::size_t> k_values, const KMeansOptions& base)
{
    return elbow_scan(dataset_features(ds, channels), k_values, base);
}

TransitionMatrix transition_matrix(std::span<const int> labels, std::span<const Timestamp> times, std::size_t k)
{
    if (labels.size() != times.size()) {
        throw ValidationError("labels and times differ in length");
    }
    if (k < 1) {
        throw ValidationError("transition matrix needs k >= 1");
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= k) {
            throw ValidationError("label out of range for transition matrix");
        }
    }
    TransitionMatrix m;
    m.k = k;
    m.counts.assign(k * k, 0);
    m.probabilities.assign(k * k, 0.0);
    for (std::size_t t = 1; t < labels.size(); ++t) {
        if (times[t] - times[t - 1] == std::chrono::days{1}) {
            ++m.counts[static_cast<std::size_t>(labels[t - 1]) * k + static_cast<std::size_t>(labels[t])];
        }
    }
    for (std::size_t r = 0; r < k; ++r) {
        std::size_t total = 0;
        for (std::size_t c = 0; c < k; ++c) {
            total += m.counts[r * k + c];
        }
        for (std::size_t c = 0; c < k; ++c) {
            m.probabilities[r * k + c] = total > 0 ? static_cast<double>(m.counts[r * k + c]) / static_cast<double>(total)
                                                   : 1.0 / static_cast<double>(k);
        }
    }
    return m;
}

} // namespace windregime
