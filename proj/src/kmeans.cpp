#include "windregime/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "windregime/error.hpp"
#include "windregime/parallel.hpp"

using nlohmann::json;

namespace windregime {

namespace {

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct RunResult {
    std::vector<double> centroids; // k x d
    std::vector<int> labels;
    double inertia = 0.0;
    std::vector<double> history;
    std::size_t iterations = 0;
};

std::vector<double> kmeanspp_init(const FeatureMatrix& x, std::size_t k, std::mt19937_64& rng)
{
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    std::vector<double> centroids;
    centroids.reserve(k * d);
    std::vector<bool> chosen(n, false);

    auto pick = [&](std::size_t i) {
        chosen[i] = true;
        const auto r = x.row(i);
        centroids.insert(centroids.end(), r.begin(), r.end());
    };

    pick(std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)), n - 1));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        const std::span<const double> last(centroids.data() + (c - 1) * d, d);
        parallel_for(n, [&](std::size_t i) { nearest[i] = std::min(nearest[i], squared_distance(x.row(i), last)); });
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += nearest[i];
        }
        std::size_t next = n;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += nearest[i];
                if (nearest[i] > 0.0 && acc > target) {
                    next = i;
                    break;
                }
            }
            if (next == n) {
                // Rounding pushed the target past the last positive weight.
                for (std::size_t i = n; i-- > 0;) {
                    if (nearest[i] > 0.0) {
                        next = i;
                        break;
                    }
                }
            }
        } else {
            // Every point coincides with a chosen center; pick any unchosen one.
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    free.push_back(i);
                }
            }
            next = free[std::min(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(free.size())),
                                 free.size() - 1)];
        }
        pick(next);
    }
    return centroids;
}

RunResult lloyd(const FeatureMatrix& x, const KMeansOptions& opt, std::mt19937_64& rng)
{
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    const std::size_t k = opt.k;

    RunResult run;
    run.centroids = kmeanspp_init(x, k, rng);
    run.labels.assign(n, -1);
    std::vector<int> labels(n, 0);
    std::vector<double> dist(n, 0.0);
    std::vector<int> previous;
    // Lower bound on the distance from each point to its second-nearest
    // centroid. A point whose own centroid is strictly closer keeps its label
    // without a full scan; 0 forces a scan.
    std::vector<double> lower(n, 0.0);
    std::vector<double> old_centroids;

    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        parallel_for(n, [&](std::size_t i) {
            if (it > 1 && lower[i] > 0.0) {
                const auto own = static_cast<std::size_t>(labels[i]);
                const double dd = squared_distance(x.row(i), {run.centroids.data() + own * d, d});
                if (std::sqrt(dd) < lower[i] * (1.0 - 1e-12)) {
                    dist[i] = dd;
                    return;
                }
            }
            double best = std::numeric_limits<double>::infinity();
            double second = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double dd = squared_distance(x.row(i), {run.centroids.data() + c * d, d});
                if (dd < best) {
                    second = best;
                    best = dd;
                    arg = static_cast<int>(c);
                } else if (dd < second) {
                    second = dd;
                }
            }
            labels[i] = arg;
            dist[i] = best;
            lower[i] = std::sqrt(second);
        });
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            inertia += dist[i];
        }
        run.history.push_back(inertia);
        run.iterations = it;
        run.labels = labels;
        run.inertia = inertia;

        if (labels == previous || inertia == 0.0) {
            break;
        }
        if (run.history.size() >= 2) {
            const double prev = run.history[run.history.size() - 2];
            if (prev > 0.0 && (prev - inertia) / prev < opt.tol) {
                break;
            }
        }
        if (it == opt.max_iter) {
            break;
        }

        std::vector<std::size_t> counts(k, 0);
        for (int l : labels) {
            ++counts[static_cast<std::size_t>(l)];
        }
        // Empty clusters take the point farthest from its centroid.
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) {
                continue;
            }
            std::size_t far = n;
            double far_dist = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(labels[i])] > 1 && dist[i] > far_dist) {
                    far = i;
                    far_dist = dist[i];
                }
            }
            --counts[static_cast<std::size_t>(labels[far])];
            labels[far] = static_cast<int>(c);
            counts[c] = 1;
            dist[far] = 0.0;
            lower[far] = 0.0;
        }
        old_centroids = run.centroids;
        std::fill(run.centroids.begin(), run.centroids.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double* dst = run.centroids.data() + static_cast<std::size_t>(labels[i]) * d;
            const auto r = x.row(i);
            for (std::size_t j = 0; j < d; ++j) {
                dst[j] += r[j];
            }
        }
        for (std::size_t c = 0; c < k; ++c) {
            const double inv = 1.0 / static_cast<double>(counts[c]);
            for (std::size_t j = 0; j < d; ++j) {
                run.centroids[c * d + j] *= inv;
            }
        }
        double max_shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            max_shift = std::max(max_shift, std::sqrt(squared_distance({old_centroids.data() + c * d, d},
                                                                       {run.centroids.data() + c * d, d})));
        }
        for (double& l : lower) {
            l = std::max(0.0, l - max_shift);
        }
        previous = labels;
    }

    // Ties (duplicate points) can leave a cluster empty after the last
    // assignment. Hand it the farthest point of a shared cluster and refit.
    std::vector<std::size_t> counts(k, 0);
    for (int l : run.labels) {
        ++counts[static_cast<std::size_t>(l)];
    }
    if (std::find(counts.begin(), counts.end(), std::size_t{0}) == counts.end()) {
        return run;
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] != 0) {
            continue;
        }
        std::size_t far = n;
        double far_dist = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto l = static_cast<std::size_t>(run.labels[i]);
            if (counts[l] > 1) {
                const double dd = squared_distance(x.row(i), {run.centroids.data() + l * d, d});
                if (dd > far_dist) {
                    far = i;
                    far_dist = dd;
                }
            }
        }
        --counts[static_cast<std::size_t>(run.labels[far])];
        run.labels[far] = static_cast<int>(c);
        counts[c] = 1;
    }
    std::fill(run.centroids.begin(), run.centroids.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = x.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            run.centroids[static_cast<std::size_t>(run.labels[i]) * d + j] += r[j];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            run.centroids[c * d + j] /= static_cast<double>(counts[c]);
        }
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        inertia += squared_distance(x.row(i), {run.centroids.data() + static_cast<std::size_t>(run.labels[i]) * d, d});
    }
    run.inertia = inertia;
    run.history.push_back(inertia);
    return run;
}

} // namespace

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data))
{
    if (data_.size() != rows_ * cols_) {
        throw ValidationError("feature matrix data size does not match rows x cols");
    }
}

FeatureMatrix dataset_features(const WeatherDataset& ds, std::span<const std::string> channels)
{
    if (channels.empty()) {
        throw ValidationError("at least one clustering channel is required");
    }
    std::vector<std::size_t> idx;
    for (const auto& name : channels) {
        idx.push_back(ds.channel_index(name));
    }
    const std::size_t cells = ds.grid().cells();
    FeatureMatrix x(ds.size(), channels.size() * cells);
    for (std::size_t t = 0; t < ds.size(); ++t) {
        auto row = x.row(t);
        for (std::size_t c = 0; c < idx.size(); ++c) {
            const auto values = ds.channel(t, idx[c]);
            std::copy(values.begin(), values.end(), row.begin() + static_cast<std::ptrdiff_t>(c * cells));
        }
    }
    return x;
}

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    // Four fixed lanes so the compiler can vectorize without reassociating.
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n = a.size();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        for (std::size_t l = 0; l < 4; ++l) {
            const double diff = a[j + l] - b[j + l];
            lane[l] += diff * diff;
        }
    }
    for (; j < n; ++j) {
        const double diff = a[j] - b[j];
        lane[0] += diff * diff;
    }
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

ClusterModel kmeans_fit(const FeatureMatrix& features, const KMeansOptions& options)
{
    if (features.rows() == 0 || features.cols() == 0) {
        throw ValidationError("cannot cluster an empty dataset");
    }
    if (options.k < 1) {
        throw ValidationError("k must be at least 1");
    }
    if (options.k > features.rows()) {
        throw ValidationError("k = " + std::to_string(options.k) + " exceeds the " +
                              std::to_string(features.rows()) + " datapoints");
    }
    if (options.max_iter < 1 || !(options.tol >= 0.0) || options.n_init < 1) {
        throw ValidationError("max_iter and n_init must be >= 1 and tol >= 0");
    }

    std::mt19937_64 master(options.seed);
    ClusterModel model;
    RunResult best;
    bool have_best = false;
    for (std::size_t r = 0; r < options.n_init; ++r) {
        std::mt19937_64 rng(master());
        RunResult run = lloyd(features, options, rng);
        model.restart_histories.push_back(run.history);
        if (!have_best || run.inertia < best.inertia) {
            best = std::move(run);
            have_best = true;
        }
    }

    const std::size_t d = features.cols();
    model.k = options.k;
    model.seed = options.seed;
    model.inertia = best.inertia;
    model.iterations_run = best.iterations;
    model.inertia_history = best.history;
    model.labels = best.labels;
    model.counts.assign(options.k, 0);
    for (int l : model.labels) {
        ++model.counts[static_cast<std::size_t>(l)];
    }
    for (std::size_t c = 0; c < options.k; ++c) {
        model.centroids.emplace_back(best.centroids.begin() + static_cast<std::ptrdiff_t>(c * d),
                                     best.centroids.begin() + static_cast<std::ptrdiff_t>((c + 1) * d));
    }
    model.representative_idx = nearest_datapoint(model, features);
    return model;
}

ClusterModel kmeans_fit(const WeatherDataset& ds, std::span<const std::string> channels, const KMeansOptions& options)
{
    ClusterModel model = kmeans_fit(dataset_features(ds, channels), options);
    model.channels.assign(channels.begin(), channels.end());
    return model;
}

std::vector<std::size_t> nearest_datapoint(const ClusterModel& model, const FeatureMatrix& features)
{
    if (model.labels.size() != features.rows()) {
        throw ValidationError("model labels do not match the number of datapoints");
    }
    std::vector<std::size_t> rep(model.k, features.rows());
    std::vector<double> best(model.k, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        const auto c = static_cast<std::size_t>(model.labels[i]);
        const double dd = squared_distance(features.row(i), model.centroids[c]);
        if (dd < best[c]) {
            best[c] = dd;
            rep[c] = i;
        }
    }
    for (std::size_t c = 0; c < model.k; ++c) {
        if (rep[c] == features.rows()) {
            throw ValidationError("cluster " + std::to_string(c) + " has no members");
        }
    }
    return rep;
}

std::vector<std::size_t> nearest_datapoint(const ClusterModel& model, const WeatherDataset& ds)
{
    return nearest_datapoint(model, dataset_features(ds, model.channels));
}

std::vector<int> assign_labels(const ClusterModel& model, const FeatureMatrix& features)
{
    std::vector<int> labels(features.rows(), 0);
    parallel_for(features.rows(), [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < model.k; ++c) {
            const double dd = squared_distance(features.row(i), model.centroids[c]);
            if (dd < best) {
                best = dd;
                labels[i] = static_cast<int>(c);
            }
        }
    });
    return labels;
}

json cluster_model_to_json(const ClusterModel& m)
{
    return json{{"k", m.k},
                {"seed", m.seed},
                {"channels", m.channels},
                {"inertia", m.inertia},
                {"iterations_run", m.iterations_run},
                {"inertia_history", m.inertia_history},
                {"labels", m.labels},
                {"counts", m.counts},
                {"representative_idx", m.representative_idx},
                {"centroids", m.centroids}};
}

ClusterModel cluster_model_from_json(const json& j)
{
    try {
        ClusterModel m;
        m.k = j.at("k").get<std::size_t>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.channels = j.at("channels").get<std::vector<std::string>>();
        m.inertia = j.at("inertia").get<double>();
        m.iterations_run = j.at("iterations_run").get<std::size_t>();
        m.inertia_history = j.value("inertia_history", std::vector<double>{});
        m.labels = j.at("labels").get<std::vector<int>>();
        m.counts = j.at("counts").get<std::vector<std::size_t>>();
        m.representative_idx = j.at("representative_idx").get<std::vector<std::size_t>>();
        m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
        if (m.centroids.size() != m.k || m.counts.size() != m.k || m.representative_idx.size() != m.k) {
            throw ValidationError("cluster model arrays do not match k");
        }
        for (int l : m.labels) {
            if (l < 0 || static_cast<std::size_t>(l) >= m.k) {
                throw ValidationError("cluster model label out of range");
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid cluster model: ") + e.what());
    }
}

} // namespace windregime
