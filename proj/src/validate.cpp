#include "windregime/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "windregime/diagnostics.hpp"
#include "windregime/error.hpp"
#include "windregime/parallel.hpp"

using nlohmann::json;

namespace windregime {

namespace {

double quantile(const std::vector<double>& sorted, double q)
{
    // Linear interpolation between order statistics.
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double f = pos - static_cast<double>(lo);
    return sorted[lo] + f * (sorted[hi] - sorted[lo]);
}

json metrics_json(const ClusterWakeMetrics& m)
{
    return json{{"cluster", m.cluster},
                {"count", m.count},
                {"mae_m_s", m.mae},
                {"correlation", m.correlation},
                {"correlation_defined", m.correlation_defined}};
}

json summary_json(const DistributionSummary& s)
{
    return json{{"min", s.min},   {"q25", s.q25},   {"median", s.median}, {"q75", s.q75},
                {"max", s.max},   {"mean", s.mean}, {"stddev", s.stddev}};
}

} // namespace

OracleResult run_oracle(const WeatherDataset& ds, const FarmSpec& farm, const FlowSolver& solver, std::size_t first,
                        std::size_t last)
{
    if (first >= last || last > ds.size()) {
        throw RangeError("oracle period outside the dataset");
    }
    OracleResult oracle;
    oracle.first = first;
    std::vector<std::optional<WakeResult>> days(last - first);
    parallel_for(days.size(), [&](std::size_t d) { days[d] = simulate_day(ds, first + d, farm, solver); });
    for (auto& d : days) {
        oracle.total_power += d->farm_power;
        oracle.days.push_back(std::move(*d));
    }
    oracle.solver_runs = oracle.days.size();
    return oracle;
}

std::vector<Raster> oracle_cluster_means(const OracleResult& oracle, std::span<const int> period_labels, std::size_t k)
{
    if (period_labels.size() != oracle.size()) {
        throw ValidationError("period labels do not match the oracle days");
    }
    const GridSpec& grid = oracle.days.front().deficit.grid();
    std::vector<Raster> means(k, Raster::zeros(grid));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t d = 0; d < oracle.size(); ++d) {
        const auto c = static_cast<std::size_t>(period_labels[d]);
        if (c >= k) {
            throw ValidationError("period label out of range");
        }
        const auto values = oracle.days[d].deficit.channel(0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            means[c].values[i] += values[i];
        }
        ++counts[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) {
            for (double& v : means[c].values) {
                v /= static_cast<double>(counts[c]);
            }
        }
    }
    return means;
}

Raster oracle_mean_wake(const OracleResult& oracle)
{
    const std::vector<int> zeros(oracle.size(), 0);
    return oracle_cluster_means(oracle, zeros, 1).front();
}

double power_curve_baseline(const WeatherDataset& ds, const FarmSpec& farm, std::size_t first, std::size_t last,
                            CenterSampling sampling)
{
    if (first >= last || last > ds.size()) {
        throw RangeError("baseline period outside the dataset");
    }
    const double n = static_cast<double>(farm.turbines.size());
    double total = 0.0;
    for (std::size_t t = first; t < last; ++t) {
        total += n * power_curve(farm.turbine, farm_center_wind(ds, t, farm.farm_center, sampling).speed);
    }
    return total;
}

DistributionSummary summarize(std::vector<double> values)
{
    if (values.empty()) {
        throw ValidationError("cannot summarize an empty distribution");
    }
    std::sort(values.begin(), values.end());
    DistributionSummary s;
    s.min = values.front();
    s.max = values.back();
    s.q25 = quantile(values, 0.25);
    s.median = quantile(values, 0.5);
    s.q75 = quantile(values, 0.75);
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    return s;
}

RandomBenchmark random_sample_benchmark(const OracleResult& oracle, std::size_t n_draws, std::size_t sample_size,
                                        std::uint64_t seed)
{
    const std::size_t days = oracle.size();
    if (sample_size < 1 || sample_size > days) {
        throw ValidationError("sample_size must lie in [1, days in period]");
    }
    if (n_draws < 1) {
        throw ValidationError("n_draws must be at least 1");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(days);
    RandomBenchmark bench;
    bench.estimates.reserve(n_draws);
    const double scale = static_cast<double>(days) / static_cast<double>(sample_size);
    for (std::size_t draw = 0; draw < n_draws; ++draw) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        // Partial Fisher-Yates: the first sample_size entries are a uniform draw without replacement.
        double sum = 0.0;
        for (std::size_t s = 0; s < sample_size; ++s) {
            const std::size_t remaining = days - s;
            const auto pick = s + static_cast<std::size_t>(
                                      static_cast<double>(rng() >> 11) * 0x1.0p-53 * static_cast<double>(remaining));
            std::swap(idx[s], idx[std::min(pick, days - 1)]);
            sum += oracle.days[idx[s]].farm_power;
        }
        bench.estimates.push_back(scale * sum);
    }
    bench.summary = summarize(bench.estimates);
    return bench;
}

ClusterWakeMetrics raster_metrics(const Raster& predicted, const Raster& reference)
{
    if (!(predicted.grid == reference.grid)) {
        throw ValidationError("raster grids differ");
    }
    ClusterWakeMetrics m;
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < predicted.values.size(); ++i) {
        abs_sum += std::abs(predicted.values[i] - reference.values[i]);
    }
    m.mae = abs_sum / static_cast<double>(predicted.values.size());
    const auto r = pearson(predicted.values, reference.values);
    m.correlation_defined = r.has_value();
    m.correlation = r.value_or(0.0);
    return m;
}

ValidationReport compare(const LongTermPrediction& prediction, const OracleResult& oracle,
                         std::span<const int> period_labels)
{
    if (oracle.size() == 0) {
        throw ValidationError("oracle holds no days");
    }
    ValidationReport report;
    report.method = to_string(prediction.method);
    report.oracle_power = oracle.total_power;
    report.oracle_runs = oracle.solver_runs;
    report.cluster_runs = prediction.counts.size();
    if (prediction.power) {
        report.predicted_power = prediction.power->total_power;
        report.abs_error = std::abs(*report.predicted_power - oracle.total_power);
        report.rel_error = oracle.total_power != 0.0 ? *report.abs_error / std::abs(oracle.total_power)
                                                      : (*report.abs_error == 0.0 ? 0.0 : INFINITY);
    }
    if (prediction.wake) {
        const std::size_t k = prediction.wake->per_cluster_mean.size();
        const auto means = oracle_cluster_means(oracle, period_labels, k);
        if (!(means.front().grid == prediction.wake->mean_wake.grid)) {
            throw ValidationError("prediction and oracle grids differ");
        }
        for (std::size_t c = 0; c < k; ++c) {
            ClusterWakeMetrics m = raster_metrics(prediction.wake->per_cluster_mean[c], means[c]);
            m.cluster = c;
            m.count = c < prediction.counts.size() ? prediction.counts[c] : 0;
            report.clusters.push_back(m);
        }
        ClusterWakeMetrics overall = raster_metrics(prediction.wake->mean_wake, oracle_mean_wake(oracle));
        overall.count = oracle.size();
        report.overall = overall;
    }
    return report;
}

json report_to_json(const ValidationReport& r)
{
    json clusters = json::array();
    for (const auto& m : r.clusters) {
        clusters.push_back(metrics_json(m));
    }
    json j{{"method", r.method},
           {"oracle_power_w_days", r.oracle_power},
           {"cluster_runs", r.cluster_runs},
           {"oracle_runs", r.oracle_runs},
           {"clusters", clusters}};
    if (r.predicted_power) {
        j["predicted_power_w_days"] = *r.predicted_power;
        j["abs_error_w_days"] = *r.abs_error;
        j["rel_error"] = *r.rel_error;
    }
    if (r.overall) {
        j["overall"] = metrics_json(*r.overall);
    }
    if (r.random_benchmark) {
        j["random_benchmark"] = summary_json(*r.random_benchmark);
    }
    if (r.power_curve_baseline) {
        j["power_curve_baseline_w_days"] = *r.power_curve_baseline;
    }
    return j;
}

ClusterMatching match_clusters(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b)
{
    const std::size_t k = a.size();
    if (b.size() != k || k == 0) {
        throw ValidationError("cluster sets must have the same non-zero size");
    }
    if (k > 10) {
        throw ValidationError("exhaustive cluster matching supports k <= 10");
    }
    ClusterMatching m;
    m.cost.resize(k * k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            m.cost[i * k + j] = std::sqrt(squared_distance(a[i], b[j]));
        }
    }
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    m.total_cost = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            total += m.cost[i * k + perm[i]];
        }
        if (total < m.total_cost) {
            m.total_cost = total;
            m.permutation = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return m;
}

FeedbackReport compare_clusterings(const WeatherDataset& without_farm, const WeatherDataset& with_farm,
                                   const KMeansOptions& options)
{
    if (!(without_farm.grid() == with_farm.grid()) || without_farm.times() != with_farm.times()) {
        throw ValidationError("feedback datasets must share grid and times");
    }
    const std::vector<std::string> channels{std::string(kChannelU), std::string(kChannelV)};
    FeedbackReport r;
    r.without_farm = kmeans_fit(without_farm, channels, options);
    r.with_farm = kmeans_fit(with_farm, channels, options);
    r.matching = match_clusters(r.without_farm.centroids, r.with_farm.centroids);
    for (std::size_t d = 0; d < without_farm.size(); ++d) {
        const auto a = static_cast<std::size_t>(r.without_farm.labels[d]);
        if (r.matching.permutation[a] != static_cast<std::size_t>(r.with_farm.labels[d])) {
            r.changed_days.push_back(d);
        }
    }
    r.label_changes = r.changed_days.size();

    const GridSpec& grid = without_farm.grid();
    const std::size_t cells = grid.cells();
    for (std::size_t a = 0; a < options.k; ++a) {
        const auto& ca = r.without_farm.centroids[a];
        const auto& cb = r.with_farm.centroids[r.matching.permutation[a]];
        Raster diff = Raster::zeros(grid);
        for (std::size_t c = 0; c < cells; ++c) {
            diff.values[c] = std::hypot(cb[c], cb[cells + c]) - std::hypot(ca[c], ca[cells + c]);
        }
        r.centroid_difference.push_back(std::move(diff));
    }
    return r;
}

std::pair<WeatherDataset, WeatherDataset> feedback_datasets(const WeatherDataset& ds, const OracleResult& oracle)
{
    if (oracle.first + oracle.size() > ds.size()) {
        throw RangeError("oracle period outside the dataset");
    }
    const std::size_t cells = ds.grid().cells();
    std::vector<float> free_data, waked_data;
    std::vector<Timestamp> times;
    for (std::size_t d = 0; d < oracle.size(); ++d) {
        const std::size_t t = oracle.first + d;
        const auto u = ds.channel(t, kChannelU);
        const auto v = ds.channel(t, kChannelV);
        const auto deficit = oracle.days[d].deficit.channel(0);
        if (deficit.size() != cells) {
            throw ValidationError("oracle deficit grid does not match the dataset");
        }
        free_data.insert(free_data.end(), u.begin(), u.end());
        free_data.insert(free_data.end(), v.begin(), v.end());
        std::vector<float> wu(cells), wv(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            const double speed = std::hypot(static_cast<double>(u[c]), static_cast<double>(v[c]));
            const double scale = speed > 0.0 ? std::max(0.0, speed - deficit[c]) / speed : 0.0;
            wu[c] = static_cast<float>(u[c] * scale);
            wv[c] = static_cast<float>(v[c] * scale);
        }
        waked_data.insert(waked_data.end(), wu.begin(), wu.end());
        waked_data.insert(waked_data.end(), wv.begin(), wv.end());
        times.push_back(ds.times()[t]);
    }
    const std::vector<ChannelInfo> channels{ds.channels()[ds.channel_index(kChannelU)],
                                            ds.channels()[ds.channel_index(kChannelV)]};
    return {WeatherDataset(ds.grid(), times, channels, std::move(free_data)),
            WeatherDataset(ds.grid(), times, channels, std::move(waked_data))};
}

FeedbackReport farm_feedback_recluster(const WeatherDataset& ds, const OracleResult& oracle,
                                       const KMeansOptions& options)
{
    const auto [without_farm, with_farm] = feedback_datasets(ds, oracle);
    return compare_clusterings(without_farm, with_farm, options);
}

FeedbackReport farm_feedback_recluster(const WeatherDataset& ds, const FarmSpec& farm, const FlowSolver& solver,
                                       std::size_t first, std::size_t last, const KMeansOptions& options)
{
    return farm_feedback_recluster(ds, run_oracle(ds, farm, solver, first, last), options);
}

json feedback_to_json(const FeedbackReport& r)
{
    return json{{"label_changes", r.label_changes},
                {"changed_days", r.changed_days},
                {"permutation", r.matching.permutation},
                {"matching_cost", r.matching.total_cost},
                {"cost_matrix", r.matching.cost},
                {"counts_without_farm", r.without_farm.counts},
                {"counts_with_farm", r.with_farm.counts}};
}

} // namespace windregime
