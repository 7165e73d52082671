#include "windregime/aggregate.hpp"

#include <cmath>
#include <numeric>

#include "windregime/dataset_io.hpp"
#include "windregime/error.hpp"
#include "windregime/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace windregime {

namespace {

template <typename T>
std::vector<double> rotate_values(std::span<const T> values, const GridSpec& grid, double dtheta, GeoPoint center)
{
    const LocalFrame frame(grid, center);
    const Vec2 c_idx = frame.to_index({0.0, 0.0});
    if (c_idx.x < -1e-9 || c_idx.x > static_cast<double>(grid.n_lat - 1) + 1e-9 || c_idx.y < -1e-9 ||
        c_idx.y > static_cast<double>(grid.n_lon - 1) + 1e-9) {
        throw ValidationError("rotation center lies outside the grid");
    }
    const double cs = std::cos(dtheta);
    const double sn = std::sin(dtheta);
    std::vector<double> out(grid.cells(), 0.0);
    parallel_for(grid.n_lat, [&](std::size_t i) {
        for (std::size_t j = 0; j < grid.n_lon; ++j) {
            const Vec2 p = frame.cell_position(i, j);
            const Vec2 src{cs * p.x + sn * p.y, -sn * p.x + cs * p.y};
            const Vec2 idx = frame.to_index(src);
            double sample = 0.0;
            if (bilinear_sample(values, grid, idx.x, idx.y, sample)) {
                out[i * grid.n_lon + j] = sample;
            }
        }
    });
    return out;
}

void add_scaled(std::vector<double>& acc, std::span<const double> values, double scale)
{
    for (std::size_t c = 0; c < acc.size(); ++c) {
        acc[c] += scale * values[c];
    }
}

/// Ratio |u_j| / |u_i| for a datapoint, or nullopt when the cluster is degenerate.
std::optional<double> speed_ratio(const AggregationInputs& in, std::size_t j)
{
    const double ui = in.cluster_wind[static_cast<std::size_t>(in.labels[j])].speed;
    if (ui == 0.0) {
        return std::nullopt;
    }
    return in.datapoint_wind[j].speed / ui;
}

std::vector<std::string> degenerate_warnings(const AggregationInputs& in, const std::vector<std::size_t>& counts)
{
    std::vector<std::string> warnings;
    for (std::size_t c = 0; c < in.k; ++c) {
        if (counts[c] > 0 && in.cluster_wind[c].speed == 0.0) {
            warnings.push_back("cluster " + std::to_string(c) +
                               " has a calm representative; its members use uncorrected results");
        }
    }
    return warnings;
}

WakeAggregate finish_wake(std::vector<std::vector<double>> per_cluster, const GridSpec& grid,
                          const std::vector<std::size_t>& counts)
{
    WakeAggregate w;
    w.total_wake = Raster::zeros(grid);
    const std::size_t total_count = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t c = 0; c < per_cluster.size(); ++c) {
        add_scaled(w.total_wake.values, per_cluster[c], 1.0);
        Raster mean{grid, per_cluster[c]};
        if (counts[c] > 0) {
            for (double& v : mean.values) {
                v /= static_cast<double>(counts[c]);
            }
        } else {
            std::fill(mean.values.begin(), mean.values.end(), 0.0);
        }
        w.per_cluster_mean.push_back(std::move(mean));
        w.per_cluster_total.push_back({grid, std::move(per_cluster[c])});
    }
    w.mean_wake = w.total_wake;
    if (total_count > 0) {
        for (double& v : w.mean_wake.values) {
            v /= static_cast<double>(total_count);
        }
    }
    return w;
}

} // namespace

Raster Raster::from_field(const GriddedField& field, std::size_t channel)
{
    const auto values = field.channel(channel);
    return {field.grid(), std::vector<double>(values.begin(), values.end())};
}

GriddedField Raster::to_field(Timestamp time, std::string name) const
{
    return GriddedField(grid, time, {{std::move(name), "m s-1"}}, std::vector<float>(values.begin(), values.end()));
}

double Raster::sum() const
{
    return std::accumulate(values.begin(), values.end(), 0.0);
}

Raster rotate_wake(const Raster& wake, double dtheta, GeoPoint center)
{
    if (dtheta == 0.0) {
        return wake;
    }
    return {wake.grid, rotate_values(std::span<const double>(wake.values), wake.grid, dtheta, center)};
}

GriddedField rotate_wake(const GriddedField& wake, double dtheta, GeoPoint center)
{
    if (dtheta == 0.0) {
        return wake;
    }
    std::vector<float> out;
    out.reserve(wake.values().size());
    for (std::size_t c = 0; c < wake.channels().size(); ++c) {
        const auto rotated = rotate_values(wake.channel(c), wake.grid(), dtheta, center);
        out.insert(out.end(), rotated.begin(), rotated.end());
    }
    return GriddedField(wake.grid(), wake.time(), wake.channels(), std::move(out));
}

WindPolar farm_center_wind(const WeatherDataset& ds, std::size_t t, GeoPoint center, CenterSampling sampling)
{
    const GridSpec& g = ds.grid();
    const LocalFrame frame(g, center);
    const Vec2 idx = frame.to_index({0.0, 0.0});
    const auto u = ds.channel(t, kChannelU);
    const auto v = ds.channel(t, kChannelV);
    if (sampling == CenterSampling::bilinear) {
        double uu = 0.0, vv = 0.0;
        if (!bilinear_sample(u, g, idx.x, idx.y, uu) || !bilinear_sample(v, g, idx.x, idx.y, vv)) {
            throw ValidationError("farm center lies outside the dataset grid");
        }
        return wind_speed_direction(uu, vv);
    }
    const long i = std::lround(idx.x);
    const long j = std::lround(idx.y);
    if (i < 0 || j < 0 || i >= static_cast<long>(g.n_lat) || j >= static_cast<long>(g.n_lon)) {
        throw ValidationError("farm center lies outside the dataset grid");
    }
    const std::size_t cell = static_cast<std::size_t>(i) * g.n_lon + static_cast<std::size_t>(j);
    return wind_speed_direction(u[cell], v[cell]);
}

void AggregationInputs::validate() const
{
    if (k < 1 || cluster_results.size() != k || cluster_wind.size() != k) {
        throw ValidationError("aggregation needs exactly one result and one representative wind per cluster");
    }
    if (labels.size() != datapoint_wind.size()) {
        throw ValidationError("labels and datapoint winds differ in length");
    }
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= k) {
            throw ValidationError("datapoint label out of range");
        }
    }
    for (const auto& w : datapoint_wind) {
        if (!std::isfinite(w.speed) || !std::isfinite(w.theta) || w.speed < 0.0) {
            throw ValidationError("datapoint winds must be finite");
        }
    }
    for (const auto& w : cluster_wind) {
        if (!std::isfinite(w.speed) || !std::isfinite(w.theta) || w.speed < 0.0) {
            throw ValidationError("cluster winds must be finite");
        }
    }
    const GridSpec& g = cluster_results.front().deficit.grid();
    for (const auto& r : cluster_results) {
        if (!(r.deficit.grid() == g)) {
            throw ValidationError("cluster wake rasters must share one grid");
        }
    }
    if (!(rated_farm_power > 0.0)) {
        throw ValidationError("rated farm power must be positive");
    }
}

std::vector<std::size_t> AggregationInputs::counts() const
{
    std::vector<std::size_t> n(k, 0);
    for (int l : labels) {
        ++n[static_cast<std::size_t>(l)];
    }
    return n;
}

AggregationInputs make_aggregation_inputs(const WeatherDataset& ds, std::span<const int> labels,
                                          std::span<const std::size_t> representatives,
                                          std::vector<WakeResult> cluster_results, const FarmSpec& farm,
                                          std::size_t first, std::size_t last, CenterSampling sampling)
{
    if (labels.size() != ds.size()) {
        throw ValidationError("labels must cover every datapoint of the dataset");
    }
    if (first >= last || last > ds.size()) {
        throw RangeError("aggregation period outside the dataset");
    }
    AggregationInputs in;
    in.k = representatives.size();
    in.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(first),
                     labels.begin() + static_cast<std::ptrdiff_t>(last));
    for (std::size_t t = first; t < last; ++t) {
        in.datapoint_wind.push_back(farm_center_wind(ds, t, farm.farm_center, sampling));
    }
    for (const std::size_t r : representatives) {
        in.cluster_wind.push_back(farm_center_wind(ds, r, farm.farm_center, sampling));
    }
    in.cluster_results = std::move(cluster_results);
    in.rated_farm_power = farm.rated_farm_power();
    in.farm_center = farm.farm_center;
    in.validate();
    return in;
}

std::string to_string(AggregationMethod m)
{
    return m == AggregationMethod::simple ? "simple" : "complex";
}

LongTermPrediction simple_sum(const AggregationInputs& in)
{
    in.validate();
    LongTermPrediction p;
    p.method = AggregationMethod::simple;
    p.counts = in.counts();

    PowerAggregate power;
    std::vector<std::vector<double>> per_cluster;
    for (std::size_t c = 0; c < in.k; ++c) {
        const double n = static_cast<double>(p.counts[c]);
        power.per_cluster_power.push_back(n * in.cluster_results[c].farm_power);
        power.total_power += power.per_cluster_power.back();
        std::vector<double> w = Raster::from_field(in.cluster_results[c].deficit).values;
        for (double& v : w) {
            v *= n;
        }
        per_cluster.push_back(std::move(w));
    }
    p.power = power;
    p.wake = finish_wake(std::move(per_cluster), in.cluster_results.front().deficit.grid(), p.counts);
    return p;
}

LongTermPrediction complex_power(const AggregationInputs& in)
{
    in.validate();
    LongTermPrediction p;
    p.method = AggregationMethod::complex;
    p.counts = in.counts();
    p.warnings = degenerate_warnings(in, p.counts);

    PowerAggregate power;
    power.per_cluster_power.assign(in.k, 0.0);
    for (std::size_t j = 0; j < in.labels.size(); ++j) {
        const auto c = static_cast<std::size_t>(in.labels[j]);
        const double pi = in.cluster_results[c].farm_power;
        const auto ratio = speed_ratio(in, j);
        double term = ratio ? *ratio * pi : pi;
        if (term > in.rated_farm_power) {
            term = in.rated_farm_power;
            ++power.capped_terms;
        }
        power.per_cluster_power[c] += term;
    }
    power.total_power = std::accumulate(power.per_cluster_power.begin(), power.per_cluster_power.end(), 0.0);
    p.power = power;
    return p;
}

LongTermPrediction complex_wake(const AggregationInputs& in)
{
    in.validate();
    LongTermPrediction p;
    p.method = AggregationMethod::complex;
    p.counts = in.counts();
    p.warnings = degenerate_warnings(in, p.counts);

    const GridSpec& grid = in.cluster_results.front().deficit.grid();
    std::vector<Raster> base;
    for (const auto& r : in.cluster_results) {
        base.push_back(Raster::from_field(r.deficit));
    }
    // Terms are independent; rotate in parallel, then reduce in datapoint order.
    const std::size_t n = in.labels.size();
    std::vector<std::vector<double>> terms(n);
    std::vector<double> scales(n, 0.0);
    parallel_for(n, [&](std::size_t j) {
        const auto c = static_cast<std::size_t>(in.labels[j]);
        const auto ratio = speed_ratio(in, j);
        if (!ratio) {
            scales[j] = 1.0;
            return;
        }
        scales[j] = *ratio;
        if (*ratio == 0.0) {
            return;
        }
        const double dtheta = in.datapoint_wind[j].theta - in.cluster_wind[c].theta;
        if (dtheta != 0.0) {
            terms[j] = rotate_wake(base[c], dtheta, in.farm_center).values;
        }
    });
    std::vector<std::vector<double>> per_cluster(in.k, std::vector<double>(grid.cells(), 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        if (scales[j] == 0.0) {
            continue;
        }
        const auto c = static_cast<std::size_t>(in.labels[j]);
        add_scaled(per_cluster[c], terms[j].empty() ? base[c].values : terms[j], scales[j]);
    }
    p.wake = finish_wake(std::move(per_cluster), grid, p.counts);
    return p;
}

LongTermPrediction complex_sum(const AggregationInputs& in)
{
    LongTermPrediction p = complex_power(in);
    p.wake = complex_wake(in).wake;
    return p;
}

json prediction_summary_json(const LongTermPrediction& p)
{
    json clusters = json::array();
    for (std::size_t c = 0; c < p.counts.size(); ++c) {
        json entry{{"cluster", c}, {"count", p.counts[c]}};
        if (p.power) {
            entry["power_w_days"] = p.power->per_cluster_power[c];
        }
        if (p.wake) {
            entry["wake_sum_m_s_days"] = p.wake->per_cluster_total[c].sum();
        }
        clusters.push_back(entry);
    }
    json j{{"method", to_string(p.method)}, {"per_cluster", clusters}, {"warnings", p.warnings}};
    if (p.power) {
        j["total_power_w_days"] = p.power->total_power;
        j["capped_terms"] = p.power->capped_terms;
    }
    return j;
}

void write_prediction(const LongTermPrediction& p, const fs::path& dir, Timestamp stamp)
{
    write_json_file(dir / "summary.json", prediction_summary_json(p));
    if (!p.wake) {
        return;
    }
    write_field(p.wake->mean_wake.to_field(stamp), dir / "mean_wake");
    write_field(p.wake->total_wake.to_field(stamp), dir / "total_wake");
    for (std::size_t c = 0; c < p.wake->per_cluster_mean.size(); ++c) {
        write_field(p.wake->per_cluster_mean[c].to_field(stamp), dir / ("cluster_" + std::to_string(c)));
    }
}

} // namespace windregime
