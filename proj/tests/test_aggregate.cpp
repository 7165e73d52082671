#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "windregime/aggregate.hpp"
#include "windregime/dataset_io.hpp"
#include "windregime/error.hpp"

using namespace windregime;
using testutil::day;

namespace {

constexpr double kPi = std::numbers::pi;

// Square cells of `cell_m` meters around `center`, n x n.
GridSpec square_grid(GeoPoint center, std::size_t n, double cell_m)
{
    const double m_lat = kEarthRadius * kPi / 180.0;
    const double m_lon = m_lat * std::cos(center.lat * kPi / 180.0);
    const double half = 0.5 * static_cast<double>(n - 1) * cell_m;
    return GridSpec{center.lat - half / m_lat, center.lat + half / m_lat, center.lon - half / m_lon,
                    center.lon + half / m_lon, n, n};
}

const GeoPoint kCenter{56.0, 3.0};

Raster gaussian(const GridSpec& g, double x0, double y0, double sigma)
{
    const LocalFrame frame(g, kCenter);
    Raster r = Raster::zeros(g);
    for (std::size_t i = 0; i < g.n_lat; ++i) {
        for (std::size_t j = 0; j < g.n_lon; ++j) {
            const Vec2 p = frame.cell_position(i, j);
            r.values[i * g.n_lon + j] =
                std::exp(-((p.x - x0) * (p.x - x0) + (p.y - y0) * (p.y - y0)) / (2.0 * sigma * sigma));
        }
    }
    return r;
}

std::pair<std::size_t, std::size_t> argmax(const Raster& r)
{
    const auto it = std::max_element(r.values.begin(), r.values.end());
    const auto idx = static_cast<std::size_t>(it - r.values.begin());
    return {idx / r.grid.n_lon, idx % r.grid.n_lon};
}

WakeResult result_from(const Raster& r, double power)
{
    return WakeResult{r.to_field(day(0)), power, {}, {}, {}, day(0)};
}

// One raster and power per cluster; datapoints given as (label, speed, theta).
AggregationInputs make_inputs(const std::vector<Raster>& wakes, const std::vector<double>& powers,
                              const std::vector<WindPolar>& cluster_wind,
                              const std::vector<std::tuple<int, double, double>>& points, double rated = 5e8)
{
    AggregationInputs in;
    in.k = wakes.size();
    for (std::size_t c = 0; c < wakes.size(); ++c) {
        in.cluster_results.push_back(result_from(wakes[c], powers[c]));
    }
    in.cluster_wind = cluster_wind;
    for (const auto& [l, s, t] : points) {
        in.labels.push_back(l);
        in.datapoint_wind.push_back({s, t});
    }
    in.rated_farm_power = rated;
    in.farm_center = kCenter;
    return in;
}

} // namespace

TEST_CASE("simple sum examples")
{
    const GridSpec g = square_grid(kCenter, 9, 1000.0);
    const Raster w1 = gaussian(g, 2000.0, 0.0, 1500.0);

    SUBCASE("single cluster")
    {
        std::vector<std::tuple<int, double, double>> pts(365, {0, 9.0, 0.0});
        const auto p = simple_sum(make_inputs({w1}, {2e8}, {{9.0, 0.0}}, pts));
        CHECK(p.power->total_power == doctest::Approx(365.0 * 2e8));
        for (std::size_t i = 0; i < g.cells(); ++i) {
            CHECK(p.wake->total_wake.values[i] == doctest::Approx(365.0 * w1.values[i]));
            CHECK(p.wake->mean_wake.values[i] == doctest::Approx(w1.values[i]));
        }
    }
    SUBCASE("calm clusters")
    {
        std::vector<std::tuple<int, double, double>> pts{{0, 1.0, 0.0}, {1, 1.0, 0.0}};
        const auto p = simple_sum(make_inputs({w1, w1}, {0.0, 0.0}, {{1.0, 0.0}, {1.0, 0.0}}, pts));
        CHECK(p.power->total_power == 0.0);
    }
    SUBCASE("two clusters")
    {
        std::vector<std::tuple<int, double, double>> pts;
        for (int i = 0; i < 100; ++i) {
            pts.emplace_back(0, 8.0, 0.0);
        }
        for (int i = 0; i < 265; ++i) {
            pts.emplace_back(1, 8.0, 0.0);
        }
        const auto p = simple_sum(make_inputs({w1, w1}, {1e8, 2e8}, {{8.0, 0.0}, {8.0, 0.0}}, pts));
        CHECK(p.power->total_power == doctest::Approx(6.3e10));
        CHECK(p.counts == std::vector<std::size_t>{100, 265});
    }
    SUBCASE("linearity")
    {
        const Raster w2 = gaussian(g, -1000.0, 500.0, 800.0);
        std::vector<std::tuple<int, double, double>> pts{{0, 8.0, 0.0}, {1, 8.0, 0.0}, {1, 8.0, 0.0}};
        const auto a = simple_sum(make_inputs({w1, w2}, {1e8, 3e8}, {{8.0, 0.0}, {8.0, 0.0}}, pts));
        Raster w1x2 = w1;
        for (double& v : w1x2.values) {
            v *= 2.0;
        }
        const auto b = simple_sum(make_inputs({w1x2, w2}, {2e8, 3e8}, {{8.0, 0.0}, {8.0, 0.0}}, pts));
        CHECK(b.power->total_power - a.power->total_power == doctest::Approx(1e8));
        for (std::size_t i = 0; i < g.cells(); ++i) {
            CHECK(b.wake->total_wake.values[i] - a.wake->total_wake.values[i] ==
                  doctest::Approx(w1.values[i]).epsilon(1e-6));
        }
    }
}

TEST_CASE("complex power examples")
{
    const GridSpec g = square_grid(kCenter, 5, 1000.0);
    const Raster w = Raster::zeros(g);

    SUBCASE("speed ratios scale the cluster power")
    {
        const auto p = complex_power(
            make_inputs({w}, {2e8}, {{8.0, 0.0}}, {{0, 4.0, 0.0}, {0, 8.0, 0.1}, {0, 12.0, -0.1}}));
        CHECK(p.power->total_power == doctest::Approx(6e8));
        CHECK(p.power->capped_terms == 0);
    }
    SUBCASE("cap at rated farm power")
    {
        const auto p = complex_power(make_inputs({w}, {0.6 * 5e8}, {{8.0, 0.0}}, {{0, 16.0, 0.0}}));
        CHECK(p.power->total_power == 5e8);
        CHECK(p.power->capped_terms == 1);
    }
    SUBCASE("ratio one equals the simple sum")
    {
        const auto in = make_inputs({w, w}, {1e8, 3e8}, {{8.0, 0.2}, {10.0, -1.0}},
                                    {{0, 8.0, 0.2}, {1, 10.0, -1.0}, {1, 10.0, -1.0}});
        CHECK(complex_power(in).power->total_power == simple_sum(in).power->total_power);
    }
    SUBCASE("calm representative falls back to uncorrected power")
    {
        const auto p = complex_power(make_inputs({w}, {1e8}, {{0.0, 0.0}}, {{0, 5.0, 0.0}, {0, 7.0, 0.0}}));
        CHECK(p.power->total_power == doctest::Approx(2e8));
        CHECK(p.warnings.size() == 1);
    }
}

TEST_CASE("rotation contract")
{
    const GridSpec g = square_grid(kCenter, 41, 500.0);
    const Raster east = gaussian(g, 5000.0, 0.0, 1500.0);

    SUBCASE("zero angle is the identity")
    {
        const Raster r = rotate_wake(east, 0.0, kCenter);
        CHECK(r.values == east.values);
    }
    SUBCASE("quarter turn moves an eastern maximum to the north")
    {
        const auto [i0, j0] = argmax(east);
        CHECK(i0 == 20);
        CHECK(j0 == 30);
        const auto [i1, j1] = argmax(rotate_wake(east, kPi / 2, kCenter));
        CHECK(i1 == 30);
        CHECK(j1 == 20);
    }
    SUBCASE("half turn flips through the center")
    {
        const auto [i1, j1] = argmax(rotate_wake(east, kPi, kCenter));
        CHECK(i1 == 20);
        CHECK(j1 == 10);
    }
    SUBCASE("centered bump is unchanged")
    {
        const Raster bump = gaussian(g, 0.0, 0.0, 3000.0);
        // Quarter turns map the lattice onto itself.
        const Raster q = rotate_wake(bump, kPi / 2, kCenter);
        for (std::size_t i = 0; i < g.cells(); ++i) {
            CHECK(q.values[i] == doctest::Approx(bump.values[i]).epsilon(1e-6));
        }
        // Other angles carry the bilinear interpolation error, bounded by
        // h^2 / 8 * (|f_xx| + |f_yy|) <= h^2 / (4 sigma^2).
        const double bound = 500.0 * 500.0 / (4.0 * 3000.0 * 3000.0);
        for (double a : {0.3, 1.0, 2.5}) {
            const Raster r = rotate_wake(bump, a, kCenter);
            double err = 0.0;
            for (std::size_t i = 0; i < g.cells(); ++i) {
                if (bump.values[i] > 1e-3) {
                    err = std::max(err, std::abs(r.values[i] - bump.values[i]));
                }
            }
            CHECK(err <= bound);
        }
    }
    SUBCASE("round trip within resampling tolerance")
    {
        double peak = *std::max_element(east.values.begin(), east.values.end());
        for (double deg : {30.0, 90.0, 137.0}) {
            const double a = deg * kPi / 180.0;
            const Raster back = rotate_wake(rotate_wake(east, a, kCenter), -a, kCenter);
            double err = 0.0;
            for (std::size_t i = 0; i < g.cells(); ++i) {
                err = std::max(err, std::abs(back.values[i] - east.values[i]));
            }
            CHECK(err <= 0.05 * peak);
        }
    }
    SUBCASE("sources outside the grid give zero")
    {
        // A corner bump rotated by 45 degrees lands beyond the northern edge.
        const Raster edge = gaussian(g, 9000.0, 9000.0, 400.0);
        const Raster r = rotate_wake(edge, kPi / 4, kCenter);
        CHECK(r.sum() < 1e-6 * edge.sum());
        for (double v : r.values) {
            CHECK(v >= 0.0);
        }
    }
    SUBCASE("center outside the grid")
    {
        CHECK_THROWS_AS(rotate_wake(east, 0.5, GeoPoint{60.0, 3.0}), ValidationError);
    }
    SUBCASE("field overload agrees")
    {
        const GriddedField f = east.to_field(day(0));
        const GriddedField rf = rotate_wake(f, 0.7, kCenter);
        const Raster rr = rotate_wake(Raster::from_field(f), 0.7, kCenter);
        for (std::size_t i = 0; i < g.cells(); ++i) {
            CHECK(rf.values()[i] == static_cast<float>(rr.values[i]));
        }
    }
}

TEST_CASE("complex wake examples")
{
    const GridSpec g = square_grid(kCenter, 41, 500.0);
    const Raster east = gaussian(g, 5000.0, 0.0, 1200.0);
    const double peak = *std::max_element(east.values.begin(), east.values.end());

    SUBCASE("half turn with a speed ratio")
    {
        const auto p = complex_wake(make_inputs({east}, {1e8}, {{8.0, 0.0}}, {{0, 4.0, kPi}}));
        const Raster& m = p.wake->mean_wake;
        const auto [i, j] = argmax(m);
        CHECK(i == 20);
        CHECK(j == 10);
        CHECK(*std::max_element(m.values.begin(), m.values.end()) == doctest::Approx(0.5 * peak).epsilon(1e-6));
    }
    SUBCASE("two members make two half lobes")
    {
        const auto p =
            complex_wake(make_inputs({east}, {1e8}, {{8.0, 0.0}}, {{0, 8.0, 0.0}, {0, 8.0, kPi / 2}}));
        const Raster& m = p.wake->mean_wake;
        CHECK(m.values[20 * 41 + 30] == doctest::Approx(0.5 * peak).epsilon(1e-3));
        CHECK(m.values[30 * 41 + 20] == doctest::Approx(0.5 * peak).epsilon(1e-3));
    }
    SUBCASE("zero-speed datapoint contributes nothing")
    {
        const auto p = complex_wake(make_inputs({east}, {1e8}, {{8.0, 0.0}}, {{0, 0.0, 0.0}, {0, 8.0, 0.0}}));
        for (std::size_t i = 0; i < g.cells(); ++i) {
            CHECK(p.wake->total_wake.values[i] == doctest::Approx(east.values[i]));
        }
    }
    SUBCASE("mass never exceeds the scaled cluster mass")
    {
        const Raster wide = gaussian(g, 6000.0, 3000.0, 2500.0);
        const std::vector<std::tuple<int, double, double>> pts{
            {0, 6.0, 0.4}, {0, 9.0, -1.1}, {0, 7.5, 2.8}, {0, 8.0, 0.0}};
        const auto p = complex_wake(make_inputs({wide}, {1e8}, {{8.0, 0.0}}, pts));
        double bound = 0.0;
        for (const auto& [l, s, t] : pts) {
            bound += s / 8.0 * wide.sum();
        }
        CHECK(p.wake->total_wake.sum() <= bound * (1.0 + 1e-12));
        // A compact central bump keeps its mass up to interpolation error.
        const Raster bump = gaussian(g, 0.0, 0.0, 1500.0);
        const auto q = complex_wake(make_inputs({bump}, {1e8}, {{8.0, 0.0}}, pts));
        double full = 0.0;
        for (const auto& [l, s, t] : pts) {
            full += s / 8.0 * bump.sum();
        }
        CHECK(q.wake->total_wake.sum() == doctest::Approx(full).epsilon(1e-2));
    }
}

TEST_CASE("degenerate corrections reproduce the simple sum")
{
    const GridSpec g = square_grid(kCenter, 31, 600.0);
    const std::vector<Raster> wakes{gaussian(g, 3000.0, 0.0, 1000.0), gaussian(g, -2000.0, 2000.0, 1500.0),
                                    gaussian(g, 0.0, -4000.0, 900.0)};
    const std::vector<WindPolar> reps{{7.5, 0.1}, {11.0, 2.3}, {9.2, -1.9}};
    std::vector<std::tuple<int, double, double>> pts;
    for (int j = 0; j < 120; ++j) {
        const int c = (j * 7) % 3;
        pts.emplace_back(c, reps[c].speed, reps[c].theta);
    }
    const auto in = make_inputs(wakes, {1.3e8, 4.1e8, 2.2e8}, reps, pts);
    const auto s = simple_sum(in);
    const auto c = complex_sum(in);
    CHECK(std::abs(c.power->total_power - s.power->total_power) <= 1e-9 * s.power->total_power);
    for (std::size_t i = 0; i < g.cells(); ++i) {
        CHECK(std::abs(c.wake->total_wake.values[i] - s.wake->total_wake.values[i]) <=
              1e-9 * std::max(1e-300, std::abs(s.wake->total_wake.values[i])));
    }
}

TEST_CASE("aggregation inputs are validated")
{
    const GridSpec g = square_grid(kCenter, 5, 1000.0);
    const Raster w = Raster::zeros(g);
    CHECK_THROWS_AS(simple_sum(make_inputs({w}, {1e8}, {{8.0, 0.0}}, {{1, 8.0, 0.0}})), ValidationError);
    CHECK_THROWS_AS(simple_sum(make_inputs({w}, {1e8}, {}, {{0, 8.0, 0.0}})), ValidationError);
}

TEST_CASE("inputs gathered from a dataset")
{
    const GridSpec g = square_grid(kCenter, 5, 1000.0);
    const WeatherDataset ds = testutil::uniform_dataset(g, {{3.0, 4.0}, {0.0, 2.0}, {-6.0, 0.0}});
    const FarmSpec farm = default_farm(kCenter);
    const Raster w = Raster::zeros(g);
    const std::vector<int> labels{0, 1, 0};
    const std::vector<std::size_t> reps{0, 1};
    const auto in = make_aggregation_inputs(ds, labels, reps, {result_from(w, 1.0), result_from(w, 2.0)}, farm, 1, 3);
    CHECK(in.labels == std::vector<int>{1, 0});
    CHECK(in.datapoint_wind[1].speed == doctest::Approx(6.0));
    CHECK(in.datapoint_wind[1].theta == doctest::Approx(kPi));
    CHECK(in.cluster_wind[0].speed == doctest::Approx(5.0));
    const WindPolar b = farm_center_wind(ds, 0, kCenter, CenterSampling::bilinear);
    CHECK(b.speed == doctest::Approx(5.0));
}

TEST_CASE("prediction export layout")
{
    testutil::TempDir tmp("pred");
    const GridSpec g = square_grid(kCenter, 5, 1000.0);
    const Raster w = gaussian(g, 0.0, 0.0, 1000.0);
    const auto p = simple_sum(make_inputs({w, w}, {1e8, 2e8}, {{8.0, 0.0}, {9.0, 1.0}}, {{0, 8.0, 0.0}, {1, 9.0, 1.0}}));
    write_prediction(p, tmp.path(), day(0));
    const auto summary = read_json_file(tmp.path() / "summary.json");
    CHECK(summary["method"] == "simple");
    CHECK(summary["total_power_w_days"].get<double>() == doctest::Approx(3e8));
    CHECK(summary["per_cluster"].size() == 2);
    CHECK(std::filesystem::exists(tmp.path() / "mean_wake" / kManifestName));
    CHECK(std::filesystem::exists(tmp.path() / "cluster_1" / kDataName));
    const GriddedField back = read_field(tmp.path() / "mean_wake");
    CHECK(back.at(0, 2, 2) == static_cast<float>(w.values[12]));
}
