// Evaluates the ten acceptance criteria and prints one PASS/FAIL line each.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cli.hpp"
#include "oracles.hpp"
#include "windregime/dataset_io.hpp"
#include "windregime/diagnostics.hpp"
#include "windregime/error.hpp"
#include "windregime/pipeline.hpp"

namespace fs = std::filesystem;
using namespace windregime;

namespace {

// Tolerances.
constexpr double kOptimumRelTol = 1e-9;
constexpr int kOptimumTrials = 100;
constexpr int kOptimumRequired = 95;
constexpr double kClusteringSeconds = 10.0;
constexpr double kDragExpected = 6.110e5;
constexpr double kRampExpected = 1.190e6;
constexpr double kPointRelTol = 1e-3;
constexpr double kDegenerateRelTol = 1e-9;
constexpr double kRoundTripFraction = 0.05;
constexpr double kWallClockFraction = 0.05;
constexpr double kRunFraction = 0.02;
constexpr double kPowerRelTol = 0.10;
constexpr double kScenarioSeconds = 300.0;
constexpr double kCorrelationMin = 0.8;
constexpr std::size_t kClustersRequired = 5;

int passed = 0;
int evaluated = 0;

void report(int id, bool ok, const std::string& detail)
{
    ++evaluated;
    passed += ok ? 1 : 0;
    std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), root).string()] = slurp(e.path());
        }
    }
    return files;
}

void criterion_1()
{
    const auto t0 = std::chrono::steady_clock::now();
    int optimal = 0;
    bool monotone = true;
    double kmeans_seconds = 0.0;
    for (int trial = 0; trial < kOptimumTrials; ++trial) {
        std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(trial));
        const std::size_t n = 6 + static_cast<std::size_t>(trial % 7);
        const int k = 1 + trial % 3;
        std::normal_distribution<double> nd;
        oracle::Points pts(n, std::vector<double>(2));
        std::vector<double> flat;
        for (auto& p : pts) {
            for (double& v : p) {
                v = 3.0 * nd(rng);
                flat.push_back(v);
            }
        }
        const auto tk = std::chrono::steady_clock::now();
        const ClusterModel m = kmeans_fit(FeatureMatrix(n, 2, flat), {static_cast<std::size_t>(k),
                                                                      static_cast<std::uint64_t>(trial), 300, 1e-6, 10});
        kmeans_seconds += seconds_since(tk);
        const double best = oracle::exhaustive_min_inertia(pts, k);
        if (m.inertia <= best * (1.0 + kOptimumRelTol) + 1e-12) {
            ++optimal;
        }
        for (const auto& h : m.restart_histories) {
            for (std::size_t i = 1; i < h.size(); ++i) {
                monotone = monotone && h[i] <= h[i - 1];
            }
        }
    }
    const double total = seconds_since(t0);
    report(1, optimal >= kOptimumRequired && monotone && total < kClusteringSeconds,
           fmt::format("optimal inertia in {}/{} trials (need {}), inertia non-increasing: {}, {:.2f} s "
                       "({:.3f} s in k-means)",
                       optimal, kOptimumTrials, kOptimumRequired, monotone ? "yes" : "no", total, kmeans_seconds));
}

void criterion_2(const WeatherDataset& ds, const RunConfig& c)
{
    const ElbowReport e = elbow_scan(ds, c.channels, c.k_range, c.kmeans_options());
    bool bounded = true;
    int inversions = 0;
    std::size_t best_k = 0;
    double best_s = -2.0;
    std::string sil;
    for (std::size_t i = 0; i < e.rows.size(); ++i) {
        const auto& r = e.rows[i];
        bounded = bounded && r.avg_correlation >= -1.0 && r.avg_correlation <= 1.0;
        if (r.silhouette) {
            bounded = bounded && *r.silhouette >= -1.0 && *r.silhouette <= 1.0;
            if (*r.silhouette > best_s) {
                best_s = *r.silhouette;
                best_k = r.k;
            }
            sil += fmt::format("{}{}:{:.3f}", sil.empty() ? "" : " ", r.k, *r.silhouette);
        }
        if (i > 0 && r.avg_distance > e.rows[i - 1].avg_distance) {
            ++inversions;
        }
    }
    report(2, bounded && inversions <= 1 && best_k == 6,
           fmt::format("heuristics in [-1,1]: {}, avg_distance inversions {} (max 1), silhouette argmax k={} [{}]",
                       bounded ? "yes" : "no", inversions, best_k, sil));
}

void criterion_3()
{
    const TurbineSpec t = default_turbine();
    const Vec2 f = fitch_drag(t, {10.0, 0.0});
    const double drag = std::hypot(f.x, f.y);
    const double rated = power_curve(t, t.rated_speed);
    const double ramp = power_curve(t, 7.2);
    const bool ok = std::abs(drag - kDragExpected) <= kPointRelTol * kDragExpected && rated == 5.0e6 &&
                    std::abs(ramp - kRampExpected) <= kPointRelTol * kRampExpected;
    report(3, ok, fmt::format("drag {:.5e} N (6.110e5 +-0.1%), P(rated) {:.1f} W (5e6 exact), P(7.2) {:.5e} W "
                              "(1.190e6 +-0.1%)",
                              drag, rated, ramp));
}

void criterion_4(const PipelineResult& p)
{
    AggregationInputs in = p.inputs;
    for (std::size_t j = 0; j < in.labels.size(); ++j) {
        in.datapoint_wind[j] = in.cluster_wind[static_cast<std::size_t>(in.labels[j])];
    }
    const LongTermPrediction s = simple_sum(in);
    const LongTermPrediction cp = complex_power(in);
    const LongTermPrediction cw = complex_wake(in);
    const double power_rel = std::abs(cp.power->total_power - s.power->total_power) / std::abs(s.power->total_power);
    double scale = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < s.wake->total_wake.values.size(); ++i) {
        scale = std::max(scale, std::abs(s.wake->total_wake.values[i]));
        diff = std::max(diff, std::abs(cw.wake->total_wake.values[i] - s.wake->total_wake.values[i]));
    }
    for (std::size_t c = 0; c < s.wake->per_cluster_total.size(); ++c) {
        for (std::size_t i = 0; i < s.wake->per_cluster_total[c].values.size(); ++i) {
            diff = std::max(diff, std::abs(cw.wake->per_cluster_total[c].values[i] -
                                           s.wake->per_cluster_total[c].values[i]));
        }
    }
    const double wake_rel = scale > 0.0 ? diff / scale : diff;
    report(4, power_rel <= kDegenerateRelTol && wake_rel <= kDegenerateRelTol,
           fmt::format("power rel diff {:.2e}, wake max rel diff {:.2e} (limit 1e-9)", power_rel, wake_rel));
}

void criterion_5(const PipelineResult& p, const FarmSpec& farm)
{
    bool identity = true;
    double worst = 0.0;
    for (const auto& r : p.cluster_results) {
        const Raster w = Raster::from_field(r.deficit);
        identity = identity && rotate_wake(w, 0.0, farm.farm_center).values == w.values;
        const double peak = *std::max_element(w.values.begin(), w.values.end());
        if (peak <= 0.0) {
            continue;
        }
        for (double deg : {30.0, 90.0, 137.0}) {
            const double a = deg * std::numbers::pi / 180.0;
            const Raster back = rotate_wake(rotate_wake(w, a, farm.farm_center), -a, farm.farm_center);
            double err = 0.0;
            for (std::size_t i = 0; i < w.values.size(); ++i) {
                err = std::max(err, std::abs(back.values[i] - w.values[i]));
            }
            worst = std::max(worst, err / peak);
        }
    }
    // Context only: a wake-like bump resolved over several cells on the same grid.
    const GridSpec& g = p.cluster_results.front().deficit.grid();
    const LocalFrame frame(g, farm.farm_center);
    Raster smooth = Raster::zeros(g);
    for (std::size_t i = 0; i < g.n_lat; ++i) {
        for (std::size_t j = 0; j < g.n_lon; ++j) {
            const Vec2 q = frame.cell_position(i, j);
            smooth.values[i * g.n_lon + j] = std::exp(-((q.x - 5000.0) * (q.x - 5000.0) + q.y * q.y) / (2.0 * 3000.0 * 3000.0));
        }
    }
    double smooth_worst = 0.0;
    for (double deg : {30.0, 90.0, 137.0}) {
        const double a = deg * std::numbers::pi / 180.0;
        const Raster back = rotate_wake(rotate_wake(smooth, a, farm.farm_center), -a, farm.farm_center);
        for (std::size_t i = 0; i < smooth.values.size(); ++i) {
            smooth_worst = std::max(smooth_worst, std::abs(back.values[i] - smooth.values[i]));
        }
    }
    report(5, identity && worst <= kRoundTripFraction,
           fmt::format("zero-angle identity: {}, worst round-trip error on the reference cluster wakes {:.2f}% of max "
                       "at 30/90/137 deg (limit 5%); resolved 3 km bump {:.2f}%",
                       identity ? "bit-exact" : "differs", 100.0 * worst, 100.0 * smooth_worst));
}

void criterion_6(const PipelineResult& p, const ValidationOutcome& v)
{
    const double run_fraction = static_cast<double>(p.solver_runs) / static_cast<double>(v.oracle.solver_runs);
    const double wall = p.seconds / v.oracle_seconds;
    report(6, p.solver_runs == 6 && v.oracle.solver_runs == 365 && run_fraction < kRunFraction &&
                  wall <= kWallClockFraction,
           fmt::format("solver runs {} vs {} ({:.2f}%), wall clock {:.3f} s vs {:.3f} s ({:.2f}%, limit 5%)",
                       p.solver_runs, v.oracle.solver_runs, 100.0 * run_fraction, p.seconds, v.oracle_seconds,
                       100.0 * wall));
}

void criterion_7(const ValidationOutcome& v, double seconds)
{
    const double complex_err = *v.complex.abs_error;
    const double simple_err = *v.simple.abs_error;
    const double iqr_half = v.random.summary.iqr_half_width();
    const bool a = *v.complex.rel_error <= kPowerRelTol;
    const bool b = complex_err < simple_err;
    const bool c = complex_err < iqr_half;
    report(7, a && b && c && seconds < kScenarioSeconds,
           fmt::format("(a) complex error {:.2f}% (limit 10%): {}; (b) complex {:.4e} vs simple {:.4e} W*days: {}; "
                       "(c) vs random IQR half-width {:.4e}: {}; {:.1f} s",
                       100.0 * *v.complex.rel_error, a ? "ok" : "no", complex_err, simple_err, b ? "ok" : "no",
                       iqr_half, c ? "ok" : "no", seconds));
}

void criterion_8(const ValidationOutcome& v)
{
    std::size_t high = 0;
    std::size_t better = 0;
    std::string detail;
    for (std::size_t c = 0; c < v.complex.clusters.size(); ++c) {
        const double rc = v.complex.clusters[c].correlation;
        const double rs = v.simple.clusters[c].correlation;
        high += rc >= kCorrelationMin ? 1 : 0;
        better += rc >= rs ? 1 : 0;
        detail += fmt::format("{}{:.3f}/{:.3f}", detail.empty() ? "" : " ", rc, rs);
    }
    report(8, high >= kClustersRequired && better >= kClustersRequired,
           fmt::format("r >= 0.8 in {}/6, complex >= simple in {}/6 (need 5) [complex/simple: {}]", high, better,
                       detail));
}

void criterion_9(const WeatherDataset& ds, const RunConfig& c, const FarmSpec& farm, const ValidationOutcome& v)
{
    const FeedbackReport& fb = *v.feedback;
    std::vector<std::size_t> sorted = fb.matching.permutation;
    std::sort(sorted.begin(), sorted.end());
    bool audit = fb.matching.cost.size() == c.k * c.k;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        audit = audit && sorted[i] == i;
    }
    audit = audit && fb.changed_days.size() == fb.label_changes;

    FarmSpec still = farm;
    still.turbine.thrust_curve = {{0.0, 1e-12}, {still.turbine.cut_out + 5.0, 1e-12}};
    const JensenSolver solver(c.jensen);
    const auto [first, last] = validation_period(c, ds);
    const FeedbackReport zero = farm_feedback_recluster(ds, still, solver, first, last, c.kmeans_options());
    report(9, audit && zero.label_changes == 0,
           fmt::format("reference farm: {} label changes, permutation audit {}; zero-thrust farm: {} changes",
                       fb.label_changes, audit ? "ok" : "bad", zero.label_changes));
}

void criterion_10(const WeatherDataset& ds, const PipelineResult& p, const fs::path& scenario)
{
    const fs::path tmp = fs::temp_directory_path() / fmt::format("windregime-acceptance-{}", std::random_device{}());
    fs::create_directories(tmp);
    write_dataset(ds, tmp / "ds");
    const bool ds_ok = read_dataset(tmp / "ds") == ds;
    write_dataset(read_dataset(tmp / "ds"), tmp / "ds2");
    const bool ds_bytes = slurp(tmp / "ds" / kDataName) == slurp(tmp / "ds2" / kDataName) &&
                          slurp(tmp / "ds" / kManifestName) == slurp(tmp / "ds2" / kManifestName);
    bool raster_ok = true;
    for (std::size_t i = 0; i < p.cluster_results.size(); ++i) {
        const fs::path dir = tmp / fmt::format("raster_{}", i);
        write_field(p.cluster_results[i].deficit, dir);
        raster_ok = raster_ok && read_field(dir) == p.cluster_results[i].deficit;
    }

    setenv("WINDREGIME_LOG", "off", 1);
    const std::string cfg = scenario.string();
    auto run = [&](const fs::path& out) {
        const std::string o = out.string();
        const char* argv[] = {"windregime-cli", "run", "--config", cfg.c_str(), "--out", o.c_str()};
        return cli::run_cli(6, argv);
    };
    const int rc1 = run(tmp / "cli");
    const auto first = tree(tmp / "cli");
    const int rc2 = run(tmp / "cli");
    const auto second = tree(tmp / "cli");
    const bool idempotent = rc1 == 0 && rc2 == 0 && first == second && !first.empty();
    std::error_code ec;
    fs::remove_all(tmp, ec);
    report(10, ds_ok && ds_bytes && raster_ok && idempotent,
           fmt::format("dataset round trip {}, raster round trip {}, CLI re-run {} ({} artifacts)",
                       ds_ok && ds_bytes ? "bit-exact" : "differs", raster_ok ? "bit-exact" : "differs",
                       idempotent ? "byte-identical" : "differs", first.size()));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::string scenario = WINDREGIME_SCENARIO_DIR "/reference.json";
    bool exit_zero = false;
    app.add_option("--scenario", scenario, "Reference run config")->capture_default_str();
    app.add_flag("--exit-zero", exit_zero, "Exit 0 even when a criterion fails");
    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig config = run_config_from_json(read_json_file(scenario), fs::path(scenario).parent_path());
        if (!config.synthetic) {
            throw ValidationError("the acceptance scenario must be synthetic");
        }
        const auto& syn = *config.synthetic;
        const WeatherDataset ds = generate_synthetic(syn.spec, syn.n_days, syn.grid).dataset;
        const FarmSpec farm = resolve_farm(config, ds.grid());
        const auto solver = make_solver(config);

        criterion_1();
        criterion_2(ds, config);
        criterion_3();

        const auto t0 = std::chrono::steady_clock::now();
        const PipelineResult p = run_cluster_pipeline(ds, config, farm, *solver);
        const ValidationOutcome v = run_validation(ds, config, farm, *solver, p);
        const double scenario_seconds = seconds_since(t0);

        criterion_4(p);
        criterion_5(p, farm);
        criterion_6(p, v);
        criterion_7(v, scenario_seconds);
        criterion_8(v);
        criterion_9(ds, config, farm, v);
        criterion_10(ds, p, scenario);
    } catch (const std::exception& e) {
        std::printf("error: %s\n", e.what());
        return 2;
    }
    std::printf("criteria evaluated: %d, passed: %d\n", evaluated, passed);
    return exit_zero || passed == evaluated ? 0 : 1;
}
