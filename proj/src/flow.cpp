#include "windregime/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "windregime/dataset_io.hpp"
#include "windregime/error.hpp"
#include "windregime/parallel.hpp"

namespace fs = std::filesystem;

namespace windregime {

namespace {

GriddedField select_wind(const GriddedField& f)
{
    const auto u = f.channel(kChannelU);
    const auto v = f.channel(kChannelV);
    std::vector<float> values(u.begin(), u.end());
    values.insert(values.end(), v.begin(), v.end());
    std::vector<ChannelInfo> ch{f.channels()[f.channel_index(kChannelU)], f.channels()[f.channel_index(kChannelV)]};
    return GriddedField(f.grid(), f.time(), std::move(ch), std::move(values));
}

GriddedField deficit_field(const GridSpec& grid, Timestamp time, std::vector<float> values)
{
    return GriddedField(grid, time, {{std::string(kChannelDeficit), "m s-1"}}, std::move(values));
}

struct TurbineState {
    Vec2 pos;
    double induction_free = 0.0; ///< 1 - sqrt(1 - C_T) at free-stream speed
    double induction = 0.0;      ///< same at the effective speed, once known
    bool done = false;
};

/// Sum of squared deficit fractions at point p for flow direction e.
double squared_deficit_sum(const std::vector<TurbineState>& turbines, Vec2 p, Vec2 e, double r0, double k_wake,
                           std::size_t skip)
{
    double sum = 0.0;
    for (std::size_t s = 0; s < turbines.size(); ++s) {
        if (s == skip) {
            continue;
        }
        const TurbineState& ts = turbines[s];
        const double dx = p.x - ts.pos.x;
        const double dy = p.y - ts.pos.y;
        const double x = dx * e.x + dy * e.y;
        if (x <= 0.0) {
            continue;
        }
        const double radius = r0 + k_wake * x;
        const double r2 = std::max(0.0, dx * dx + dy * dy - x * x);
        if (r2 > radius * radius) {
            continue;
        }
        const double grow = 1.0 + k_wake * x / r0;
        const double a = ts.done ? ts.induction : ts.induction_free;
        const double delta = a / (grow * grow);
        sum += delta * delta;
    }
    return sum;
}

} // namespace

InflowCondition::InflowCondition(const GriddedField& field)
    : field_(select_wind(field))
{
}

void WakeResult::validate(double rated_farm_power) const
{
    if (deficit.channels().size() != 1) {
        throw ValidationError("wake deficit must be a single-channel raster");
    }
    for (float d : deficit.values()) {
        if (d < 0.0f) {
            throw ValidationError("wake deficit must be non-negative");
        }
    }
    if (!(farm_power >= 0.0) || farm_power > rated_farm_power * (1.0 + 1e-12)) {
        throw ValidationError("farm power outside [0, rated farm power]");
    }
    if (!per_turbine_power.empty()) {
        const double sum = std::accumulate(per_turbine_power.begin(), per_turbine_power.end(), 0.0);
        if (std::abs(sum - farm_power) > 1e-9 * std::max(1.0, farm_power)) {
            throw ValidationError("farm power differs from the per-turbine sum");
        }
    }
}

double jensen_deficit_fraction(double ct, double x, double r, double r0, double k_wake)
{
    if (x <= 0.0 || std::abs(r) > r0 + k_wake * x) {
        return 0.0;
    }
    const double grow = 1.0 + k_wake * x / r0;
    return (1.0 - std::sqrt(1.0 - ct)) / (grow * grow);
}

WakeResult jensen_simulate(const InflowCondition& inflow, const FarmSpec& farm, const JensenOptions& options)
{
    farm.validate();
    if (!(options.k_wake > 0.0)) {
        throw ValidationError("k_wake must be positive");
    }
    if (options.samples_per_cell < 1) {
        throw ValidationError("samples_per_cell must be at least 1");
    }
    const GridSpec& grid = inflow.grid();
    const LocalFrame frame(grid, farm.farm_center);
    const auto u = inflow.u();
    const auto v = inflow.v();
    const TurbineSpec& spec = farm.turbine;
    const double r0 = 0.5 * spec.rotor_diameter;
    const std::size_t n = farm.turbines.size();

    std::vector<TurbineState> turbines(n);
    std::vector<Vec2> local_flow(n);
    Vec2 mean_flow{};
    for (std::size_t t = 0; t < n; ++t) {
        const Vec2 pos = farm.turbines[t];
        const Vec2 idx = frame.to_index(pos);
        double ut = 0.0, vt = 0.0;
        if (!bilinear_sample(u, grid, idx.x, idx.y, ut) || !bilinear_sample(v, grid, idx.x, idx.y, vt)) {
            throw ValidationError("turbine " + std::to_string(t) + " lies outside the simulation domain");
        }
        turbines[t].pos = pos;
        local_flow[t] = {ut, vt};
        mean_flow.x += ut;
        mean_flow.y += vt;
        turbines[t].induction_free = 1.0 - std::sqrt(1.0 - thrust_coefficient(spec, std::hypot(ut, vt)));
    }
    const double mean_speed = std::hypot(mean_flow.x, mean_flow.y);
    const Vec2 ref = mean_speed > 0.0 ? Vec2{mean_flow.x / mean_speed, mean_flow.y / mean_speed} : Vec2{1.0, 0.0};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return turbines[a].pos.x * ref.x + turbines[a].pos.y * ref.y <
               turbines[b].pos.x * ref.x + turbines[b].pos.y * ref.y;
    });

    WakeResult result{deficit_field(grid, inflow.time(), std::vector<float>(grid.cells(), 0.0f)), 0.0, {}, {}, {}, {}};
    result.inflow_time = inflow.time();
    result.per_turbine_power.assign(n, 0.0);
    result.per_turbine_speed.assign(n, 0.0);
    result.per_turbine_drag.assign(n, Vec2{});
    for (const std::size_t t : order) {
        const double speed = std::hypot(local_flow[t].x, local_flow[t].y);
        double effective = 0.0;
        Vec2 e{1.0, 0.0};
        if (speed > 0.0) {
            e = {local_flow[t].x / speed, local_flow[t].y / speed};
            const double frac = std::min(1.0, std::sqrt(squared_deficit_sum(turbines, turbines[t].pos, e, r0,
                                                                            options.k_wake, t)));
            effective = speed * (1.0 - frac);
        }
        turbines[t].induction = 1.0 - std::sqrt(1.0 - thrust_coefficient(spec, effective));
        turbines[t].done = true;
        result.per_turbine_speed[t] = effective;
        result.per_turbine_power[t] = power_curve(spec, effective);
        result.per_turbine_drag[t] = fitch_drag(spec, {e.x * effective, e.y * effective});
    }
    result.farm_power = std::accumulate(result.per_turbine_power.begin(), result.per_turbine_power.end(), 0.0);

    // Sample lattice offsets within a cell, in meters.
    const std::size_t m = options.samples_per_cell;
    const double cell_h = grid.dlat() * frame.meters_per_deg_lat();
    const double cell_w = grid.dlon() * frame.meters_per_deg_lon();
    std::vector<double> offsets(m);
    for (std::size_t s = 0; s < m; ++s) {
        offsets[s] = (static_cast<double>(s) + 0.5) / static_cast<double>(m) - 0.5;
    }

    std::vector<float> raster(grid.cells(), 0.0f);
    parallel_for(grid.n_lat, [&](std::size_t i) {
        for (std::size_t j = 0; j < grid.n_lon; ++j) {
            const std::size_t cell = i * grid.n_lon + j;
            const double speed = std::hypot(static_cast<double>(u[cell]), static_cast<double>(v[cell]));
            if (speed == 0.0) {
                continue;
            }
            const Vec2 e{u[cell] / speed, v[cell] / speed};
            const Vec2 center = frame.cell_position(i, j);
            double total = 0.0;
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = 0; b < m; ++b) {
                    const Vec2 p{center.x + offsets[b] * cell_w, center.y + offsets[a] * cell_h};
                    const double sum = squared_deficit_sum(turbines, p, e, r0, options.k_wake, n);
                    total += std::min(1.0, std::sqrt(sum));
                }
            }
            raster[cell] = static_cast<float>(speed * total / static_cast<double>(m * m));
        }
    });
    result.deficit = deficit_field(grid, inflow.time(), std::move(raster));
    return result;
}

WakeResult CountingSolver::simulate(const InflowCondition& inflow, const FarmSpec& farm) const
{
    ++calls_;
    return inner_.simulate(inflow, farm);
}

WakeResult simulate_day(const WeatherDataset& ds, std::size_t t_index, const FarmSpec& farm, const FlowSolver& solver)
{
    if (t_index >= ds.size()) {
        throw RangeError("day index " + std::to_string(t_index) + " outside dataset");
    }
    return solver.simulate(InflowCondition(ds.field(t_index)), farm);
}

WakeResult import_external_result(const fs::path& deficit_manifest, double farm_power, const InflowCondition& inflow)
{
    const GriddedField raster = read_field(deficit_manifest);
    if (!(raster.grid() == inflow.grid())) {
        throw ValidationError("external deficit grid does not match the simulation domain");
    }
    if (raster.channels().size() != 1 || raster.channels()[0].name != kChannelDeficit) {
        throw ValidationError("external result must hold a single 'deficit' channel");
    }
    for (float d : raster.values()) {
        if (d < 0.0f) {
            throw ValidationError("external deficit contains negative values");
        }
    }
    if (!std::isfinite(farm_power) || farm_power < 0.0) {
        throw ValidationError("external farm power must be a non-negative number");
    }
    WakeResult result{deficit_field(inflow.grid(), inflow.time(),
                                    std::vector<float>(raster.values().begin(), raster.values().end())),
                      0.0, {}, {}, {}, {}};
    result.farm_power = farm_power;
    result.inflow_time = inflow.time();
    return result;
}

void export_wake_result(const WakeResult& result, const fs::path& dir)
{
    write_field(result.deficit, dir);
    write_json_file(dir / kPowerSidecarName, nlohmann::json{{"farm_power_w", result.farm_power}});
}

WakeResult read_wake_result(const fs::path& dir, const InflowCondition& inflow)
{
    const auto sidecar = read_json_file(dir / kPowerSidecarName);
    if (!sidecar.contains("farm_power_w") || !sidecar.at("farm_power_w").is_number()) {
        throw ValidationError(dir.string() + "/" + kPowerSidecarName + " lacks a numeric farm_power_w");
    }
    return import_external_result(dir / kManifestName, sidecar.at("farm_power_w").get<double>(), inflow);
}

WakeResult ExternalSolver::simulate(const InflowCondition& inflow, const FarmSpec& farm) const
{
    const auto it = results_.find(inflow.time());
    if (it == results_.end()) {
        throw DependencyError("no external result for inflow at " + format_timestamp(inflow.time()));
    }
    WakeResult r = read_wake_result(it->second, inflow);
    r.validate(farm.rated_farm_power());
    return r;
}

} // namespace windregime
