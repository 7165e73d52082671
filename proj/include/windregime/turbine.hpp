#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "windregime/grid.hpp"

namespace windregime {

struct ThrustPoint {
    double speed = 0.0; ///< m/s
    double ct = 0.0;
};

struct TurbineSpec {
    double rated_power = 5.0e6;    ///< W
    double rotor_diameter = 126.0; ///< m
    double hub_height = 100.0;     ///< m
    double cut_in = 3.0;           ///< m/s
    double rated_speed = 11.4;     ///< m/s
    double cut_out = 25.0;         ///< m/s
    std::vector<ThrustPoint> thrust_curve;
    double air_density = 1.225;    ///< kg/m^3

    /// Throws ValidationError.
    void validate() const;
    double rotor_area() const;
};

struct FarmSpec {
    std::vector<Vec2> turbines; ///< meters east/north of farm_center
    TurbineSpec turbine;
    GeoPoint farm_center;

    void validate() const;
    double rated_farm_power() const { return static_cast<double>(turbines.size()) * turbine.rated_power; }
};

/// 5 MW, D = 126 m, hub 100 m, cut-in 3, rated 11.4, cut-out 25 m/s.
/// C_T = 0.8 up to rated speed, then linear to 0.1 at cut-out.
TurbineSpec default_turbine();

/// 10 x 10 array at 7 rotor diameters (882 m) centered on `center`.
FarmSpec default_farm(GeoPoint center = {56.0, 3.0});

/// Zero below cut-in and at/above cut-out, rated on [rated_speed, cut_out),
/// cubic ramp rated * (v^3 - vci^3) / (vr^3 - vci^3) in between.
double power_curve(const TurbineSpec& spec, double speed);

/// Piecewise-linear C_T lookup, clamped to the table ends.
double thrust_coefficient(const TurbineSpec& spec, double speed);

/// Drag force 0.5 * C_T * rho * A * V|V| acting on the flow (opposes V).
Vec2 fitch_drag(const TurbineSpec& spec, Vec2 velocity);

nlohmann::json turbine_to_json(const TurbineSpec& spec);
TurbineSpec turbine_from_json(const nlohmann::json& j);
nlohmann::json farm_to_json(const FarmSpec& farm);
/// Accepts {"turbine": {...}, "farm_center": {"lat","lon"}, "turbines": [[x,y],...]};
/// a missing "turbines" key expands to the default 10 x 10 layout.
FarmSpec farm_from_json(const nlohmann::json& j);

} // namespace windregime
