#include "windregime/turbine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include "windregime/error.hpp"

using nlohmann::json;

namespace windregime {

void TurbineSpec::validate() const
{
    if (!(rated_power > 0.0) || !(rotor_diameter > 0.0) || !(air_density > 0.0)) {
        throw ValidationError("turbine rated_power, rotor_diameter and air_density must be positive");
    }
    if (!(0.0 < cut_in && cut_in < rated_speed && rated_speed < cut_out)) {
        throw ValidationError("turbine speeds must satisfy 0 < cut_in < rated_speed < cut_out");
    }
    if (thrust_curve.empty()) {
        throw ValidationError("thrust curve must have at least one point");
    }
    for (std::size_t i = 0; i < thrust_curve.size(); ++i) {
        if (!(thrust_curve[i].ct > 0.0 && thrust_curve[i].ct < 1.0)) {
            throw ValidationError("thrust coefficients must lie in (0, 1)");
        }
        if (i > 0 && !(thrust_curve[i].speed > thrust_curve[i - 1].speed)) {
            throw ValidationError("thrust curve speeds must be strictly increasing");
        }
    }
}

double TurbineSpec::rotor_area() const
{
    const double r = 0.5 * rotor_diameter;
    return std::numbers::pi * r * r;
}

void FarmSpec::validate() const
{
    turbine.validate();
    if (turbines.empty()) {
        throw ValidationError("farm needs at least one turbine");
    }
    std::set<std::pair<double, double>> seen;
    for (const auto& p : turbines) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ValidationError("turbine positions must be finite");
        }
        if (!seen.emplace(p.x, p.y).second) {
            throw ValidationError("duplicate turbine position");
        }
    }
}

TurbineSpec default_turbine()
{
    TurbineSpec t;
    t.thrust_curve = {{3.0, 0.8}, {11.4, 0.8}, {25.0, 0.1}};
    return t;
}

FarmSpec default_farm(GeoPoint center)
{
    FarmSpec farm;
    farm.turbine = default_turbine();
    farm.farm_center = center;
    constexpr int n = 10;
    const double spacing = 7.0 * farm.turbine.rotor_diameter;
    const double offset = 0.5 * spacing * (n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            farm.turbines.push_back({j * spacing - offset, i * spacing - offset});
        }
    }
    return farm;
}

double power_curve(const TurbineSpec& spec, double speed)
{
    if (!(speed >= spec.cut_in) || speed >= spec.cut_out) {
        return 0.0;
    }
    if (speed >= spec.rated_speed) {
        return spec.rated_power;
    }
    const double ci3 = spec.cut_in * spec.cut_in * spec.cut_in;
    const double r3 = spec.rated_speed * spec.rated_speed * spec.rated_speed;
    return spec.rated_power * (speed * speed * speed - ci3) / (r3 - ci3);
}

double thrust_coefficient(const TurbineSpec& spec, double speed)
{
    const auto& tc = spec.thrust_curve;
    if (speed <= tc.front().speed) {
        return tc.front().ct;
    }
    if (speed >= tc.back().speed) {
        return tc.back().ct;
    }
    const auto hi = std::upper_bound(tc.begin(), tc.end(), speed,
                                     [](double s, const ThrustPoint& p) { return s < p.speed; });
    const auto lo = hi - 1;
    const double f = (speed - lo->speed) / (hi->speed - lo->speed);
    return lo->ct + f * (hi->ct - lo->ct);
}

Vec2 fitch_drag(const TurbineSpec& spec, Vec2 velocity)
{
    const double speed = std::hypot(velocity.x, velocity.y);
    if (speed == 0.0) {
        return {0.0, 0.0};
    }
    const double scale = -0.5 * thrust_coefficient(spec, speed) * spec.air_density * spec.rotor_area() * speed;
    return {scale * velocity.x, scale * velocity.y};
}

json turbine_to_json(const TurbineSpec& t)
{
    json curve = json::array();
    for (const auto& p : t.thrust_curve) {
        curve.push_back({{"speed", p.speed}, {"ct", p.ct}});
    }
    return json{{"rated_power", t.rated_power}, {"rotor_diameter", t.rotor_diameter},
                {"hub_height", t.hub_height},   {"cut_in", t.cut_in},
                {"rated_speed", t.rated_speed}, {"cut_out", t.cut_out},
                {"thrust_curve", curve},        {"air_density", t.air_density}};
}

TurbineSpec turbine_from_json(const json& j)
{
    try {
        TurbineSpec t = default_turbine();
        t.rated_power = j.value("rated_power", t.rated_power);
        t.rotor_diameter = j.value("rotor_diameter", t.rotor_diameter);
        t.hub_height = j.value("hub_height", t.hub_height);
        t.cut_in = j.value("cut_in", t.cut_in);
        t.rated_speed = j.value("rated_speed", t.rated_speed);
        t.cut_out = j.value("cut_out", t.cut_out);
        t.air_density = j.value("air_density", t.air_density);
        if (j.contains("thrust_curve")) {
            t.thrust_curve.clear();
            for (const auto& p : j.at("thrust_curve")) {
                t.thrust_curve.push_back({p.at("speed").get<double>(), p.at("ct").get<double>()});
            }
        }
        t.validate();
        return t;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid turbine config: ") + e.what());
    }
}

json farm_to_json(const FarmSpec& f)
{
    json positions = json::array();
    for (const auto& p : f.turbines) {
        positions.push_back({p.x, p.y});
    }
    return json{{"turbine", turbine_to_json(f.turbine)},
                {"farm_center", {{"lat", f.farm_center.lat}, {"lon", f.farm_center.lon}}},
                {"turbines", positions}};
}

FarmSpec farm_from_json(const json& j)
{
    try {
        GeoPoint center{56.0, 3.0};
        if (j.contains("farm_center")) {
            center = {j.at("farm_center").at("lat").get<double>(), j.at("farm_center").at("lon").get<double>()};
        }
        FarmSpec farm = default_farm(center);
        if (j.contains("turbine")) {
            farm.turbine = turbine_from_json(j.at("turbine"));
        }
        if (j.contains("turbines")) {
            farm.turbines.clear();
            for (const auto& p : j.at("turbines")) {
                farm.turbines.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
        }
        farm.validate();
        return farm;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid farm config: ") + e.what());
    }
}

} // namespace windregime
