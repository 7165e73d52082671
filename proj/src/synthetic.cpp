#include "windregime/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "windregime/error.hpp"

using nlohmann::json;

namespace windregime {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kReferencePressure = 101325.0; // Pa
constexpr double kAirDensity = 1.225;
constexpr double kEarthRotation = 7.2921e-5;    // rad/s

/// Portable draws on top of mt19937_64: the standard distributions are not
/// specified bit-for-bit across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    std::size_t categorical(const std::vector<double>& cumulative)
    {
        const double u = uniform() * cumulative.back();
        for (std::size_t k = 0; k < cumulative.size(); ++k) {
            if (u < cumulative[k]) {
                return k;
            }
        }
        return cumulative.size() - 1;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

std::vector<ChannelInfo> synthetic_channels(bool pressure)
{
    std::vector<ChannelInfo> ch{{std::string(kChannelU), "m s-1"}, {std::string(kChannelV), "m s-1"}};
    if (pressure) {
        ch.push_back({std::string(kChannelPressure), "Pa"});
    }
    return ch;
}

/// Writes one day's noise-free field into out (channel-major).
void regime_field(const SyntheticRegimeSpec& spec, std::size_t k, const GridSpec& grid, double speed_anomaly,
                  double direction_anomaly, std::vector<double>& out)
{
    const RegimeSpec& r = spec.regimes[k];
    const double speed = r.speed + speed_anomaly;
    const double dir = r.direction + direction_anomaly;
    const double uu = speed * std::cos(dir);
    const double vv = speed * std::sin(dir);
    const double phase = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(spec.regimes.size());
    const std::size_t cells = grid.cells();
    const std::size_t nch = spec.include_pressure ? 3 : 2;
    out.assign(nch * cells, 0.0);

    const LocalFrame frame(grid, {grid.center_lat(), grid.center_lon()});
    const double coriolis = 2.0 * kEarthRotation * std::sin(grid.center_lat() * kPi / 180.0);
    for (std::size_t i = 0; i < grid.n_lat; ++i) {
        const double a = grid.n_lat > 1 ? static_cast<double>(i) / static_cast<double>(grid.n_lat - 1) : 0.0;
        for (std::size_t j = 0; j < grid.n_lon; ++j) {
            const double b = grid.n_lon > 1 ? static_cast<double>(j) / static_cast<double>(grid.n_lon - 1) : 0.0;
            const std::size_t cell = i * grid.n_lon + j;
            out[cell] = uu + r.perturbation * std::sin(kPi * a + phase) * std::cos(kPi * b);
            out[cells + cell] = vv + r.perturbation * std::cos(kPi * a + phase) * std::sin(kPi * b);
            if (spec.include_pressure) {
                // Geostrophic balance for the uniform part of the flow.
                const Vec2 p = frame.cell_position(i, j);
                out[2 * cells + cell] = kReferencePressure + kAirDensity * coriolis * (vv * p.x - uu * p.y);
            }
        }
    }
}

} // namespace

void SyntheticRegimeSpec::validate() const
{
    if (regimes.empty()) {
        throw ValidationError("synthetic spec needs at least one regime");
    }
    double total = 0.0;
    for (const auto& r : regimes) {
        if (!(r.probability >= 0.0) || !std::isfinite(r.speed) || !std::isfinite(r.direction) ||
            !std::isfinite(r.perturbation)) {
            throw ValidationError("regime parameters must be finite with non-negative probability");
        }
        total += r.probability;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("regime probabilities must sum to 1");
    }
    if (!(noise_std >= 0.0) || !(daily_speed_std >= 0.0) || !(daily_direction_std >= 0.0) ||
        !(pressure_noise_std >= 0.0)) {
        throw ValidationError("noise standard deviations must be non-negative");
    }
    if (!(p_stay >= 0.0 && p_stay <= 1.0)) {
        throw ValidationError("p_stay must lie in [0, 1]");
    }
}

SyntheticDataset generate_synthetic(const SyntheticRegimeSpec& spec, std::size_t n_days, const GridSpec& grid)
{
    spec.validate();
    grid.validate();
    if (n_days < 1) {
        throw ValidationError("n_days must be at least 1");
    }

    std::vector<double> cumulative(spec.regimes.size());
    cumulative[0] = spec.regimes[0].probability;
    for (std::size_t k = 1; k < cumulative.size(); ++k) {
        cumulative[k] = cumulative[k - 1] + spec.regimes[k].probability;
    }

    Rng rng(spec.seed);
    const auto channels = synthetic_channels(spec.include_pressure);
    const std::size_t cells = grid.cells();
    std::vector<float> data;
    data.reserve(n_days * channels.size() * cells);
    std::vector<Timestamp> times;
    std::vector<int> labels;
    std::vector<double> day;

    std::size_t regime = 0;
    for (std::size_t t = 0; t < n_days; ++t) {
        if (t == 0) {
            regime = rng.categorical(cumulative);
        } else {
            const bool stay = rng.uniform() < spec.p_stay;
            if (!stay) {
                regime = rng.categorical(cumulative);
            }
        }
        const double ds = spec.daily_speed_std > 0.0 ? spec.daily_speed_std * rng.normal() : 0.0;
        const double dd = spec.daily_direction_std > 0.0 ? spec.daily_direction_std * rng.normal() : 0.0;
        regime_field(spec, regime, grid, ds, dd, day);
        if (spec.noise_std > 0.0) {
            for (std::size_t c = 0; c < 2 * cells; ++c) {
                day[c] += spec.noise_std * rng.normal();
            }
        }
        if (spec.include_pressure && spec.pressure_noise_std > 0.0) {
            for (std::size_t c = 2 * cells; c < 3 * cells; ++c) {
                day[c] += spec.pressure_noise_std * rng.normal();
            }
        }
        data.insert(data.end(), day.begin(), day.end());
        times.push_back(spec.start + std::chrono::days{static_cast<long>(t)});
        labels.push_back(static_cast<int>(regime));
    }
    return {WeatherDataset(grid, std::move(times), channels, std::move(data)), std::move(labels)};
}

GriddedField regime_mean_field(const SyntheticRegimeSpec& spec, std::size_t k, const GridSpec& grid, Timestamp time)
{
    spec.validate();
    if (k >= spec.regimes.size()) {
        throw RangeError("regime index out of range");
    }
    std::vector<double> values;
    regime_field(spec, k, grid, 0.0, 0.0, values);
    return GriddedField(grid, time, synthetic_channels(spec.include_pressure),
                        std::vector<float>(values.begin(), values.end()));
}

SyntheticRegimeSpec synthetic_spec_from_json(const json& j)
{
    try {
        SyntheticRegimeSpec s;
        for (const auto& r : j.at("regimes")) {
            const double direction = r.contains("direction_deg")
                                         ? r.at("direction_deg").get<double>() * std::numbers::pi / 180.0
                                         : r.at("direction").get<double>();
            s.regimes.push_back({r.at("speed").get<double>(), direction,
                                 r.value("perturbation", 0.0), r.at("probability").get<double>()});
        }
        s.noise_std = j.value("noise_std", 0.0);
        s.daily_speed_std = j.value("daily_speed_std", 0.0);
        s.daily_direction_std = j.value("daily_direction_std", 0.0);
        s.p_stay = j.value("p_stay", 0.0);
        s.seed = j.value("seed", std::uint64_t{0});
        s.start = parse_timestamp(j.value("start", std::string("2007-01-01T12:00:00Z")));
        s.include_pressure = j.value("include_pressure", false);
        s.pressure_noise_std = j.value("pressure_noise_std", 0.0);
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid synthetic spec: ") + e.what());
    }
}

json synthetic_spec_to_json(const SyntheticRegimeSpec& s)
{
    json regimes = json::array();
    for (const auto& r : s.regimes) {
        regimes.push_back({{"speed", r.speed},
                           {"direction", r.direction},
                           {"perturbation", r.perturbation},
                           {"probability", r.probability}});
    }
    return json{{"regimes", regimes},
                {"noise_std", s.noise_std},
                {"daily_speed_std", s.daily_speed_std},
                {"daily_direction_std", s.daily_direction_std},
                {"p_stay", s.p_stay},
                {"seed", s.seed},
                {"start", format_timestamp(s.start)},
                {"include_pressure", s.include_pressure},
                {"pressure_noise_std", s.pressure_noise_std}};
}

} // namespace windregime
