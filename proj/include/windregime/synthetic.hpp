#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "windregime/field.hpp"

namespace windregime {

/// One synthetic weather regime: a uniform hub-height flow plus a smooth
/// sinusoidal pattern.
struct RegimeSpec {
    double speed = 10.0;        ///< m/s
    double direction = 0.0;     ///< radians, direction the wind blows toward
    double perturbation = 0.0;  ///< m/s amplitude of the sinusoidal pattern
    double probability = 1.0;   ///< occurrence probability when a new regime is drawn
};

/// Parameters of the Markov-chain regime generator.
///
/// Day-level anomalies (daily_speed_std, daily_direction_std) are coherent
/// over the whole domain; noise_std is i.i.d. per cell and channel.
struct SyntheticRegimeSpec {
    std::vector<RegimeSpec> regimes;
    double noise_std = 0.0;            ///< m/s
    double daily_speed_std = 0.0;      ///< m/s
    double daily_direction_std = 0.0;  ///< radians
    double p_stay = 0.0;
    std::uint64_t seed = 0;
    Timestamp start = Timestamp{};     ///< timestamp of day 0
    bool include_pressure = false;     ///< add a geostrophically consistent msl channel
    double pressure_noise_std = 0.0;   ///< Pa

    /// Throws ValidationError.
    void validate() const;
};

struct SyntheticDataset {
    WeatherDataset dataset;
    std::vector<int> labels;
};

/// Day t keeps regime t-1 with probability p_stay, otherwise redraws from the
/// occurrence probabilities. Deterministic in spec.seed (mt19937_64 with
/// Box-Muller normals).
SyntheticDataset generate_synthetic(const SyntheticRegimeSpec& spec, std::size_t n_days, const GridSpec& grid);

/// Mean (noise-free) u100/v100[/msl] field of regime k.
GriddedField regime_mean_field(const SyntheticRegimeSpec& spec, std::size_t k, const GridSpec& grid, Timestamp time);

/// JSON form: {"regimes":[{"speed","direction","perturbation","probability"}], "noise_std",
/// "daily_speed_std", "daily_direction_std", "p_stay", "seed", "start", "include_pressure",
/// "pressure_noise_std"}; angles in radians ("direction_deg" is accepted instead of "direction").
SyntheticRegimeSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json synthetic_spec_to_json(const SyntheticRegimeSpec& spec);

} // namespace windregime
