#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "windregime/field.hpp"
#include "windregime/turbine.hpp"

namespace windregime {

/// Farm-absent hub-height wind over the simulation domain (u100, v100).
class InflowCondition {
public:
    /// Keeps only the u100/v100 channels. Throws LookupError if either is missing.
    explicit InflowCondition(const GriddedField& field);

    const GriddedField& field() const { return field_; }
    const GridSpec& grid() const { return field_.grid(); }
    Timestamp time() const { return field_.time(); }
    std::span<const float> u() const { return field_.channel(0); }
    std::span<const float> v() const { return field_.channel(1); }

private:
    GriddedField field_;
};

/// Steady hub-height result of one simulation: speed-deficit raster
/// (free-stream minus waked speed, >= 0) and farm power.
struct WakeResult {
    GriddedField deficit;                   ///< single channel "deficit", m/s
    double farm_power = 0.0;                ///< W
    std::vector<double> per_turbine_power;  ///< W; empty for imported results
    std::vector<double> per_turbine_speed;  ///< effective hub speed, m/s
    std::vector<Vec2> per_turbine_drag;     ///< Fitch momentum sink on the flow, N
    Timestamp inflow_time{};

    /// Throws ValidationError when deficit < 0, power outside [0, rated] or
    /// farm_power differs from the per-turbine sum.
    void validate(double rated_farm_power) const;
};

class FlowSolver {
public:
    virtual ~FlowSolver() = default;
    virtual WakeResult simulate(const InflowCondition& inflow, const FarmSpec& farm) const = 0;
    virtual std::string name() const = 0;
};

struct JensenOptions {
    double k_wake = 0.05;
    /// Each raster cell reports the mean deficit over an n x n lattice of
    /// sample points; 1 evaluates only the cell center.
    std::size_t samples_per_cell = 8;
};

/// Top-hat single-wake deficit fraction at downstream distance x and radial
/// offset r: (1 - sqrt(1 - ct)) / (1 + k x / r0)^2 inside r <= r0 + k x, else 0.
double jensen_deficit_fraction(double ct, double x, double r, double r0, double k_wake);

/// Jensen wakes with root-sum-square superposition; turbines are processed
/// from upstream to downstream and cell deficits use the cell-local inflow
/// direction. Throws ValidationError when a turbine lies outside the domain.
WakeResult jensen_simulate(const InflowCondition& inflow, const FarmSpec& farm, const JensenOptions& options = {});

class JensenSolver final : public FlowSolver {
public:
    explicit JensenSolver(JensenOptions options = {}) : options_(options) {}
    WakeResult simulate(const InflowCondition& inflow, const FarmSpec& farm) const override
    {
        return jensen_simulate(inflow, farm, options_);
    }
    std::string name() const override { return "jensen"; }
    const JensenOptions& options() const { return options_; }

private:
    JensenOptions options_;
};

/// Counts simulate() calls made through it.
class CountingSolver final : public FlowSolver {
public:
    explicit CountingSolver(const FlowSolver& inner) : inner_(inner) {}
    WakeResult simulate(const InflowCondition& inflow, const FarmSpec& farm) const override;
    std::string name() const override { return inner_.name(); }
    std::size_t calls() const { return calls_; }

private:
    const FlowSolver& inner_;
    mutable std::atomic<std::size_t> calls_{0};
};

/// Builds the inflow from day t of ds and delegates to the solver.
WakeResult simulate_day(const WeatherDataset& ds, std::size_t t_index, const FarmSpec& farm,
                        const FlowSolver& solver);

inline constexpr const char* kPowerSidecarName = "power.json";

/// Wraps an externally computed deficit raster. Throws ValidationError when
/// the raster grid differs from the inflow grid, a deficit is negative or the
/// power is negative.
WakeResult import_external_result(const std::filesystem::path& deficit_manifest, double farm_power,
                                  const InflowCondition& inflow);

/// Writes the deficit raster (manifest.json + data.bin) and power.json
/// {"farm_power_w": ...} into dir.
void export_wake_result(const WakeResult& result, const std::filesystem::path& dir);
/// Reads a directory written by export_wake_result (or by an external tool).
WakeResult read_wake_result(const std::filesystem::path& dir, const InflowCondition& inflow);

/// Solver backed by precomputed results, one directory per inflow timestamp.
class ExternalSolver final : public FlowSolver {
public:
    explicit ExternalSolver(std::map<Timestamp, std::filesystem::path> results) : results_(std::move(results)) {}
    /// Throws DependencyError if no result exists for the inflow timestamp.
    WakeResult simulate(const InflowCondition& inflow, const FarmSpec& farm) const override;
    std::string name() const override { return "external"; }

private:
    std::map<Timestamp, std::filesystem::path> results_;
};

} // namespace windregime
