#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "windregime/grid.hpp"

namespace windregime {

struct ChannelInfo {
    std::string name;
    std::string units;

    bool operator==(const ChannelInfo&) const = default;
};

inline constexpr std::string_view kChannelU = "u100";
inline constexpr std::string_view kChannelV = "v100";
inline constexpr std::string_view kChannelPressure = "msl";
inline constexpr std::string_view kChannelDeficit = "deficit";

/// One timestamp of one or more scalar channels on a grid (a "datapoint").
///
/// Values are stored channel-major, then row-major by (lat, lon), as float32
/// to match the on-disk dataset format exactly.
class GriddedField {
public:
    GriddedField(GridSpec grid, Timestamp time, std::vector<ChannelInfo> channels, std::vector<float> values);

    const GridSpec& grid() const { return grid_; }
    Timestamp time() const { return time_; }
    const std::vector<ChannelInfo>& channels() const { return channels_; }
    std::span<const float> values() const { return values_; }

    /// Throws LookupError for unknown names.
    std::size_t channel_index(std::string_view name) const;
    bool has_channel(std::string_view name) const;
    std::span<const float> channel(std::string_view name) const;
    std::span<const float> channel(std::size_t c) const;
    float at(std::size_t c, std::size_t i, std::size_t j) const { return values_[(c * grid_.n_lat + i) * grid_.n_lon + j]; }

    bool operator==(const GriddedField&) const = default;

private:
    GridSpec grid_;
    Timestamp time_;
    std::vector<ChannelInfo> channels_;
    std::vector<float> values_;
};

/// Time-ordered stack of fields sharing one grid and channel set.
/// Layout is "time,channel,lat,lon".
class WeatherDataset {
public:
    WeatherDataset(GridSpec grid, std::vector<Timestamp> times, std::vector<ChannelInfo> channels,
                   std::vector<float> data);

    const GridSpec& grid() const { return grid_; }
    const std::vector<Timestamp>& times() const { return times_; }
    const std::vector<ChannelInfo>& channels() const { return channels_; }
    std::span<const float> data() const { return data_; }
    std::size_t size() const { return times_.size(); }
    std::size_t field_size() const { return channels_.size() * grid_.cells(); }

    std::size_t channel_index(std::string_view name) const;
    bool has_channel(std::string_view name) const;
    /// Values of one channel at one time, row-major.
    std::span<const float> channel(std::size_t t, std::size_t c) const;
    std::span<const float> channel(std::size_t t, std::string_view name) const;
    GriddedField field(std::size_t t) const;

    /// Index of the first time >= t, or size() if none.
    std::size_t lower_bound(Timestamp t) const;

    bool operator==(const WeatherDataset&) const = default;

private:
    GridSpec grid_;
    std::vector<Timestamp> times_;
    std::vector<ChannelInfo> channels_;
    std::vector<float> data_;
};

/// Copy of `ds` restricted to a window of its grid. Throws RangeError.
WeatherDataset extract_window(const WeatherDataset& ds, const DomainWindow& window);

/// Copy of `ds` restricted to time indices [first, last).
WeatherDataset extract_period(const WeatherDataset& ds, std::size_t first, std::size_t last);

/// Concatenation of the named channels in the given order, each row-major.
std::vector<double> field_vectorize(const GriddedField& field, std::span<const std::string> channels);

/// Inverse of field_vectorize.
GriddedField field_from_vector(std::span<const double> values, const GridSpec& grid, Timestamp time,
                               std::vector<ChannelInfo> channels);

/// Bilinear sample of a row-major raster at fractional (row, col); false when outside.
bool bilinear_sample(std::span<const float> raster, const GridSpec& grid, double row, double col, double& out);
bool bilinear_sample(std::span<const double> raster, const GridSpec& grid, double row, double col, double& out);

} // namespace windregime
