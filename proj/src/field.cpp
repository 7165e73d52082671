#include "windregime/field.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "windregime/error.hpp"

namespace windregime {

namespace {

void check_channels(const std::vector<ChannelInfo>& channels)
{
    if (channels.empty()) {
        throw ValidationError("at least one channel is required");
    }
    std::set<std::string> seen;
    for (const auto& c : channels) {
        if (c.name.empty()) {
            throw ValidationError("channel names must be non-empty");
        }
        if (!seen.insert(c.name).second) {
            throw ValidationError("duplicate channel name '" + c.name + "'");
        }
    }
}

void check_finite(std::span<const float> values)
{
    const auto bad = std::find_if(values.begin(), values.end(), [](float v) { return !std::isfinite(v); });
    if (bad != values.end()) {
        throw ValidationError("field values must be finite (index " +
                              std::to_string(std::distance(values.begin(), bad)) + ")");
    }
}

std::size_t find_channel(const std::vector<ChannelInfo>& channels, std::string_view name)
{
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (channels[c].name == name) {
            return c;
        }
    }
    throw LookupError("no channel named '" + std::string(name) + "'");
}

template <typename T>
bool bilinear_impl(std::span<const T> raster, const GridSpec& grid, double row, double col, double& out)
{
    constexpr double eps = 1e-9;
    const double max_r = static_cast<double>(grid.n_lat - 1);
    const double max_c = static_cast<double>(grid.n_lon - 1);
    if (!(row >= -eps && row <= max_r + eps && col >= -eps && col <= max_c + eps)) {
        return false;
    }
    row = std::clamp(row, 0.0, max_r);
    col = std::clamp(col, 0.0, max_c);
    const std::size_t i0 = grid.n_lat > 1 ? std::min(static_cast<std::size_t>(row), grid.n_lat - 2) : 0;
    const std::size_t j0 = grid.n_lon > 1 ? std::min(static_cast<std::size_t>(col), grid.n_lon - 2) : 0;
    const std::size_t i1 = std::min(i0 + 1, grid.n_lat - 1);
    const std::size_t j1 = std::min(j0 + 1, grid.n_lon - 1);
    const double fr = row - static_cast<double>(i0);
    const double fc = col - static_cast<double>(j0);
    const auto v = [&](std::size_t i, std::size_t j) { return static_cast<double>(raster[i * grid.n_lon + j]); };
    out = (1.0 - fr) * ((1.0 - fc) * v(i0, j0) + fc * v(i0, j1)) + fr * ((1.0 - fc) * v(i1, j0) + fc * v(i1, j1));
    return true;
}

} // namespace

GriddedField::GriddedField(GridSpec grid, Timestamp time, std::vector<ChannelInfo> channels, std::vector<float> values)
    : grid_(grid), time_(time), channels_(std::move(channels)), values_(std::move(values))
{
    grid_.validate();
    check_channels(channels_);
    if (values_.size() != channels_.size() * grid_.cells()) {
        throw ValidationError("field value count " + std::to_string(values_.size()) + " does not match " +
                              std::to_string(channels_.size()) + " channels x " + std::to_string(grid_.cells()) +
                              " cells");
    }
    check_finite(values_);
}

std::size_t GriddedField::channel_index(std::string_view name) const
{
    return find_channel(channels_, name);
}

bool GriddedField::has_channel(std::string_view name) const
{
    return std::any_of(channels_.begin(), channels_.end(), [&](const ChannelInfo& c) { return c.name == name; });
}

std::span<const float> GriddedField::channel(std::string_view name) const
{
    return channel(channel_index(name));
}

std::span<const float> GriddedField::channel(std::size_t c) const
{
    return std::span<const float>(values_).subspan(c * grid_.cells(), grid_.cells());
}

WeatherDataset::WeatherDataset(GridSpec grid, std::vector<Timestamp> times, std::vector<ChannelInfo> channels,
                               std::vector<float> data)
    : grid_(grid), times_(std::move(times)), channels_(std::move(channels)), data_(std::move(data))
{
    grid_.validate();
    check_channels(channels_);
    if (times_.empty()) {
        throw ValidationError("dataset must contain at least one time");
    }
    for (std::size_t t = 1; t < times_.size(); ++t) {
        if (!(times_[t - 1] < times_[t])) {
            throw ValidationError("dataset times must be strictly increasing (index " + std::to_string(t) + ")");
        }
    }
    if (data_.size() != times_.size() * field_size()) {
        throw ValidationError("dataset value count does not match times x channels x cells");
    }
    check_finite(data_);
}

std::size_t WeatherDataset::channel_index(std::string_view name) const
{
    return find_channel(channels_, name);
}

bool WeatherDataset::has_channel(std::string_view name) const
{
    return std::any_of(channels_.begin(), channels_.end(), [&](const ChannelInfo& c) { return c.name == name; });
}

std::span<const float> WeatherDataset::channel(std::size_t t, std::size_t c) const
{
    return std::span<const float>(data_).subspan(t * field_size() + c * grid_.cells(), grid_.cells());
}

std::span<const float> WeatherDataset::channel(std::size_t t, std::string_view name) const
{
    return channel(t, channel_index(name));
}

GriddedField WeatherDataset::field(std::size_t t) const
{
    if (t >= times_.size()) {
        throw RangeError("time index " + std::to_string(t) + " out of range");
    }
    const auto first = data_.begin() + static_cast<std::ptrdiff_t>(t * field_size());
    return GriddedField(grid_, times_[t], channels_,
                        std::vector<float>(first, first + static_cast<std::ptrdiff_t>(field_size())));
}

std::size_t WeatherDataset::lower_bound(Timestamp t) const
{
    return static_cast<std::size_t>(std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
}

WeatherDataset extract_window(const WeatherDataset& ds, const DomainWindow& window)
{
    const GridSpec& parent = ds.grid();
    const GridSpec sub = window.apply(parent);
    std::vector<float> data;
    data.reserve(ds.size() * ds.channels().size() * sub.cells());
    for (std::size_t t = 0; t < ds.size(); ++t) {
        for (std::size_t c = 0; c < ds.channels().size(); ++c) {
            const auto src = ds.channel(t, c);
            for (std::size_t i = window.lat_start; i < window.lat_end; ++i) {
                const auto row = src.subspan(i * parent.n_lon + window.lon_start, sub.n_lon);
                data.insert(data.end(), row.begin(), row.end());
            }
        }
    }
    return WeatherDataset(sub, ds.times(), ds.channels(), std::move(data));
}

WeatherDataset extract_period(const WeatherDataset& ds, std::size_t first, std::size_t last)
{
    if (first >= last || last > ds.size()) {
        throw RangeError("period [" + std::to_string(first) + ", " + std::to_string(last) + ") outside dataset of " +
                         std::to_string(ds.size()) + " times");
    }
    const auto n = ds.field_size();
    std::vector<float> data(ds.data().begin() + static_cast<std::ptrdiff_t>(first * n),
                            ds.data().begin() + static_cast<std::ptrdiff_t>(last * n));
    std::vector<Timestamp> times(ds.times().begin() + static_cast<std::ptrdiff_t>(first),
                                 ds.times().begin() + static_cast<std::ptrdiff_t>(last));
    return WeatherDataset(ds.grid(), std::move(times), ds.channels(), std::move(data));
}

std::vector<double> field_vectorize(const GriddedField& field, std::span<const std::string> channels)
{
    std::vector<double> out;
    out.reserve(channels.size() * field.grid().cells());
    for (const auto& name : channels) {
        const auto values = field.channel(name);
        out.insert(out.end(), values.begin(), values.end());
    }
    return out;
}

GriddedField field_from_vector(std::span<const double> values, const GridSpec& grid, Timestamp time,
                               std::vector<ChannelInfo> channels)
{
    std::vector<float> stored(values.begin(), values.end());
    return GriddedField(grid, time, std::move(channels), std::move(stored));
}

bool bilinear_sample(std::span<const float> raster, const GridSpec& grid, double row, double col, double& out)
{
    return bilinear_impl(raster, grid, row, col, out);
}

bool bilinear_sample(std::span<const double> raster, const GridSpec& grid, double row, double col, double& out)
{
    return bilinear_impl(raster, grid, row, col, out);
}

} // namespace windregime
