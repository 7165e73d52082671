#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "windregime/field.hpp"

namespace testutil {

using namespace windregime;

inline Timestamp day(int n)
{
    return Timestamp{std::chrono::sys_days{std::chrono::year{2007} / 1 / 1}} + std::chrono::hours{12} +
           std::chrono::days{n};
}

inline GridSpec small_grid(std::size_t n_lat = 3, std::size_t n_lon = 4)
{
    return GridSpec{55.0, 55.0 + 0.1 * static_cast<double>(n_lat - 1), 2.0, 2.0 + 0.1 * static_cast<double>(n_lon - 1),
                    n_lat, n_lon};
}

// Uniform u/v wind on every day.
inline WeatherDataset uniform_dataset(const GridSpec& grid, const std::vector<std::pair<double, double>>& uv)
{
    std::vector<Timestamp> times;
    std::vector<float> data;
    for (std::size_t t = 0; t < uv.size(); ++t) {
        times.push_back(day(static_cast<int>(t)));
        data.insert(data.end(), grid.cells(), static_cast<float>(uv[t].first));
        data.insert(data.end(), grid.cells(), static_cast<float>(uv[t].second));
    }
    return WeatherDataset(grid, times, {{"u100", "m s-1"}, {"v100", "m s-1"}}, std::move(data));
}

inline WeatherDataset random_dataset(const GridSpec& grid, std::size_t n_times, std::size_t n_channels,
                                     unsigned seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<float> nd(0.0f, 5.0f);
    std::vector<Timestamp> times;
    for (std::size_t t = 0; t < n_times; ++t) {
        times.push_back(day(static_cast<int>(t)));
    }
    std::vector<ChannelInfo> channels;
    for (std::size_t c = 0; c < n_channels; ++c) {
        channels.push_back({"c" + std::to_string(c), "1"});
    }
    std::vector<float> data(n_times * n_channels * grid.cells());
    for (auto& v : data) {
        v = nd(rng);
    }
    return WeatherDataset(grid, times, channels, std::move(data));
}

class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("windregime-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testutil
