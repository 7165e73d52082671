#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "windregime/field.hpp"

namespace windregime {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kDataName = "data.bin";

/// JSON manifest describing a flat float32 little-endian data file laid out
/// as "time,channel,lat,lon".
struct DatasetManifest {
    int format_version = kFormatVersion;
    GridSpec grid;
    std::vector<ChannelInfo> channels;
    std::vector<std::string> times;
    std::string data_file = kDataName;
    std::string dtype = "f32le";
    std::string layout = "time,channel,lat,lon";

    std::size_t element_count() const { return times.size() * channels.size() * grid.cells(); }
};

nlohmann::json grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const DatasetManifest& m);
/// Throws VersionError, ValidationError.
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Reads `manifest.json` (or the given manifest path) and its data file.
/// Accepts either the manifest file itself or the directory containing it.
WeatherDataset read_dataset(const std::filesystem::path& manifest_path);

/// Writes manifest.json + data.bin into dir (created if needed), overwriting.
DatasetManifest write_dataset(const WeatherDataset& ds, const std::filesystem::path& dir);

/// Single-time convenience wrappers used for rasters.
void write_field(const GriddedField& field, const std::filesystem::path& dir);
GriddedField read_field(const std::filesystem::path& manifest_path);

/// Shared helpers for the small JSON files written next to datasets.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace windregime
