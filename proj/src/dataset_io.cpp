#include "windregime/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "windregime/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace windregime {

namespace {

const std::vector<std::string> kManifestKeys = {"channels", "data_file", "dtype", "format_version",
                                                "grid",     "layout",    "times"};

std::uint32_t to_little(std::uint32_t v)
{
    if constexpr (std::endian::native == std::endian::big) {
        return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
    }
    return v;
}

std::vector<char> encode_f32le(std::span<const float> values)
{
    std::vector<char> bytes(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint32_t w = to_little(std::bit_cast<std::uint32_t>(values[i]));
        std::memcpy(bytes.data() + 4 * i, &w, 4);
    }
    return bytes;
}

std::vector<float> decode_f32le(const std::vector<char>& bytes)
{
    std::vector<float> values(bytes.size() / 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t w;
        std::memcpy(&w, bytes.data() + 4 * i, 4);
        values[i] = std::bit_cast<float>(to_little(w));
    }
    return values;
}

fs::path resolve_manifest(const fs::path& p)
{
    return fs::is_directory(p) ? p / kManifestName : p;
}

template <typename T>
T required(const json& j, const char* key)
{
    if (!j.contains(key)) {
        throw ValidationError(std::string("manifest missing key '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("manifest key '") + key + "': " + e.what());
    }
}

} // namespace

json grid_to_json(const GridSpec& g)
{
    return json{{"lat_min", g.lat_min}, {"lat_max", g.lat_max}, {"lon_min", g.lon_min},
                {"lon_max", g.lon_max}, {"n_lat", g.n_lat},     {"n_lon", g.n_lon}};
}

GridSpec grid_from_json(const json& j)
{
    GridSpec g;
    g.lat_min = required<double>(j, "lat_min");
    g.lat_max = required<double>(j, "lat_max");
    g.lon_min = required<double>(j, "lon_min");
    g.lon_max = required<double>(j, "lon_max");
    g.n_lat = required<std::size_t>(j, "n_lat");
    g.n_lon = required<std::size_t>(j, "n_lon");
    g.validate();
    return g;
}

json manifest_to_json(const DatasetManifest& m)
{
    json channels = json::array();
    for (const auto& c : m.channels) {
        channels.push_back({{"name", c.name}, {"units", c.units}});
    }
    return json{{"format_version", m.format_version},
                {"grid", grid_to_json(m.grid)},
                {"channels", channels},
                {"times", m.times},
                {"data_file", m.data_file},
                {"dtype", m.dtype},
                {"layout", m.layout}};
}

DatasetManifest manifest_from_json(const json& j)
{
    if (!j.is_object()) {
        throw ValidationError("manifest must be a JSON object");
    }
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items()) {
        keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    if (keys != kManifestKeys) {
        throw ValidationError("manifest keys must be exactly {format_version, grid, channels, times, data_file, "
                              "dtype, layout}");
    }
    DatasetManifest m;
    m.format_version = required<int>(j, "format_version");
    if (m.format_version != kFormatVersion) {
        throw VersionError("unsupported dataset format_version " + std::to_string(m.format_version));
    }
    m.grid = grid_from_json(j.at("grid"));
    for (const auto& c : j.at("channels")) {
        m.channels.push_back({required<std::string>(c, "name"), required<std::string>(c, "units")});
    }
    m.times = required<std::vector<std::string>>(j, "times");
    m.data_file = required<std::string>(j, "data_file");
    m.dtype = required<std::string>(j, "dtype");
    m.layout = required<std::string>(j, "layout");
    if (m.dtype != "f32le") {
        throw ValidationError("unsupported dtype '" + m.dtype + "'");
    }
    if (m.layout != "time,channel,lat,lon") {
        throw ValidationError("unsupported layout '" + m.layout + "'");
    }
    if (m.data_file.empty() || fs::path(m.data_file).is_absolute()) {
        throw ValidationError("data_file must be a relative path");
    }
    return m;
}

WeatherDataset read_dataset(const fs::path& manifest_path)
{
    const fs::path manifest_file = resolve_manifest(manifest_path);
    const DatasetManifest m = manifest_from_json(read_json_file(manifest_file));

    const fs::path data_path = manifest_file.parent_path() / m.data_file;
    std::ifstream in(data_path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open data file " + data_path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != m.element_count() * 4) {
        throw CorruptionError("data file " + data_path.string() + " holds " + std::to_string(bytes.size()) +
                              " bytes, manifest declares " + std::to_string(m.element_count() * 4));
    }

    std::vector<Timestamp> times;
    times.reserve(m.times.size());
    for (const auto& t : m.times) {
        times.push_back(parse_timestamp(t));
    }
    return WeatherDataset(m.grid, std::move(times), m.channels, decode_f32le(bytes));
}

DatasetManifest write_dataset(const WeatherDataset& ds, const fs::path& dir)
{
    DatasetManifest m;
    m.grid = ds.grid();
    m.channels = ds.channels();
    for (const auto t : ds.times()) {
        m.times.push_back(format_timestamp(t));
    }

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    }
    const auto bytes = encode_f32le(ds.data());
    {
        std::ofstream out(dir / m.data_file, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw IoError("failed writing " + (dir / m.data_file).string());
        }
    }
    write_json_file(dir / kManifestName, manifest_to_json(m));
    return m;
}

void write_field(const GriddedField& field, const fs::path& dir)
{
    write_dataset(WeatherDataset(field.grid(), {field.time()}, field.channels(),
                                 std::vector<float>(field.values().begin(), field.values().end())),
                  dir);
}

GriddedField read_field(const fs::path& manifest_path)
{
    const WeatherDataset ds = read_dataset(manifest_path);
    if (ds.size() != 1) {
        throw ValidationError("raster file must hold exactly one time, found " + std::to_string(ds.size()));
    }
    return ds.field(0);
}

json read_json_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const fs::path& path, const json& j)
{
    write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace windregime
