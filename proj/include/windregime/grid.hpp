#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>

namespace windregime {

using Timestamp = std::chrono::sys_seconds;

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);
/// Accepts "YYYY-MM-DDTHH:MM:SSZ" (the trailing Z is optional). Throws ValidationError.
Timestamp parse_timestamp(std::string_view text);

/// Regular lat/lon grid, row-major by (lat, lon), row 0 at lat_min.
///
/// A grid with n_lat == 1 (or n_lon == 1) is a single row/column produced by
/// windowing; its extent along that axis collapses to one coordinate and its
/// spacing is reported as 0.
struct GridSpec {
    double lat_min = 0.0;
    double lat_max = 1.0;
    double lon_min = 0.0;
    double lon_max = 1.0;
    std::size_t n_lat = 2;
    std::size_t n_lon = 2;

    /// Throws ValidationError when the geometry is inconsistent.
    void validate() const;

    double dlat() const { return n_lat > 1 ? (lat_max - lat_min) / static_cast<double>(n_lat - 1) : 0.0; }
    double dlon() const { return n_lon > 1 ? (lon_max - lon_min) / static_cast<double>(n_lon - 1) : 0.0; }
    double lat_at(std::size_t i) const { return lat_min + dlat() * static_cast<double>(i); }
    double lon_at(std::size_t j) const { return lon_min + dlon() * static_cast<double>(j); }
    std::size_t cells() const { return n_lat * n_lon; }
    double center_lat() const { return 0.5 * (lat_min + lat_max); }
    double center_lon() const { return 0.5 * (lon_min + lon_max); }

    bool operator==(const GridSpec&) const = default;
};

/// Half-open index window [lat_start, lat_end) x [lon_start, lon_end) into a parent grid.
struct DomainWindow {
    std::size_t lat_start = 0;
    std::size_t lat_end = 0;
    std::size_t lon_start = 0;
    std::size_t lon_end = 0;

    /// Throws RangeError when the window is empty or leaves the parent.
    void validate_against(const GridSpec& parent) const;
    GridSpec apply(const GridSpec& parent) const;

    bool operator==(const DomainWindow&) const = default;
};

/// Window of `parent` covering the given coordinate bounds (cells whose
/// centers lie inside the closed box). Throws RangeError if none do.
DomainWindow window_from_bounds(const GridSpec& parent, double lat_min, double lat_max, double lon_min,
                                double lon_max);

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Plate-carree local frame in meters (x east, y north) about an origin,
/// scaled at the grid's center latitude.
class LocalFrame {
public:
    LocalFrame(const GridSpec& grid, GeoPoint origin);

    Vec2 to_local(GeoPoint p) const;
    GeoPoint to_geo(Vec2 p) const;
    /// Fractional (row, col) grid index of a local point.
    Vec2 to_index(Vec2 p) const;
    /// Local position of cell (i, j).
    Vec2 cell_position(std::size_t i, std::size_t j) const;

    double meters_per_deg_lat() const { return m_per_lat_; }
    double meters_per_deg_lon() const { return m_per_lon_; }
    const GeoPoint& origin() const { return origin_; }

private:
    GridSpec grid_;
    GeoPoint origin_;
    double m_per_lat_;
    double m_per_lon_;
};

inline constexpr double kEarthRadius = 6371000.0;

struct WindPolar {
    double speed = 0.0;
    double theta = 0.0; ///< radians in (-pi, pi], direction the wind blows toward
};

/// Speed and mathematical-convention direction atan2(v, u); theta is 0 for calm.
WindPolar wind_speed_direction(double u, double v);

} // namespace windregime
