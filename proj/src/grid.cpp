#include "windregime/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <utility>

#include "windregime/error.hpp"

namespace windregime {

std::string format_timestamp(Timestamp t)
{
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

Timestamp parse_timestamp(std::string_view text)
{
    using namespace std::chrono;
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char tail = '\0';
    const std::string str(text);
    const int got = std::sscanf(str.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%c", &y, &mo, &d, &h, &mi, &s, &tail);
    if (got < 6 || (got == 7 && tail != 'Z') || str.size() > 20) {
        throw ValidationError("malformed timestamp '" + str + "', expected YYYY-MM-DDTHH:MM:SSZ");
    }
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
        throw ValidationError("invalid calendar timestamp '" + str + "'");
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

void GridSpec::validate() const
{
    if (n_lat < 1 || n_lon < 1) {
        throw ValidationError("grid must have at least one row and one column");
    }
    if (!std::isfinite(lat_min) || !std::isfinite(lat_max) || !std::isfinite(lon_min) || !std::isfinite(lon_max)) {
        throw ValidationError("grid bounds must be finite");
    }
    if (n_lat >= 2 ? !(lat_min < lat_max) : lat_min != lat_max) {
        throw ValidationError("grid latitude bounds inconsistent with n_lat");
    }
    if (n_lon >= 2 ? !(lon_min < lon_max) : lon_min != lon_max) {
        throw ValidationError("grid longitude bounds inconsistent with n_lon");
    }
    if (lat_min < -90.0 || lat_max > 90.0) {
        throw ValidationError("grid latitude outside [-90, 90]");
    }
}

void DomainWindow::validate_against(const GridSpec& parent) const
{
    if (lat_start >= lat_end || lon_start >= lon_end) {
        throw RangeError("domain window is empty");
    }
    if (lat_end > parent.n_lat || lon_end > parent.n_lon) {
        throw RangeError("domain window exceeds parent grid (" + std::to_string(parent.n_lat) + "x" +
                         std::to_string(parent.n_lon) + ")");
    }
}

GridSpec DomainWindow::apply(const GridSpec& parent) const
{
    validate_against(parent);
    GridSpec g;
    g.n_lat = lat_end - lat_start;
    g.n_lon = lon_end - lon_start;
    g.lat_min = parent.lat_at(lat_start);
    g.lat_max = parent.lat_at(lat_end - 1);
    g.lon_min = parent.lon_at(lon_start);
    g.lon_max = parent.lon_at(lon_end - 1);
    return g;
}

DomainWindow window_from_bounds(const GridSpec& parent, double lat_min, double lat_max, double lon_min,
                                double lon_max)
{
    const auto span = [](double lo, double hi, double origin, double step, std::size_t n) {
        std::size_t first = n, last = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = origin + step * static_cast<double>(i);
            if (c >= lo - 1e-9 && c <= hi + 1e-9) {
                first = std::min(first, i);
                last = i + 1;
            }
        }
        return std::pair{first, last};
    };
    const auto [r0, r1] = span(lat_min, lat_max, parent.lat_min, parent.dlat(), parent.n_lat);
    const auto [c0, c1] = span(lon_min, lon_max, parent.lon_min, parent.dlon(), parent.n_lon);
    if (r0 >= r1 || c0 >= c1) {
        throw RangeError("window bounds select no grid cells");
    }
    return DomainWindow{r0, r1, c0, c1};
}

LocalFrame::LocalFrame(const GridSpec& grid, GeoPoint origin)
    : grid_(grid), origin_(origin)
{
    constexpr double deg = std::numbers::pi / 180.0;
    m_per_lat_ = kEarthRadius * deg;
    m_per_lon_ = kEarthRadius * deg * std::cos(grid.center_lat() * deg);
}

Vec2 LocalFrame::to_local(GeoPoint p) const
{
    return {(p.lon - origin_.lon) * m_per_lon_, (p.lat - origin_.lat) * m_per_lat_};
}

GeoPoint LocalFrame::to_geo(Vec2 p) const
{
    return {origin_.lat + p.y / m_per_lat_, origin_.lon + p.x / m_per_lon_};
}

Vec2 LocalFrame::to_index(Vec2 p) const
{
    const GeoPoint g = to_geo(p);
    const double dl = grid_.dlat();
    const double dn = grid_.dlon();
    // Degenerate single-row/column axes map everything onto index 0.
    const double row = dl > 0.0 ? (g.lat - grid_.lat_min) / dl : 0.0;
    const double col = dn > 0.0 ? (g.lon - grid_.lon_min) / dn : 0.0;
    return {row, col};
}

Vec2 LocalFrame::cell_position(std::size_t i, std::size_t j) const
{
    return to_local({grid_.lat_at(i), grid_.lon_at(j)});
}

WindPolar wind_speed_direction(double u, double v)
{
    const double speed = std::hypot(u, v);
    if (speed == 0.0) {
        return {0.0, 0.0};
    }
    double theta = std::atan2(v, u);
    if (theta <= -std::numbers::pi) {
        theta = std::numbers::pi;
    }
    return {speed, theta};
}

} // namespace windregime
