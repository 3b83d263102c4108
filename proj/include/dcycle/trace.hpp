#pragma once

#include <dcycle/error.hpp>
#include <dcycle/format.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dcycle {

/// Conversion between km/h differences per 1 s sample and m/s².
inline constexpr double kKmhPerMs = 3.6;

struct Record {
    std::int64_t t = 0;  // seconds
    double v = 0.0;      // km/h
    std::optional<double> lat;
    std::optional<double> lon;

    bool has_coords() const { return lat.has_value() && lon.has_value(); }
    friend bool operator==(const Record&, const Record&) = default;
};

struct SpeedTrace {
    std::string source_id;
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    std::vector<double> speeds() const {
        std::vector<double> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.v);
        return out;
    }
};

/// Builds a contiguous 1 Hz trace starting at `t0` with no coordinates.
inline SpeedTrace make_trace(std::vector<double> speeds, std::string source_id = "trace",
                             std::int64_t t0 = 0) {
    SpeedTrace trace{std::move(source_id), {}};
    trace.records.reserve(speeds.size());
    for (std::size_t i = 0; i < speeds.size(); ++i)
        trace.records.push_back({t0 + static_cast<std::int64_t>(i), speeds[i], {}, {}});
    return trace;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        cells.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return cells;
}

template <class T>
std::optional<T> parse_number(std::string_view cell) {
    T value{};
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) return std::nullopt;
    }
    return value;
}

}  // namespace detail

/// Parses `t,v_kmh[,lat,lon]` CSV. Columns are located by header name, so
/// extra columns (fuel rate, engine speed, ...) are accepted and ignored.
/// Blank lines are skipped. Records keep file order.
inline SpeedTrace parse_trace(std::string_view text, std::string source_id = "trace") {
    SpeedTrace trace{std::move(source_id), {}};

    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& out) {
        if (pos >= text.size()) return false;
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        out = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        return true;
    };

    std::string_view header;
    if (!next_line(header)) throw ParseError(1, "missing header");
    if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);

    const auto names = detail::split_commas(header);
    std::optional<std::size_t> col_t, col_v, col_lat, col_lon;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "t") col_t = i;
        else if (names[i] == "v_kmh") col_v = i;
        else if (names[i] == "lat") col_lat = i;
        else if (names[i] == "lon") col_lon = i;
    }
    if (!col_t || !col_v) throw ParseError(1, "header must contain columns 't' and 'v_kmh'");
    if (col_lat.has_value() != col_lon.has_value())
        throw ParseError(1, "header must contain both 'lat' and 'lon' or neither");

    std::string_view line;
    while (next_line(line)) {
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_commas(line);
        if (cells.size() != names.size())
            throw ParseError(line_no, "expected " + std::to_string(names.size()) + " fields, got " +
                                          std::to_string(cells.size()));

        Record rec;
        const auto t = detail::parse_number<std::int64_t>(cells[*col_t]);
        if (!t) throw ParseError(line_no, "invalid timestamp '" + std::string(cells[*col_t]) + "'");
        const auto v = detail::parse_number<double>(cells[*col_v]);
        if (!v) throw ParseError(line_no, "invalid speed '" + std::string(cells[*col_v]) + "'");
        if (*v < 0.0)
            throw ValidationError("line " + std::to_string(line_no) + ": negative speed " +
                                  std::string(cells[*col_v]));
        rec.t = *t;
        rec.v = *v;

        if (col_lat) {
            const auto lat_cell = cells[*col_lat];
            const auto lon_cell = cells[*col_lon];
            if (!lat_cell.empty() || !lon_cell.empty()) {
                const auto lat = detail::parse_number<double>(lat_cell);
                const auto lon = detail::parse_number<double>(lon_cell);
                if (!lat || !lon) throw ParseError(line_no, "invalid coordinates");
                if (*lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0)
                    throw ValidationError("line " + std::to_string(line_no) +
                                          ": coordinates out of range");
                rec.lat = *lat;
                rec.lon = *lon;
            }
        }
        trace.records.push_back(rec);
    }
    return trace;
}

inline SpeedTrace read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trace(buf.str(), path.stem().string());
}

/// Serializes in the same format parse_trace reads. Coordinate columns are
/// written when any record carries coordinates.
inline std::string format_trace(const SpeedTrace& trace) {
    bool coords = false;
    for (const auto& r : trace.records) coords = coords || r.has_coords();

    std::string out = coords ? "t,v_kmh,lat,lon\n" : "t,v_kmh\n";
    for (const auto& r : trace.records) {
        out += std::to_string(r.t);
        out += ',';
        out += format_number(r.v);
        if (coords) {
            out += ',';
            if (r.has_coords()) {
                out += format_number(*r.lat);
                out += ',';
                out += format_number(*r.lon);
            } else {
                out += ',';
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace dcycle
