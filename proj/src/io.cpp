#include "coro4d/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

namespace coro4d {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t begin = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > begin) fields.push_back(line.substr(begin, i - begin));
    }
    return fields;
}

[[noreturn]] void fail_at(const std::string& path, std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_field(std::string_view text, const std::string& path, std::size_t line_no) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        fail_at(path, line_no, "cannot parse '" + std::string(text) + "' as a number");
    }
    if (!std::isfinite(value)) {
        fail_at(path, line_no, "non-finite value '" + std::string(text) + "'");
    }
    return value;
}

long parse_int_field(std::string_view text, const std::string& path, std::size_t line_no) {
    long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        fail_at(path, line_no, "cannot parse '" + std::string(text) + "' as an integer");
    }
    return value;
}

struct LineReader {
    std::ifstream stream;
    std::string path;
    std::size_t line_no = 0;

    explicit LineReader(const std::string& p) : stream(p, std::ios::binary), path(p) {
        if (!stream) throw std::runtime_error(p + ": cannot open");
    }

    bool next(std::string& line) {
        if (!std::getline(stream, line)) return false;
        ++line_no;
        return true;
    }
};

PointCloud read_ply_body(LineReader& reader) {
    // Header already identified by the "ply" magic on line 1.
    std::size_t vertex_count = 0;
    bool saw_format = false;
    bool in_vertex_element = false;
    bool saw_vertex_element = false;
    std::vector<std::string> vertex_properties;

    std::string line;
    while (true) {
        if (!reader.next(line)) fail_at(reader.path, reader.line_no, "unterminated PLY header");
        const auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (fields[0] == "end_header") break;
        if (fields[0] == "comment") continue;
        if (fields[0] == "format") {
            if (fields.size() < 2 || fields[1] != "ascii") {
                fail_at(reader.path, reader.line_no, "only ASCII PLY is supported");
            }
            saw_format = true;
        } else if (fields[0] == "element") {
            if (fields.size() < 3) fail_at(reader.path, reader.line_no, "malformed element line");
            in_vertex_element = fields[1] == "vertex";
            if (in_vertex_element) {
                saw_vertex_element = true;
                vertex_count = static_cast<std::size_t>(
                    parse_int_field(fields[2], reader.path, reader.line_no));
            }
        } else if (fields[0] == "property") {
            if (in_vertex_element) {
                if (fields.size() < 3) fail_at(reader.path, reader.line_no, "malformed property line");
                vertex_properties.emplace_back(fields.back());
            }
        }
    }
    if (!saw_format) fail_at(reader.path, reader.line_no, "PLY header missing format line");
    if (!saw_vertex_element) fail_at(reader.path, reader.line_no, "PLY header missing vertex element");

    std::size_t ix = vertex_properties.size(), iy = ix, iz = ix;
    for (std::size_t i = 0; i < vertex_properties.size(); ++i) {
        if (vertex_properties[i] == "x") ix = i;
        if (vertex_properties[i] == "y") iy = i;
        if (vertex_properties[i] == "z") iz = i;
    }
    if (ix == vertex_properties.size() || iy == vertex_properties.size() ||
        iz == vertex_properties.size()) {
        fail_at(reader.path, reader.line_no, "PLY vertex element lacks x/y/z properties");
    }

    PointCloud cloud;
    cloud.reserve(vertex_count);
    while (cloud.size() < vertex_count) {
        if (!reader.next(line)) {
            fail_at(reader.path, reader.line_no, "PLY ends before all vertices are read");
        }
        const auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() != vertex_properties.size()) {
            fail_at(reader.path, reader.line_no, "expected " +
                    std::to_string(vertex_properties.size()) + " vertex fields");
        }
        cloud.push_back(Point3{parse_field(fields[ix], reader.path, reader.line_no),
                               parse_field(fields[iy], reader.path, reader.line_no),
                               parse_field(fields[iz], reader.path, reader.line_no)});
    }
    return cloud;
}

// Columns of a labeled centerline row.
constexpr std::size_t kCols3 = 3; // x,y,z
constexpr std::size_t kCols5 = 5; // x,y,z,attribute,segment

PointAttribute parse_attribute(std::string_view text, const std::string& path,
                               std::size_t line_no) {
    if (text == "start") return PointAttribute::Start;
    if (text == "middle") return PointAttribute::Middle;
    if (text == "branch") return PointAttribute::Branch;
    fail_at(path, line_no, "unknown attribute '" + std::string(text) + "'");
}

Centerline read_csv_centerline(LineReader& reader, const std::string& header_line) {
    const auto header = split_csv(header_line);
    bool labeled = false;
    if (header.size() == kCols5 && header[0] == "x" && header[1] == "y" && header[2] == "z" &&
        header[3] == "attribute" && header[4] == "segment") {
        labeled = true;
    } else if (!(header.size() == kCols3 && header[0] == "x" && header[1] == "y" &&
                 header[2] == "z")) {
        fail_at(reader.path, reader.line_no,
                "expected header 'x,y,z' or 'x,y,z,attribute,segment'");
    }

    Centerline out;
    std::string line;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        const std::size_t want = labeled ? kCols5 : kCols3;
        if (fields.size() != want) {
            fail_at(reader.path, reader.line_no,
                    "expected " + std::to_string(want) + " fields, got " +
                        std::to_string(fields.size()));
        }
        out.points.push_back(Point3{parse_field(fields[0], reader.path, reader.line_no),
                                    parse_field(fields[1], reader.path, reader.line_no),
                                    parse_field(fields[2], reader.path, reader.line_no)});
        if (labeled) {
            out.attributes.push_back(parse_attribute(fields[3], reader.path, reader.line_no));
            out.segment_ids.push_back(
                static_cast<int>(parse_int_field(fields[4], reader.path, reader.line_no)));
        }
    }
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, end);
}

std::string format_double_exact(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double_exact: conversion failed");
    return std::string(buf, end);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string_view trimmed = trim(text);
    double value = 0.0;
    const char* begin = trimmed.data();
    const char* end = begin + trimmed.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || trimmed.empty()) {
        throw std::runtime_error(what + ": cannot parse '" + text + "' as a number");
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error(what + ": non-finite value '" + text + "'");
    }
    return value;
}

std::string phase_token(double phase) {
    if (!(phase >= 0.0 && phase <= 1.0)) {
        throw std::invalid_argument("phase_token: phase must be in [0,1]");
    }
    const long milli = std::lround(phase * 1000.0);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04ld", milli);
    return buf;
}

PointCloud read_cloud(const std::string& path) {
    LineReader reader(path);
    std::string first;
    if (!reader.next(first)) throw std::runtime_error(path + ": empty file");
    if (trim(first) == "ply") return read_ply_body(reader);

    Centerline parsed = read_csv_centerline(reader, first);
    return std::move(parsed.points);
}

void write_cloud_csv(const std::string& path, const PointCloud& cloud) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "x,y,z\n";
    for (const Point3& p : cloud) {
        out << format_double(p.x) << ',' << format_double(p.y) << ',' << format_double(p.z)
            << '\n';
    }
    if (!out.good()) throw std::runtime_error(path + ": write failed");
}

Centerline read_centerline(const std::string& path) {
    LineReader reader(path);
    std::string first;
    if (!reader.next(first)) throw std::runtime_error(path + ": empty file");
    if (trim(first) == "ply") {
        Centerline line;
        line.points = read_ply_body(reader);
        return line;
    }
    return read_csv_centerline(reader, first);
}

void write_centerline_csv(const std::string& path, const Centerline& line) {
    if (!line.classified() || !line.segmented()) {
        write_cloud_csv(path, line.points);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "x,y,z,attribute,segment\n";
    for (std::size_t i = 0; i < line.points.size(); ++i) {
        const Point3& p = line.points[i];
        out << format_double_exact(p.x) << ',' << format_double_exact(p.y) << ','
            << format_double_exact(p.z) << ',' << to_string(line.attributes[i]) << ','
            << line.segment_ids[i] << '\n';
    }
    if (!out.good()) throw std::runtime_error(path + ": write failed");
}

void write_field_csv(const std::string& path, const std::vector<FieldedPolyline>& polylines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "x,y,z,dx,dy,dz,pair\n";
    for (std::size_t k = 0; k < polylines.size(); ++k) {
        const FieldedPolyline& poly = polylines[k];
        if (poly.points.size() != poly.displacements.size()) {
            throw std::invalid_argument(path + ": polyline " + std::to_string(k) +
                                        " has mismatched point/displacement counts");
        }
        for (std::size_t i = 0; i < poly.points.size(); ++i) {
            const Point3& p = poly.points[i];
            const Vec3& d = poly.displacements[i];
            out << format_double_exact(p.x) << ',' << format_double_exact(p.y) << ','
                << format_double_exact(p.z) << ',' << format_double_exact(d.x) << ','
                << format_double_exact(d.y) << ',' << format_double_exact(d.z) << ',' << k
                << '\n';
        }
    }
    if (!out.good()) throw std::runtime_error(path + ": write failed");
}

std::vector<FieldedPolyline> read_field_csv(const std::string& path) {
    LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw std::runtime_error(path + ": empty file");
    const auto header = split_csv(line);
    const char* expected[] = {"x", "y", "z", "dx", "dy", "dz", "pair"};
    bool header_ok = header.size() == 7;
    for (std::size_t i = 0; header_ok && i < 7; ++i) header_ok = header[i] == expected[i];
    if (!header_ok) fail_at(path, reader.line_no, "expected header 'x,y,z,dx,dy,dz,pair'");

    std::vector<FieldedPolyline> out;
    std::unordered_map<long, std::size_t> pair_index;
    while (reader.next(line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 7) {
            fail_at(path, reader.line_no,
                    "expected 7 fields, got " + std::to_string(fields.size()));
        }
        const long pair = parse_int_field(fields[6], path, reader.line_no);
        auto [it, inserted] = pair_index.try_emplace(pair, out.size());
        if (inserted) out.emplace_back();
        FieldedPolyline& poly = out[it->second];
        poly.points.push_back(Point3{parse_field(fields[0], path, reader.line_no),
                                     parse_field(fields[1], path, reader.line_no),
                                     parse_field(fields[2], path, reader.line_no)});
        poly.displacements.push_back(Vec3{parse_field(fields[3], path, reader.line_no),
                                          parse_field(fields[4], path, reader.line_no),
                                          parse_field(fields[5], path, reader.line_no)});
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw std::runtime_error(path + ": read failed");
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << content;
    if (!out.good()) throw std::runtime_error(path + ": write failed");
}

} // namespace coro4d
