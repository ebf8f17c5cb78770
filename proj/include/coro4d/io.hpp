// io.hpp - point cloud / centerline / field file formats. CSV throughout
// (plus ASCII PLY ingest), written with fixed 9-significant-digit decimals
// so identical data produces identical bytes on every run.

#pragma once

#include <string>
#include <vector>

#include "coro4d/centerline.hpp"
#include "coro4d/geometry.hpp"
#include "coro4d/vessel_transfer.hpp"

namespace coro4d {

/// Shortest round-trippable decimal at 9 significant digits, locale-free.
std::string format_double(double v);

/// Shortest decimal that parses back to the exact same double. Used for
/// intermediate files (fields, labeled centerlines) so staged runs replay
/// bit-identically; cloud and frame files keep the 9-digit contract.
std::string format_double_exact(double v);

/// Strict full-string parse; throws std::runtime_error naming `what` on
/// garbage, empty input, or non-finite values.
double parse_double(const std::string& text, const std::string& what);

/// Zero-padded milli-phase token: 1/3 -> "0333", 1.0 -> "1000".
std::string phase_token(double phase);

/// Reads `x,y,z` CSV or ASCII PLY (sniffed via the "ply" magic line).
/// Preserves row order; rejects NaN/Inf; errors carry the path and a
/// 1-based line number.
PointCloud read_cloud(const std::string& path);

void write_cloud_csv(const std::string& path, const PointCloud& cloud);

/// Accepts either a plain cloud file (points only) or the labeled layout
/// written by write_centerline_csv (`x,y,z,attribute,segment`).
Centerline read_centerline(const std::string& path);

/// Labeled layout when the centerline is classified/segmented, plain
/// `x,y,z` otherwise.
void write_centerline_csv(const std::string& path, const Centerline& line);

/// Layout `x,y,z,dx,dy,dz,pair`: one row per fielded station, `pair`
/// grouping rows into polylines (order of first appearance preserved).
void write_field_csv(const std::string& path, const std::vector<FieldedPolyline>& polylines);

std::vector<FieldedPolyline> read_field_csv(const std::string& path);

/// Whole-file read/write helpers used for JSON manifests.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace coro4d
