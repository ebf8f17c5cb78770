// centerline.hpp - centerline point classification and segment labeling.
//
// Points of a vessel centerline are classified by counting how many faces of
// an axis-aligned cube centered on the point are approached by neighboring
// points (the outdegree). Outdegree 1 marks a chain end, 2 a chain interior,
// >2 a bifurcation. Segments grow by joining each start/middle point to the
// labeled points inside its cube.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coro4d/geometry.hpp"

namespace coro4d {

enum class PointAttribute { Start, Middle, Branch };

const char* to_string(PointAttribute a);

/// Ordered centerline points with optional per-point classification.
/// `attributes` and `segment_ids` are either empty (not yet computed) or the
/// same length as `points`. Branch points carry segment id -1.
struct Centerline {
    PointCloud points;
    std::vector<PointAttribute> attributes;
    std::vector<int> segment_ids;

    bool classified() const { return !attributes.empty(); }
    bool segmented() const { return !segment_ids.empty(); }
    std::size_t size() const { return points.size(); }
};

/// Cube edge length and face-intersection threshold, in coordinate units.
struct CubeParams {
    double edge = 1.0;
    double epsilon = 0.375;

    void validate() const;
};

/// Parameters scaled to the sampling density of `points`: edge = 4x the
/// median consecutive spacing, epsilon = 3/8 of the edge (large enough that
/// a uniformly spaced chain always reaches the faces it crosses).
CubeParams cube_params_from_spacing(std::span<const Point3> points);

/// Indices of centerline points strictly inside the cube of edge
/// `params.edge` centered at point `center_index`, excluding the center
/// point itself.
std::vector<std::size_t> cube_neighbors(const Centerline& centerline, std::size_t center_index,
                                        const CubeParams& params);

/// Same, for an arbitrary query position (no self-exclusion by index; points
/// coinciding exactly with `x` are excluded).
std::vector<std::size_t> cube_neighbors(const Centerline& centerline, const Point3& x,
                                        const CubeParams& params);

/// Number of cube faces (0..6) whose plane lies within `params.epsilon` of
/// at least one cube neighbor, measured perpendicular to the face.
int outdegree(const Centerline& centerline, std::size_t center_index, const CubeParams& params);

/// Attribute from the outdegree: 1 -> Start (the chain leaves on one side
/// only), 2 -> Middle, >2 -> Branch. Throws "isolated point" when the cube
/// holds no neighbors at all.
PointAttribute classify_point(const Centerline& centerline, std::size_t center_index,
                              const CubeParams& params);

struct SegmentationResult {
    Centerline centerline;                   // attributes + segment_ids filled
    std::size_t segment_count = 0;
    std::vector<std::size_t> isolated_points; // warned, kept as singleton segments
};

/// Labels every point and partitions the centerline into segments. Start and
/// middle points join the segment of the labeled points inside their cube
/// (segments touched through one point are merged); branch points are owned
/// by no segment. Deterministic for a given storage order; final ids are
/// renumbered 0..k-1 by first appearance.
SegmentationResult segment_centerline(const Centerline& centerline, const CubeParams& params);

/// Point indices of every segment, id -> indices in storage order.
std::vector<std::vector<std::size_t>> segment_members(const Centerline& segmented);

} // namespace coro4d
