// vessel_transfer.hpp - centerline-to-vessel field transfer and 4D synthesis.
//
// Vessel points are clustered by oriented cuboids centered on centerline
// stations (square cross-section, height = local station spacing, axis along
// the local tangent); each clustered point inherits its station's
// displacement vector. Scaling the field linearly in time yields the frames
// of one cardiac cycle.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coro4d/geometry.hpp"

namespace coro4d {

struct CuboidParams {
    double length = 1.0; // cross-section edge
    double width = 1.0;  // equal to length unless overridden

    void validate() const;
};

/// One centerline segment carrying a displacement vector per point, in chain
/// order (the sorted, resampled systolic points of a pairing).
struct FieldedPolyline {
    std::vector<Point3> points;
    std::vector<Vec3> displacements;
};

/// Indices of vessel points inside the cuboid centered at `center`, height
/// `height` along `tangent` (unit length), square cross-section
/// length x width perpendicular to it. Containment is inclusive.
std::vector<std::size_t> cuboid_extract(std::span<const Point3> vessel, const Point3& center,
                                        const Vec3& tangent, const CuboidParams& params,
                                        double height);

/// Transfers the centerline field to every vessel point: points inside a
/// station's cuboid copy that station's vector, overlaps resolve to the
/// nearest station center, uncovered points copy the vector of the nearest
/// centerline point. The result is index-aligned with `vessel` and total.
DeformationField assign_field(std::span<const Point3> vessel,
                              std::span<const FieldedPolyline> centerline,
                              const CuboidParams& params);

/// Time-scaled field t * D. Refuses t outside [0,1] unless
/// `allow_extrapolation` is set.
DeformationField interpolate_field(const DeformationField& field, double t,
                                   bool allow_extrapolation = false);

/// Per-index sum cloud[i] + field[i]. Lengths must match.
PointCloud apply_registration(const PointCloud& cloud, const DeformationField& field);

struct Frame4D {
    double phase = 0.0;
    PointCloud cloud;
};

struct CardiacSequence {
    std::vector<Frame4D> frames;
};

/// One frame per phase via interpolate_field + apply_registration. Phases
/// must be strictly increasing within [0,1]. Point identity is preserved
/// across frames.
CardiacSequence synthesize_4d(const PointCloud& systole, const DeformationField& field,
                              std::span<const double> phases);

} // namespace coro4d
