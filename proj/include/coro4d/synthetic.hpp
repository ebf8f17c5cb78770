// synthetic.hpp - paired centerlines and vessel clouds with exact
// ground-truth deformation, plus the invisible-branch dropout protocol.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "coro4d/centerline.hpp"
#include "coro4d/geometry.hpp"

namespace coro4d {

struct BezierSpec {
    std::vector<Point3> control_points; // degree = count - 1
    std::size_t samples = 0;

    void validate() const;
};

/// De Casteljau evaluation at uniform parameter values k/(n-1). First and
/// last outputs equal the end control points bit-exactly.
std::vector<Point3> bezier_curve(const BezierSpec& spec);

// Deformation recipes: each maps a point (with its curve parameter u) to its
// diastolic position. A recipe list is applied left to right.
struct TranslateRecipe {
    Vec3 offset;
};
struct ScaleRecipe {
    double factor = 1.0; // about the systolic centerline centroid
};
struct BendRecipe {
    std::vector<Point3> offset_controls; // offset curve added at the same u
};
using DeformStep = std::variant<TranslateRecipe, ScaleRecipe, BendRecipe>;
using DeformRecipe = std::vector<DeformStep>;

struct TubeSpec {
    double radius = 0.0; // <= 0 disables tube sampling
    int ring_count = 0;
};

struct SyntheticPair {
    Centerline systole;
    Centerline diastole;
    PointCloud systole_tube;  // empty unless a tube was requested
    PointCloud diastole_tube;
    std::vector<std::size_t> tube_station; // centerline index per tube point
    DeformationField truth_field;          // on the systolic centerline points
    std::uint64_t seed = 0;
};

/// Samples the Bezier curve as the systolic centerline, applies the recipe
/// pointwise for the diastole, and records truth_field = diastole - systole.
/// With a tube spec, vessel points are sampled around the systole and
/// deformed with their station's curve parameter. Deterministic per seed.
SyntheticPair make_pair(const BezierSpec& spec, const DeformRecipe& recipe, std::uint64_t seed,
                        const TubeSpec& tube = {});

/// ring_count points per station on a circle of `radius` perpendicular to
/// the local tangent; the seed only rotates the rings. `station_out`, when
/// given, receives the owning station index per emitted point.
PointCloud tube_sample(std::span<const Point3> centerline, double radius, int ring_count,
                       std::uint64_t seed, std::vector<std::size_t>* station_out = nullptr);

struct DropResult {
    Centerline pruned;
    double achieved_fraction = 0.0;
    std::vector<int> dropped_segments;
    std::vector<bool> removed_point; // per input point
};

/// Removes whole segments, chosen greedily in a seed-shuffled order, while
/// the removed point fraction stays <= `proportion`. Branch points go only
/// when every segment adjacent to them (through the cube neighborhood) is
/// gone. Reports the achieved fraction.
DropResult drop_branches(const Centerline& segmented, double proportion, std::uint64_t seed,
                         const CubeParams& params);

/// Removes tube points whose owning centerline point was dropped.
PointCloud prune_tube(const PointCloud& tube, std::span<const std::size_t> station,
                      const std::vector<bool>& removed_point);

} // namespace coro4d
