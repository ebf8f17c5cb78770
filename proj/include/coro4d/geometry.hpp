// geometry.hpp - shared 3D point types and polyline utilities.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace coro4d {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Point3& operator+=(const Point3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Point3& operator-=(const Point3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Point3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend Point3 operator+(Point3 a, const Point3& b) { return a += b; }
    friend Point3 operator-(Point3 a, const Point3& b) { return a -= b; }
    friend Point3 operator*(Point3 a, double s) { return a *= s; }
    friend Point3 operator*(double s, Point3 a) { return a *= s; }
    friend bool operator==(const Point3& a, const Point3& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

// Displacements share the coordinate representation.
using Vec3 = Point3;

using PointCloud = std::vector<Point3>;

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double squared_norm(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(squared_norm(v)); }

inline double squared_distance(const Point3& a, const Point3& b) { return squared_norm(a - b); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }

inline bool is_finite(const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

struct Aabb {
    Point3 min;
    Point3 max;
};

/// Per-point displacement vectors, index-aligned with the cloud they were
/// estimated for.
struct DeformationField {
    std::vector<Vec3> vectors;

    std::size_t size() const { return vectors.size(); }
    bool empty() const { return vectors.empty(); }
};

/// Index and Euclidean distance of the closest cloud point to `query`.
/// Ties resolve to the lowest index. Throws std::invalid_argument on an
/// empty cloud.
std::pair<std::size_t, double> nearest_neighbor(const Point3& query, std::span<const Point3> cloud);

/// Resamples an ordered polyline to `n` points uniformly spaced in
/// cumulative arc length. The first and last input points are preserved
/// bit-exactly. Requires at least 2 input points and n >= 2.
std::vector<Point3> resample_polyline(std::span<const Point3> points, std::size_t n);

/// Componentwise min/max box. Throws on an empty cloud.
Aabb bounding_box(std::span<const Point3> cloud);

/// Total length of the polyline through `points` in storage order.
double polyline_length(std::span<const Point3> points);

/// Median Euclidean distance between consecutive points. Used to derive
/// sampling-density-scaled cube parameters. Requires >= 2 points.
double median_consecutive_spacing(std::span<const Point3> points);

/// Similarity transform p -> (p - offset) * scale used by the optional
/// joint normalization of both cardiac phases into the unit cube.
struct Normalization {
    Point3 offset;
    double scale = 1.0;

    Point3 apply(const Point3& p) const { return (p - offset) * scale; }
    Point3 invert(const Point3& p) const { return p * (1.0 / scale) + offset; }
};

/// Uniform-scale normalization mapping the union bounding box of all given
/// clouds into [0,1]^3. Throws if the union box is degenerate (zero extent).
Normalization unit_cube_normalization(std::span<const PointCloud* const> clouds);

} // namespace coro4d
