#include "coro4d/vessel_transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coro4d {

void CuboidParams::validate() const {
    if (!(length > 0.0) || !(width > 0.0)) {
        throw std::invalid_argument("CuboidParams: length and width must be > 0");
    }
}

namespace {

// Deterministic orthonormal completion of a unit tangent: cross against the
// world axis least aligned with it.
void cross_section_axes(const Vec3& tangent, Vec3& u, Vec3& v) {
    const double ax = std::abs(tangent.x), ay = std::abs(tangent.y), az = std::abs(tangent.z);
    Vec3 g{1.0, 0.0, 0.0};
    if (ay <= ax && ay <= az) {
        g = Vec3{0.0, 1.0, 0.0};
    } else if (az <= ax && az <= ay) {
        g = Vec3{0.0, 0.0, 1.0};
    }
    u = cross(tangent, g);
    const double n = norm(u);
    if (n == 0.0) {
        throw std::invalid_argument("cuboid_extract: degenerate tangent");
    }
    u *= 1.0 / n;
    v = cross(tangent, u);
}

struct Station {
    Point3 center;
    Vec3 tangent; // unit
    double height = 0.0;
    Vec3 displacement;
};

bool inside_cuboid(const Point3& p, const Station& st, const Vec3& u, const Vec3& v,
                   const CuboidParams& params) {
    const Vec3 q = p - st.center;
    return std::abs(dot(q, st.tangent)) <= st.height / 2.0 &&
           std::abs(dot(q, u)) <= params.length / 2.0 && std::abs(dot(q, v)) <= params.width / 2.0;
}

} // namespace

std::vector<std::size_t> cuboid_extract(std::span<const Point3> vessel, const Point3& center,
                                        const Vec3& tangent, const CuboidParams& params,
                                        double height) {
    params.validate();
    if (vessel.empty()) {
        throw std::invalid_argument("cuboid_extract: empty vessel cloud");
    }
    if (!(height > 0.0)) {
        throw std::invalid_argument("cuboid_extract: height must be > 0");
    }
    const double tn = norm(tangent);
    if (!(std::abs(tn - 1.0) < 1e-6)) {
        throw std::invalid_argument("cuboid_extract: tangent must be unit length");
    }
    Vec3 u, v;
    cross_section_axes(tangent, u, v);
    Station st{center, tangent, height, Vec3{}};
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < vessel.size(); ++i) {
        if (inside_cuboid(vessel[i], st, u, v, params)) out.push_back(i);
    }
    return out;
}

DeformationField assign_field(std::span<const Point3> vessel,
                              std::span<const FieldedPolyline> centerline,
                              const CuboidParams& params) {
    params.validate();
    if (vessel.empty()) {
        throw std::invalid_argument("assign_field: empty vessel cloud");
    }
    if (centerline.empty()) {
        throw std::invalid_argument("assign_field: empty centerline");
    }

    // Flatten stations. Every fielded point participates in the nearest-point
    // fallback; points with a usable local tangent and spacing also span a
    // cuboid.
    std::vector<Point3> all_points;
    std::vector<Vec3> all_disp;
    std::vector<Station> stations;
    for (const FieldedPolyline& poly : centerline) {
        if (poly.points.size() != poly.displacements.size()) {
            throw std::invalid_argument("assign_field: polyline field length mismatch");
        }
        const std::size_t n = poly.points.size();
        for (std::size_t i = 0; i < n; ++i) {
            all_points.push_back(poly.points[i]);
            all_disp.push_back(poly.displacements[i]);
            if (n < 2) continue;
            const Point3& prev = poly.points[i > 0 ? i - 1 : 0];
            const Point3& next = poly.points[i + 1 < n ? i + 1 : n - 1];
            Vec3 tangent = next - prev;
            const double tn = norm(tangent);
            const double height = i > 0 ? distance(poly.points[i], poly.points[i - 1])
                                        : distance(poly.points[1], poly.points[0]);
            if (tn == 0.0 || height == 0.0) continue;
            stations.push_back(Station{poly.points[i], tangent * (1.0 / tn), height, poly.displacements[i]});
        }
    }
    if (all_points.empty()) {
        throw std::invalid_argument("assign_field: centerline carries no points");
    }

    std::vector<Vec3> section_u(stations.size()), section_v(stations.size());
    for (std::size_t s = 0; s < stations.size(); ++s) {
        cross_section_axes(stations[s].tangent, section_u[s], section_v[s]);
    }

    DeformationField field;
    field.vectors.resize(vessel.size());
    for (std::size_t i = 0; i < vessel.size(); ++i) {
        std::size_t best_station = stations.size();
        double best_sq = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < stations.size(); ++s) {
            if (!inside_cuboid(vessel[i], stations[s], section_u[s], section_v[s], params)) continue;
            const double sq = squared_distance(vessel[i], stations[s].center);
            if (sq < best_sq) {
                best_sq = sq;
                best_station = s;
            }
        }
        if (best_station < stations.size()) {
            field.vectors[i] = stations[best_station].displacement;
        } else {
            const auto [idx, dist] = nearest_neighbor(vessel[i], all_points);
            (void)dist;
            field.vectors[i] = all_disp[idx];
        }
    }
    return field;
}

DeformationField interpolate_field(const DeformationField& field, double t,
                                   bool allow_extrapolation) {
    if (!allow_extrapolation && !(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("interpolate_field: t outside [0,1] (extrapolation refused)");
    }
    DeformationField out;
    out.vectors.reserve(field.size());
    for (const Vec3& v : field.vectors) out.vectors.push_back(t * v);
    return out;
}

PointCloud apply_registration(const PointCloud& cloud, const DeformationField& field) {
    if (cloud.size() != field.size()) {
        throw std::invalid_argument("apply_registration: cloud and field lengths differ");
    }
    PointCloud out;
    out.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) out.push_back(cloud[i] + field.vectors[i]);
    return out;
}

CardiacSequence synthesize_4d(const PointCloud& systole, const DeformationField& field,
                              std::span<const double> phases) {
    if (phases.empty()) {
        throw std::invalid_argument("synthesize_4d: empty phase list");
    }
    for (std::size_t k = 0; k < phases.size(); ++k) {
        if (!(phases[k] >= 0.0 && phases[k] <= 1.0)) {
            throw std::invalid_argument("synthesize_4d: phase outside [0,1]");
        }
        if (k > 0 && !(phases[k] > phases[k - 1])) {
            throw std::invalid_argument("synthesize_4d: phases must be strictly increasing");
        }
    }
    CardiacSequence seq;
    seq.frames.reserve(phases.size());
    for (double t : phases) {
        Frame4D frame;
        frame.phase = t;
        if (t == 0.0) {
            frame.cloud = systole; // bitwise endpoint identity
        } else {
            frame.cloud = apply_registration(systole, interpolate_field(field, t));
        }
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

} // namespace coro4d
