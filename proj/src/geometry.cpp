#include "coro4d/geometry.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace coro4d {

std::pair<std::size_t, double> nearest_neighbor(const Point3& query, std::span<const Point3> cloud) {
    if (cloud.empty()) {
        throw std::invalid_argument("nearest_neighbor: empty cloud");
    }
    std::size_t best = 0;
    double best_sq = squared_distance(query, cloud[0]);
    for (std::size_t i = 1; i < cloud.size(); ++i) {
        const double sq = squared_distance(query, cloud[i]);
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return {best, std::sqrt(best_sq)};
}

std::vector<Point3> resample_polyline(std::span<const Point3> points, std::size_t n) {
    if (points.size() < 2) {
        throw std::invalid_argument("resample_polyline: degenerate polyline (need >= 2 points)");
    }
    if (n < 2) {
        throw std::invalid_argument("resample_polyline: need n >= 2");
    }

    std::vector<double> cumulative(points.size(), 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        cumulative[i] = cumulative[i - 1] + distance(points[i - 1], points[i]);
    }
    const double total = cumulative.back();

    std::vector<Point3> out;
    out.reserve(n);
    out.push_back(points.front());

    if (total == 0.0) {
        // All input points coincide; emit copies.
        for (std::size_t k = 1; k + 1 < n; ++k) out.push_back(points.front());
        out.push_back(points.back());
        return out;
    }

    std::size_t seg = 0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double target = total * static_cast<double>(k) / static_cast<double>(n - 1);
        while (seg + 2 < points.size() && cumulative[seg + 1] < target) ++seg;
        const double seg_len = cumulative[seg + 1] - cumulative[seg];
        const double t = seg_len > 0.0 ? (target - cumulative[seg]) / seg_len : 0.0;
        out.push_back((1.0 - t) * points[seg] + t * points[seg + 1]);
    }
    out.push_back(points.back());
    return out;
}

Aabb bounding_box(std::span<const Point3> cloud) {
    if (cloud.empty()) {
        throw std::invalid_argument("bounding_box: empty cloud");
    }
    Aabb box{cloud[0], cloud[0]};
    for (const Point3& p : cloud) {
        box.min.x = std::min(box.min.x, p.x);
        box.min.y = std::min(box.min.y, p.y);
        box.min.z = std::min(box.min.z, p.z);
        box.max.x = std::max(box.max.x, p.x);
        box.max.y = std::max(box.max.y, p.y);
        box.max.z = std::max(box.max.z, p.z);
    }
    return box;
}

double polyline_length(std::span<const Point3> points) {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        total += distance(points[i - 1], points[i]);
    }
    return total;
}

double median_consecutive_spacing(std::span<const Point3> points) {
    if (points.size() < 2) {
        throw std::invalid_argument("median_consecutive_spacing: need >= 2 points");
    }
    std::vector<double> gaps;
    gaps.reserve(points.size() - 1);
    for (std::size_t i = 1; i < points.size(); ++i) {
        gaps.push_back(distance(points[i - 1], points[i]));
    }
    const std::size_t mid = gaps.size() / 2;
    std::nth_element(gaps.begin(), gaps.begin() + mid, gaps.end());
    double median = gaps[mid];
    if (gaps.size() % 2 == 0) {
        const double lower = *std::max_element(gaps.begin(), gaps.begin() + mid);
        median = 0.5 * (median + lower);
    }
    return median;
}

Normalization unit_cube_normalization(std::span<const PointCloud* const> clouds) {
    bool seeded = false;
    Aabb box{};
    for (const PointCloud* cloud : clouds) {
        if (cloud == nullptr || cloud->empty()) continue;
        const Aabb b = bounding_box(*cloud);
        if (!seeded) {
            box = b;
            seeded = true;
        } else {
            box.min.x = std::min(box.min.x, b.min.x);
            box.min.y = std::min(box.min.y, b.min.y);
            box.min.z = std::min(box.min.z, b.min.z);
            box.max.x = std::max(box.max.x, b.max.x);
            box.max.y = std::max(box.max.y, b.max.y);
            box.max.z = std::max(box.max.z, b.max.z);
        }
    }
    if (!seeded) {
        throw std::invalid_argument("unit_cube_normalization: no points");
    }
    const Vec3 extent = box.max - box.min;
    const double largest = std::max({extent.x, extent.y, extent.z});
    if (largest <= 0.0) {
        throw std::invalid_argument("unit_cube_normalization: degenerate bounding box");
    }
    return Normalization{box.min, 1.0 / largest};
}

} // namespace coro4d
