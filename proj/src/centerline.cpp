#include "coro4d/centerline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace coro4d {

const char* to_string(PointAttribute a) {
    switch (a) {
        case PointAttribute::Start: return "start";
        case PointAttribute::Middle: return "middle";
        case PointAttribute::Branch: return "branch";
    }
    return "?";
}

void CubeParams::validate() const {
    if (!(edge > 0.0)) {
        throw std::invalid_argument("CubeParams: edge must be > 0");
    }
    if (!(epsilon > 0.0 && epsilon < edge / 2.0)) {
        throw std::invalid_argument("CubeParams: epsilon must satisfy 0 < epsilon < edge/2");
    }
}

CubeParams cube_params_from_spacing(std::span<const Point3> points) {
    const double spacing = median_consecutive_spacing(points);
    if (!(spacing > 0.0)) {
        throw std::invalid_argument("cube_params_from_spacing: zero median spacing");
    }
    CubeParams params;
    params.edge = 4.0 * spacing;
    // 3/8 of the edge: on an exactly uniform chain the in-cube points sit one
    // spacing (edge/4) away from the faces they head for, so the threshold
    // must exceed edge/4 or every face test fails.
    params.epsilon = 0.375 * params.edge;
    return params;
}

namespace {

bool strictly_inside_cube(const Point3& p, const Point3& center, double half) {
    return std::abs(p.x - center.x) < half && std::abs(p.y - center.y) < half &&
           std::abs(p.z - center.z) < half;
}

std::vector<std::size_t> neighbors_impl(const Centerline& centerline, const Point3& center,
                                        long exclude_index, const CubeParams& params) {
    params.validate();
    if (centerline.points.empty()) {
        throw std::invalid_argument("cube_neighbors: empty centerline");
    }
    const double half = params.edge / 2.0;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < centerline.points.size(); ++i) {
        if (static_cast<long>(i) == exclude_index) continue;
        const Point3& p = centerline.points[i];
        if (exclude_index < 0 && p == center) continue;
        if (strictly_inside_cube(p, center, half)) out.push_back(i);
    }
    return out;
}

} // namespace

std::vector<std::size_t> cube_neighbors(const Centerline& centerline, std::size_t center_index,
                                        const CubeParams& params) {
    if (center_index >= centerline.points.size()) {
        throw std::invalid_argument("cube_neighbors: index out of range");
    }
    return neighbors_impl(centerline, centerline.points[center_index],
                          static_cast<long>(center_index), params);
}

std::vector<std::size_t> cube_neighbors(const Centerline& centerline, const Point3& x,
                                        const CubeParams& params) {
    return neighbors_impl(centerline, x, -1, params);
}

namespace {

int outdegree_of(const Centerline& centerline, const Point3& center,
                 const std::vector<std::size_t>& neighbors, const CubeParams& params) {
    const double half = params.edge / 2.0;
    // Face order: +x, -x, +y, -y, +z, -z.
    bool hit[6] = {false, false, false, false, false, false};
    for (std::size_t idx : neighbors) {
        const Vec3 d = centerline.points[idx] - center;
        if (half - d.x < params.epsilon) hit[0] = true;
        if (half + d.x < params.epsilon) hit[1] = true;
        if (half - d.y < params.epsilon) hit[2] = true;
        if (half + d.y < params.epsilon) hit[3] = true;
        if (half - d.z < params.epsilon) hit[4] = true;
        if (half + d.z < params.epsilon) hit[5] = true;
    }
    int degree = 0;
    for (bool h : hit) degree += h ? 1 : 0;
    return degree;
}

} // namespace

int outdegree(const Centerline& centerline, std::size_t center_index, const CubeParams& params) {
    const auto neighbors = cube_neighbors(centerline, center_index, params);
    return outdegree_of(centerline, centerline.points[center_index], neighbors, params);
}

PointAttribute classify_point(const Centerline& centerline, std::size_t center_index,
                              const CubeParams& params) {
    const int degree = outdegree(centerline, center_index, params);
    if (degree == 0) {
        throw std::invalid_argument("classify_point: isolated point");
    }
    if (degree == 1) {
        // The chain leaves through exactly one face. The extremity condition
        // (distance from the point to the opposite face plane equals edge/2)
        // holds identically for a cube centered on the point itself.
        return PointAttribute::Start;
    }
    if (degree == 2) return PointAttribute::Middle;
    return PointAttribute::Branch;
}

namespace {

struct UnionFind {
    std::vector<int> parent;

    int make() {
        parent.push_back(static_cast<int>(parent.size()));
        return parent.back();
    }
    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    // Smaller root wins so renumbering stays order-stable.
    int unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (b < a) std::swap(a, b);
        parent[b] = a;
        return a;
    }
};

} // namespace

SegmentationResult segment_centerline(const Centerline& centerline, const CubeParams& params) {
    params.validate();
    if (centerline.points.empty()) {
        throw std::invalid_argument("segment_centerline: empty centerline");
    }

    const std::size_t n = centerline.points.size();
    SegmentationResult result;
    result.centerline.points = centerline.points;
    result.centerline.attributes.assign(n, PointAttribute::Middle);
    result.centerline.segment_ids.assign(n, -1);

    std::vector<int> raw_id(n, -1);
    std::vector<bool> labeled(n, false);
    UnionFind uf;

    for (std::size_t i = 0; i < n; ++i) {
        const auto neighbors = cube_neighbors(centerline, i, params);
        const int degree = outdegree_of(centerline, centerline.points[i], neighbors, params);

        if (degree == 0) {
            // No case of the attribute rule applies; keep the point as its
            // own start-singleton and warn.
            result.centerline.attributes[i] = PointAttribute::Start;
            result.isolated_points.push_back(i);
            raw_id[i] = uf.make();
            labeled[i] = true;
            continue;
        }

        if (degree > 2) {
            result.centerline.attributes[i] = PointAttribute::Branch;
            continue; // branch points own no segment
        }

        result.centerline.attributes[i] =
            degree == 1 ? PointAttribute::Start : PointAttribute::Middle;

        int id = -1;
        for (std::size_t j : neighbors) {
            if (!labeled[j]) continue;
            const int root = uf.find(raw_id[j]);
            id = (id < 0) ? root : uf.unite(id, root);
        }
        if (id < 0) id = uf.make();
        raw_id[i] = id;
        labeled[i] = true;
    }

    // Renumber roots 0..k-1 by first appearance in storage order.
    std::vector<int> remap(uf.parent.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (raw_id[i] < 0) continue;
        const int root = uf.find(raw_id[i]);
        if (remap[root] < 0) remap[root] = next++;
        result.centerline.segment_ids[i] = remap[root];
    }
    result.segment_count = static_cast<std::size_t>(next);
    return result;
}

std::vector<std::vector<std::size_t>> segment_members(const Centerline& segmented) {
    if (!segmented.segmented()) {
        throw std::invalid_argument("segment_members: centerline not segmented");
    }
    int max_id = -1;
    for (int id : segmented.segment_ids) max_id = std::max(max_id, id);
    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_id + 1));
    for (std::size_t i = 0; i < segmented.segment_ids.size(); ++i) {
        const int id = segmented.segment_ids[i];
        if (id >= 0) members[static_cast<std::size_t>(id)].push_back(i);
    }
    return members;
}

} // namespace coro4d
