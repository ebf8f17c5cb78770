#include "coro4d/sort_align.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace coro4d {

const char* to_string(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        case Axis::Z: return "z";
    }
    return "?";
}

Span span(std::span<const Point3> segment) {
    if (segment.empty()) {
        throw std::invalid_argument("span: empty segment");
    }
    const Aabb box = bounding_box(segment);
    const Vec3 extent = box.max - box.min;
    return Span{extent.x, extent.y, extent.z};
}

Axis trend_axis(const Span& s) {
    if (s.x >= s.y && s.x >= s.z) return Axis::X;
    if (s.y >= s.z) return Axis::Y;
    return Axis::Z;
}

namespace {

double coord(const Point3& p, Axis axis) {
    switch (axis) {
        case Axis::X: return p.x;
        case Axis::Y: return p.y;
        case Axis::Z: return p.z;
    }
    return p.x;
}

Point3 centroid(std::span<const Point3> pts) {
    Point3 c{};
    for (const Point3& p : pts) c += p;
    return c * (1.0 / static_cast<double>(pts.size()));
}

} // namespace

std::vector<Point3> sort_by_trend(std::vector<Point3> segment, Axis axis) {
    if (segment.empty()) {
        throw std::invalid_argument("sort_by_trend: empty segment");
    }
    std::stable_sort(segment.begin(), segment.end(),
                     [axis](const Point3& a, const Point3& b) { return coord(a, axis) < coord(b, axis); });
    return segment;
}

PairingResult pair_segments(const Centerline& systole, const Centerline& diastole) {
    if (!systole.segmented() || !diastole.segmented()) {
        throw std::invalid_argument("pair_segments: centerlines must be segmented");
    }
    const auto sys_members = segment_members(systole);
    const auto dia_members = segment_members(diastole);
    if (sys_members.empty() || dia_members.empty()) {
        throw std::invalid_argument("pair_segments: no segments");
    }

    auto gather = [](const Centerline& cl, const std::vector<std::size_t>& idx) {
        std::vector<Point3> pts;
        pts.reserve(idx.size());
        for (std::size_t i : idx) pts.push_back(cl.points[i]);
        return pts;
    };

    std::vector<std::vector<Point3>> sys_pts(sys_members.size()), dia_pts(dia_members.size());
    std::vector<Point3> sys_centroid(sys_members.size()), dia_centroid(dia_members.size());
    for (std::size_t i = 0; i < sys_members.size(); ++i) {
        sys_pts[i] = gather(systole, sys_members[i]);
        sys_centroid[i] = centroid(sys_pts[i]);
    }
    for (std::size_t j = 0; j < dia_members.size(); ++j) {
        dia_pts[j] = gather(diastole, dia_members[j]);
        dia_centroid[j] = centroid(dia_pts[j]);
    }

    PairingResult result;
    std::vector<bool> sys_used(sys_members.size(), false), dia_used(dia_members.size(), false);

    // Segments of fewer than 2 points cannot be resampled as polylines and
    // stay unmatched.
    for (std::size_t i = 0; i < sys_pts.size(); ++i) {
        if (sys_pts[i].size() < 2) {
            sys_used[i] = true;
            result.unmatched_systole.push_back(static_cast<int>(i));
        }
    }
    for (std::size_t j = 0; j < dia_pts.size(); ++j) {
        if (dia_pts[j].size() < 2) {
            dia_used[j] = true;
            result.unmatched_diastole.push_back(static_cast<int>(j));
        }
    }

    while (true) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        bool found = false;
        for (std::size_t i = 0; i < sys_pts.size(); ++i) {
            if (sys_used[i]) continue;
            for (std::size_t j = 0; j < dia_pts.size(); ++j) {
                if (dia_used[j]) continue;
                const double d = squared_distance(sys_centroid[i], dia_centroid[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        if (!found) break;
        sys_used[bi] = true;
        dia_used[bj] = true;

        SegmentPairing pairing;
        pairing.systole_segment = static_cast<int>(bi);
        pairing.diastole_segment = static_cast<int>(bj);
        pairing.trend = trend_axis(span(sys_pts[bi]));
        pairing.resampled_count = std::max(sys_pts[bi].size(), dia_pts[bj].size());

        // Canonicalize order first so resampling is independent of storage
        // order; ascending sort also fixes the traversal direction of both
        // phases, so no orientation flip is needed afterwards.
        const auto sys_sorted = sort_by_trend(sys_pts[bi], pairing.trend);
        const auto dia_sorted = sort_by_trend(dia_pts[bj], pairing.trend);
        pairing.systole = resample_polyline(sys_sorted, pairing.resampled_count);
        pairing.diastole = resample_polyline(dia_sorted, pairing.resampled_count);
        result.pairs.push_back(std::move(pairing));
    }

    for (std::size_t i = 0; i < sys_used.size(); ++i) {
        if (!sys_used[i]) result.unmatched_systole.push_back(static_cast<int>(i));
    }
    for (std::size_t j = 0; j < dia_used.size(); ++j) {
        if (!dia_used[j]) result.unmatched_diastole.push_back(static_cast<int>(j));
    }
    std::sort(result.unmatched_systole.begin(), result.unmatched_systole.end());
    std::sort(result.unmatched_diastole.begin(), result.unmatched_diastole.end());
    return result;
}

DeformationField field_by_subtraction(const SegmentPairing& pairing) {
    if (pairing.systole.size() != pairing.diastole.size()) {
        throw std::invalid_argument("field_by_subtraction: pairing lists differ in length");
    }
    if (pairing.systole.empty()) {
        throw std::invalid_argument("field_by_subtraction: empty pairing");
    }
    DeformationField field;
    field.vectors.reserve(pairing.systole.size());
    for (std::size_t k = 0; k < pairing.systole.size(); ++k) {
        field.vectors.push_back(pairing.diastole[k] - pairing.systole[k]);
    }
    return field;
}

} // namespace coro4d
