// sort_align.hpp - deformation-field estimation by trend-axis sorting.
//
// Matched systole/diastole segments are canonicalized by sorting along the
// coordinate axis of largest extent, resampled to a common count, and the
// field is the per-index difference of the two sorted sequences.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coro4d/centerline.hpp"
#include "coro4d/geometry.hpp"

namespace coro4d {

enum class Axis { X, Y, Z };

const char* to_string(Axis a);

/// Coordinate-axis extents (max - min) of a segment.
struct Span {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

Span span(std::span<const Point3> segment);

/// Axis of maximal span; ties resolve x before y before z.
Axis trend_axis(const Span& s);

/// Stable ascending sort by the chosen axis coordinate.
std::vector<Point3> sort_by_trend(std::vector<Point3> segment, Axis axis);

/// One matched systole/diastole segment pair. Both lists hold
/// `resampled_count` points sorted ascending along `trend`.
struct SegmentPairing {
    std::vector<Point3> systole;
    std::vector<Point3> diastole;
    Axis trend = Axis::X;
    std::size_t resampled_count = 0;
    int systole_segment = -1;
    int diastole_segment = -1;
};

struct PairingResult {
    std::vector<SegmentPairing> pairs;
    std::vector<int> unmatched_systole;
    std::vector<int> unmatched_diastole;
};

/// Greedy centroid matching: repeatedly pair the globally closest unmatched
/// segment centroids until one side is exhausted. Each pair is sorted along
/// the systolic segment's trend axis and arc-length resampled to the larger
/// of the two point counts. Throws "no segments" when either side has none.
PairingResult pair_segments(const Centerline& systole, const Centerline& diastole);

/// Per-index difference diastole[k] - systole[k] over the sorted, resampled
/// pair. The field indexes the pairing's systolic points.
DeformationField field_by_subtraction(const SegmentPairing& pairing);

} // namespace coro4d
