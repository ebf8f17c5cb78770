// metrics.hpp - chamfer and hausdorff cloud distances with the x100
// reporting convention, plus a rigid ICP baseline for comparison runs.

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "coro4d/geometry.hpp"

namespace coro4d {

// Printed alongside the numbers so reports are self-describing; the raw
// values use these formulas exactly and `scaled` is always 100 x raw.
inline constexpr const char* kChamferDefinition =
    "CD = mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2";
inline constexpr const char* kHausdorffDefinition =
    "HD = max(max_a min_b |a-b|, max_b min_a |a-b|)";

struct MetricReport {
    double cd_forward = 0.0;  // mean over A of min squared distance into B
    double cd_backward = 0.0; // mean over B of min squared distance into A
    double cd_raw = 0.0;      // forward + backward
    double cd_scaled = 0.0;   // 100 x raw
    double hd_forward = 0.0;  // max over A of min distance into B
    double hd_backward = 0.0; // max over B of min distance into A
    double hd_raw = 0.0;      // max(forward, backward)
    double hd_scaled = 0.0;   // 100 x raw
};

/// Fills the CD part of a report. Throws std::invalid_argument on an empty
/// cloud. Symmetric: chamfer(a,b) and chamfer(b,a) agree.
MetricReport chamfer(const PointCloud& a, const PointCloud& b);

/// Fills the HD part of a report (Euclidean, not squared). Throws
/// std::invalid_argument on an empty cloud.
MetricReport hausdorff(const PointCloud& a, const PointCloud& b);

/// Both distances in one report.
MetricReport measure_clouds(const PointCloud& a, const PointCloud& b);

/// Aligned-column text with the defining formulas appended.
std::string format_report(const MetricReport& report);

struct RigidTransform {
    // Row-major rotation; defaults to identity. Orthonormal with det +1.
    std::array<double, 9> rotation{1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0};
    Vec3 translation{};

    Point3 apply(const Point3& p) const;
    PointCloud apply(const PointCloud& cloud) const;
};

struct IcpResult {
    RigidTransform transform;
    PointCloud aligned;              // transform applied to the source cloud
    std::vector<double> mse_history; // nearest-neighbor MSE per iteration
    std::size_t iterations = 0;
};

/// Classic rigid ICP: nearest-neighbor correspondences alternated with an
/// SVD orthogonal-Procrustes fit (reflection-corrected). Stops when the MSE
/// improvement drops below `tol`, the MSE itself does, or `max_iters` is
/// reached. Throws std::invalid_argument for clouds under 3 points and
/// std::runtime_error("degenerate configuration") when the correspondence
/// cross-covariance loses rank (e.g. collinear input).
IcpResult rigid_icp(const PointCloud& source, const PointCloud& target,
                    std::size_t max_iters = 50, double tol = 1e-10);

/// Fractional transform: rotation angle and translation both scaled by `s`
/// (s = 0.5 gives the half-way pose). Requires s in [0,1].
RigidTransform interpolate_rigid(const RigidTransform& transform, double s);

} // namespace coro4d
