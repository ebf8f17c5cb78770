#include "coro4d/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace coro4d {

namespace {

double min_sq_dist(const Point3& p, const PointCloud& cloud) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point3& q : cloud) best = std::min(best, squared_distance(p, q));
    return best;
}

void require_nonempty(const PointCloud& a, const PointCloud& b, const char* who) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument(std::string(who) + ": empty cloud");
    }
}

std::string fmt9(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    (void)ec;
    return std::string(buf, end);
}

Eigen::Matrix3d to_eigen(const std::array<double, 9>& r) {
    Eigen::Matrix3d m;
    m << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
    return m;
}

void from_eigen(const Eigen::Matrix3d& m, std::array<double, 9>& r) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[static_cast<std::size_t>(3 * i + j)] = m(i, j);
}

// Least-squares rotation + translation mapping src onto dst (paired). The
// reflection case d(2,2) = -1 keeps det(R) = +1.
RigidTransform fit_rigid(const PointCloud& src, const PointCloud& dst) {
    Eigen::Vector3d ca = Eigen::Vector3d::Zero(), cb = Eigen::Vector3d::Zero();
    const double inv_n = 1.0 / static_cast<double>(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        ca += Eigen::Vector3d(src[i].x, src[i].y, src[i].z);
        cb += Eigen::Vector3d(dst[i].x, dst[i].y, dst[i].z);
    }
    ca *= inv_n;
    cb *= inv_n;

    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const Eigen::Vector3d pa = Eigen::Vector3d(src[i].x, src[i].y, src[i].z) - ca;
        const Eigen::Vector3d pb = Eigen::Vector3d(dst[i].x, dst[i].y, dst[i].z) - cb;
        h += pa * pb.transpose();
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    // Rank < 2 leaves the rotation underdetermined (collinear or coincident
    // correspondences).
    if (!(sv(1) > 1e-12 * std::max(sv(0), std::numeric_limits<double>::min()))) {
        throw std::runtime_error("rigid_icp: degenerate configuration");
    }
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
    const Eigen::Vector3d t = cb - r * ca;

    RigidTransform out;
    from_eigen(r, out.rotation);
    out.translation = Vec3{t(0), t(1), t(2)};
    return out;
}

} // namespace

MetricReport chamfer(const PointCloud& a, const PointCloud& b) {
    require_nonempty(a, b, "chamfer");
    MetricReport report;
    for (const Point3& p : a) report.cd_forward += min_sq_dist(p, b);
    for (const Point3& q : b) report.cd_backward += min_sq_dist(q, a);
    report.cd_forward /= static_cast<double>(a.size());
    report.cd_backward /= static_cast<double>(b.size());
    report.cd_raw = report.cd_forward + report.cd_backward;
    report.cd_scaled = 100.0 * report.cd_raw;
    return report;
}

MetricReport hausdorff(const PointCloud& a, const PointCloud& b) {
    require_nonempty(a, b, "hausdorff");
    MetricReport report;
    for (const Point3& p : a) report.hd_forward = std::max(report.hd_forward, min_sq_dist(p, b));
    for (const Point3& q : b) report.hd_backward = std::max(report.hd_backward, min_sq_dist(q, a));
    report.hd_forward = std::sqrt(report.hd_forward);
    report.hd_backward = std::sqrt(report.hd_backward);
    report.hd_raw = std::max(report.hd_forward, report.hd_backward);
    report.hd_scaled = 100.0 * report.hd_raw;
    return report;
}

MetricReport measure_clouds(const PointCloud& a, const PointCloud& b) {
    MetricReport report = chamfer(a, b);
    const MetricReport hd = hausdorff(a, b);
    report.hd_forward = hd.hd_forward;
    report.hd_backward = hd.hd_backward;
    report.hd_raw = hd.hd_raw;
    report.hd_scaled = hd.hd_scaled;
    return report;
}

std::string format_report(const MetricReport& report) {
    auto pad = [](std::string s, std::size_t width) {
        if (s.size() < width) s.append(width - s.size(), ' ');
        return s;
    };
    std::string out;
    out += pad("metric", 8) + pad("raw", 18) + "x100\n";
    out += pad("CD", 8) + pad(fmt9(report.cd_raw), 18) + fmt9(report.cd_scaled) + "\n";
    out += pad("HD", 8) + pad(fmt9(report.hd_raw), 18) + fmt9(report.hd_scaled) + "\n";
    out += std::string("# ") + kChamferDefinition + "\n";
    out += std::string("# ") + kHausdorffDefinition + "\n";
    return out;
}

Point3 RigidTransform::apply(const Point3& p) const {
    const auto& r = rotation;
    return Point3{r[0] * p.x + r[1] * p.y + r[2] * p.z + translation.x,
                  r[3] * p.x + r[4] * p.y + r[5] * p.z + translation.y,
                  r[6] * p.x + r[7] * p.y + r[8] * p.z + translation.z};
}

PointCloud RigidTransform::apply(const PointCloud& cloud) const {
    PointCloud out;
    out.reserve(cloud.size());
    for (const Point3& p : cloud) out.push_back(apply(p));
    return out;
}

IcpResult rigid_icp(const PointCloud& source, const PointCloud& target, std::size_t max_iters,
                    double tol) {
    if (source.size() < 3 || target.size() < 3) {
        throw std::invalid_argument("rigid_icp: need >= 3 points per cloud");
    }
    if (max_iters == 0) {
        throw std::invalid_argument("rigid_icp: max_iters must be >= 1");
    }

    IcpResult result;
    result.aligned = source;
    double prev_mse = std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        PointCloud matched;
        matched.reserve(result.aligned.size());
        for (const Point3& p : result.aligned) {
            matched.push_back(target[nearest_neighbor(p, target).first]);
        }
        // Refit from the original source so the transform stays rigid
        // instead of accumulating roundoff across compositions.
        result.transform = fit_rigid(source, matched);
        result.aligned = result.transform.apply(source);

        double mse = 0.0;
        for (const Point3& p : result.aligned) mse += min_sq_dist(p, target);
        mse /= static_cast<double>(result.aligned.size());

        result.mse_history.push_back(mse);
        result.iterations = iter + 1;
        if (mse <= tol || prev_mse - mse < tol) break;
        prev_mse = mse;
    }
    return result;
}

RigidTransform interpolate_rigid(const RigidTransform& transform, double s) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw std::invalid_argument("interpolate_rigid: s must be in [0,1]");
    }
    Eigen::AngleAxisd aa(to_eigen(transform.rotation));
    aa.angle() *= s;
    RigidTransform out;
    from_eigen(aa.toRotationMatrix(), out.rotation);
    out.translation = transform.translation * s;
    return out;
}

} // namespace coro4d
