// Chamfer/Hausdorff reporting and the rigid ICP baseline.

#include "doctest.h"

#include "coro4d/geometry.hpp"
#include "coro4d/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

using namespace coro4d;

namespace {

RigidTransform z_rotation(double radians, Vec3 t) {
    RigidTransform rt;
    const double c = std::cos(radians), s = std::sin(radians);
    rt.rotation = {c, -s, 0, s, c, 0, 0, 0, 1};
    rt.translation = t;
    return rt;
}

} // namespace

TEST_CASE("chamfer of identical clouds is zero") {
    testsup::Rng rng(61);
    const PointCloud cloud = rng.cloud(10);
    const MetricReport r = chamfer(cloud, cloud);
    CHECK(r.cd_raw == 0.0);
    CHECK(r.cd_scaled == 0.0);
}

TEST_CASE("chamfer of two unit-separated singletons") {
    const PointCloud a{{0, 0, 0}};
    const PointCloud b{{1, 0, 0}};
    const MetricReport r = chamfer(a, b);
    CHECK(r.cd_raw == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r.cd_scaled == doctest::Approx(200.0).epsilon(1e-15));
    CHECK(r.cd_forward == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.cd_backward == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("chamfer matches the double-loop oracle on random clouds") {
    testsup::Rng rng(62);
    for (int trial = 0; trial < 10; ++trial) {
        const PointCloud a = rng.cloud(3 + rng.index(12));
        const PointCloud b = rng.cloud(3 + rng.index(12));
        const MetricReport r = chamfer(a, b);
        CHECK(r.cd_raw == doctest::Approx(oracle::chamfer_by_loops(a, b)).epsilon(1e-12));
        CHECK(r.cd_scaled == 100.0 * r.cd_raw);
    }
}

TEST_CASE("hausdorff closed forms") {
    testsup::Rng rng(63);
    const PointCloud cloud = rng.cloud(8);
    CHECK(hausdorff(cloud, cloud).hd_raw == 0.0);

    const PointCloud a{{0, 0, 0}};
    const PointCloud b{{3, 4, 0}};
    const MetricReport r = hausdorff(a, b);
    CHECK(r.hd_raw == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(r.hd_scaled == doctest::Approx(500.0).epsilon(1e-15));
}

TEST_CASE("hausdorff of a subset is the uncovered direction") {
    const PointCloud big{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
    const PointCloud sub{{0, 0, 0}, {1, 0, 0}};
    const MetricReport r = hausdorff(sub, big);
    CHECK(r.hd_forward == 0.0);
    CHECK(r.hd_backward == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.hd_raw == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hausdorff matches the double-loop oracle") {
    testsup::Rng rng(64);
    for (int trial = 0; trial < 10; ++trial) {
        const PointCloud a = rng.cloud(3 + rng.index(10));
        const PointCloud b = rng.cloud(3 + rng.index(10));
        CHECK(hausdorff(a, b).hd_raw ==
              doctest::Approx(oracle::hausdorff_by_loops(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("metrics are symmetric and rigid-invariant") {
    testsup::Rng rng(65);
    const PointCloud a = rng.cloud(12);
    const PointCloud b = rng.cloud(9);
    const MetricReport ab = measure_clouds(a, b);
    const MetricReport ba = measure_clouds(b, a);
    CHECK(ab.cd_raw == doctest::Approx(ba.cd_raw).epsilon(1e-12));
    CHECK(ab.hd_raw == doctest::Approx(ba.hd_raw).epsilon(1e-12));

    const RigidTransform rt = z_rotation(0.7, {1, -2, 0.5});
    PointCloud ra, rb;
    for (const Point3& p : a) ra.push_back(rt.apply(p));
    for (const Point3& p : b) rb.push_back(rt.apply(p));
    const MetricReport moved = measure_clouds(ra, rb);
    CHECK(moved.cd_raw == doctest::Approx(ab.cd_raw).epsilon(1e-9));
    CHECK(moved.hd_raw == doctest::Approx(ab.hd_raw).epsilon(1e-9));
}

TEST_CASE("metrics reject empty clouds") {
    const PointCloud a{{0, 0, 0}};
    const PointCloud empty;
    CHECK_THROWS_AS((void)chamfer(a, empty), std::invalid_argument);
    CHECK_THROWS_AS((void)hausdorff(empty, a), std::invalid_argument);
}

TEST_CASE("format_report prints the definitions and scaled values") {
    const PointCloud a{{0, 0, 0}};
    const PointCloud b{{1, 0, 0}};
    const std::string text = format_report(measure_clouds(a, b));
    CHECK(text.find(kChamferDefinition) != std::string::npos);
    CHECK(text.find(kHausdorffDefinition) != std::string::npos);
    CHECK(text.find("200") != std::string::npos);
    CHECK(text.find("100") != std::string::npos);  // HD scaled
}

TEST_CASE("rigid_icp is the identity on identical clouds") {
    testsup::Rng rng(66);
    const PointCloud cloud = rng.cloud(15);
    const IcpResult res = rigid_icp(cloud, cloud);
    CHECK(res.iterations == 1);
    REQUIRE(res.mse_history.size() >= 1);
    CHECK(res.mse_history.back() <= 1e-18);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const double want = r == c ? 1.0 : 0.0;
            CHECK(res.transform.rotation[3 * r + c] == doctest::Approx(want).epsilon(1e-9));
        }
    }
    CHECK(norm(res.transform.translation) <= 1e-9);
}

TEST_CASE("rigid_icp recovers a small rotation plus translation") {
    testsup::Rng rng(67);
    const PointCloud source = rng.cloud(40);
    const RigidTransform truth = z_rotation(10.0 * M_PI / 180.0, {0.05, -0.03, 0.02});
    PointCloud target;
    for (const Point3& p : source) target.push_back(truth.apply(p));

    const IcpResult res = rigid_icp(source, target, 100, 1e-14);
    const MetricReport r = chamfer(res.aligned, target);
    CHECK(r.cd_raw <= 1e-9);
    // Orthonormality with positive determinant.
    const auto& m = res.transform.rotation;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += m[3 * k + i] * m[3 * k + j];
            CHECK(acc == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
        }
    }
    const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                       m[2] * (m[3] * m[7] - m[4] * m[6]);
    CHECK(det == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rigid_icp mse history never increases") {
    testsup::Rng rng(68);
    const PointCloud source = rng.cloud(30);
    PointCloud target;
    const RigidTransform truth = z_rotation(0.4, {0.2, 0.1, -0.1});
    for (const Point3& p : source) target.push_back(truth.apply(p));
    // A little structured disturbance so ICP actually iterates.
    for (std::size_t i = 0; i < target.size(); i += 3) target[i].z += 0.02;

    const IcpResult res = rigid_icp(source, target, 60, 1e-15);
    REQUIRE(res.mse_history.size() >= 2);
    for (std::size_t k = 1; k < res.mse_history.size(); ++k) {
        CHECK(res.mse_history[k] <= res.mse_history[k - 1] + 1e-15);
    }
}

TEST_CASE("rigid_icp rejects degenerate geometry") {
    // Collinear clouds leave the cross-covariance rank deficient.
    PointCloud line_a, line_b;
    for (int i = 0; i < 5; ++i) {
        line_a.push_back({double(i), 0, 0});
        line_b.push_back({double(i), 1, 1});
    }
    testsup::check_throws_containing<std::runtime_error>(
        [&] { rigid_icp(line_a, line_b); }, "degenerate configuration");

    const PointCloud two{{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS((void)rigid_icp(two, two), std::invalid_argument);
}

TEST_CASE("interpolate_rigid scales rotation angle and translation") {
    const RigidTransform full = z_rotation(0.8, {1, 2, 3});
    const RigidTransform none = interpolate_rigid(full, 0.0);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            CHECK(none.rotation[3 * r + c] == doctest::Approx(r == c ? 1.0 : 0.0).epsilon(1e-12));
        }
    }
    CHECK(norm(none.translation) <= 1e-12);

    const RigidTransform all = interpolate_rigid(full, 1.0);
    for (int k = 0; k < 9; ++k) {
        CHECK(all.rotation[k] == doctest::Approx(full.rotation[k]).epsilon(1e-12));
    }

    const RigidTransform half = interpolate_rigid(full, 0.5);
    const RigidTransform expected = z_rotation(0.4, {0.5, 1, 1.5});
    for (int k = 0; k < 9; ++k) {
        CHECK(half.rotation[k] == doctest::Approx(expected.rotation[k]).epsilon(1e-12));
    }
    CHECK(half.translation.x == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS((void)interpolate_rigid(full, 1.5), std::invalid_argument);
}
