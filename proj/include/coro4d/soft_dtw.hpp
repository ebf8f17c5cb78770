// soft_dtw.hpp - smoothed dynamic time warping between ordered 3D sequences.
//
// The loss is the log-sum-exp aggregation over all monotone alignment paths
// of the squared-distance cost matrix, computed by the usual dynamic program
// with a smoothed min. An exact gradient (forward-backward recursion) drives
// a plain first-order optimizer over per-point displacement variables.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coro4d/geometry.hpp"

namespace coro4d {

/// Dense rows x cols matrix of squared Euclidean distances.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

CostMatrix pairwise_sq_dist(std::span<const Point3> a, std::span<const Point3> b);

/// -gamma * log(sum_k exp(-v_k / gamma)), max-shifted for stability.
/// Entries of +infinity are permitted and contribute nothing.
double softmin(std::span<const double> values, double gamma);

/// Smoothed DTW value between the two sequences; gamma > 0.
double soft_dtw(std::span<const Point3> a, std::span<const Point3> b, double gamma);

/// Classic DTW (exact min over paths), the gamma -> 0 limit of soft_dtw.
double hard_dtw(std::span<const Point3> a, std::span<const Point3> b);

/// Exact gradient of soft_dtw with respect to every point of `a`.
std::vector<Vec3> soft_dtw_grad(std::span<const Point3> a, std::span<const Point3> b, double gamma);

struct SoftDtwParams {
    double gamma = 0.1;
    double step_size = 1e-2;
    std::size_t iterations = 2000;
    double smoothness_weight = 0.1; // lambda on squared consecutive field differences
    double momentum = 0.0;          // 0.9 is a reasonable value when enabled

    void validate() const;
};

struct AlignmentResult {
    double loss = 0.0;                  // final objective value
    DeformationField field;             // optimized displacement of the source points
    std::vector<double> loss_history;   // objective before each step, plus the final value
};

/// Minimizes soft_dtw(source + field, target) + lambda * sum_k
/// |field[k+1] - field[k]|^2 by gradient descent with a fixed step size.
/// Deterministic; `init` defaults to the zero field. iterations == 0
/// evaluates the objective at `init` and returns it unchanged.
AlignmentResult optimize_field(std::span<const Point3> source, std::span<const Point3> target,
                               const SoftDtwParams& params, const DeformationField& init = {});

} // namespace coro4d
