#include "coro4d/soft_dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace coro4d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double softmin3(double a, double b, double c, double gamma) {
    const double m = std::min({a, b, c});
    if (!std::isfinite(m)) return m;
    double sum = 0.0;
    if (std::isfinite(a)) sum += std::exp((m - a) / gamma);
    if (std::isfinite(b)) sum += std::exp((m - b) / gamma);
    if (std::isfinite(c)) sum += std::exp((m - c) / gamma);
    return m - gamma * std::log(sum);
}

void check_nonempty(std::span<const Point3> a, std::span<const Point3> b, const char* what) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty sequence");
    }
}

// Forward DP over the cost matrix; r(i,j) is the smoothed cost of the best
// monotone path from (0,0) to (i,j).
std::vector<double> forward_table(const CostMatrix& cost, double gamma) {
    const std::size_t n = cost.rows, m = cost.cols;
    std::vector<double> r(n * m, 0.0);
    auto R = [&](std::size_t i, std::size_t j) -> double& { return r[i * m + j]; };
    R(0, 0) = cost.at(0, 0);
    for (std::size_t j = 1; j < m; ++j) R(0, j) = cost.at(0, j) + R(0, j - 1);
    for (std::size_t i = 1; i < n; ++i) {
        R(i, 0) = cost.at(i, 0) + R(i - 1, 0);
        for (std::size_t j = 1; j < m; ++j) {
            R(i, j) = cost.at(i, j) + softmin3(R(i - 1, j), R(i, j - 1), R(i - 1, j - 1), gamma);
        }
    }
    return r;
}

} // namespace

CostMatrix pairwise_sq_dist(std::span<const Point3> a, std::span<const Point3> b) {
    check_nonempty(a, b, "pairwise_sq_dist");
    CostMatrix cost;
    cost.rows = a.size();
    cost.cols = b.size();
    cost.data.resize(cost.rows * cost.cols);
    for (std::size_t i = 0; i < cost.rows; ++i) {
        for (std::size_t j = 0; j < cost.cols; ++j) {
            cost.at(i, j) = squared_distance(a[i], b[j]);
        }
    }
    return cost;
}

double softmin(std::span<const double> values, double gamma) {
    if (values.empty()) {
        throw std::invalid_argument("softmin: empty values");
    }
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("softmin: gamma must be > 0");
    }
    const double m = *std::min_element(values.begin(), values.end());
    if (!std::isfinite(m)) return m;
    double sum = 0.0;
    for (double v : values) {
        if (std::isfinite(v)) sum += std::exp((m - v) / gamma);
    }
    return m - gamma * std::log(sum);
}

double soft_dtw(std::span<const Point3> a, std::span<const Point3> b, double gamma) {
    check_nonempty(a, b, "soft_dtw");
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("soft_dtw: gamma must be > 0");
    }
    const CostMatrix cost = pairwise_sq_dist(a, b);
    const auto r = forward_table(cost, gamma);
    return r[cost.rows * cost.cols - 1];
}

double hard_dtw(std::span<const Point3> a, std::span<const Point3> b) {
    check_nonempty(a, b, "hard_dtw");
    const CostMatrix cost = pairwise_sq_dist(a, b);
    const std::size_t n = cost.rows, m = cost.cols;
    std::vector<double> r(n * m, 0.0);
    auto R = [&](std::size_t i, std::size_t j) -> double& { return r[i * m + j]; };
    R(0, 0) = cost.at(0, 0);
    for (std::size_t j = 1; j < m; ++j) R(0, j) = cost.at(0, j) + R(0, j - 1);
    for (std::size_t i = 1; i < n; ++i) {
        R(i, 0) = cost.at(i, 0) + R(i - 1, 0);
        for (std::size_t j = 1; j < m; ++j) {
            R(i, j) = cost.at(i, j) + std::min({R(i - 1, j), R(i, j - 1), R(i - 1, j - 1)});
        }
    }
    return r[n * m - 1];
}

std::vector<Vec3> soft_dtw_grad(std::span<const Point3> a, std::span<const Point3> b, double gamma) {
    check_nonempty(a, b, "soft_dtw_grad");
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("soft_dtw_grad: gamma must be > 0");
    }
    const CostMatrix cost = pairwise_sq_dist(a, b);
    const std::size_t n = cost.rows, m = cost.cols;
    const auto r = forward_table(cost, gamma);
    auto R = [&](std::size_t i, std::size_t j) { return r[i * m + j]; };

    // Backward pass: e(i,j) is the expected occupancy of cell (i,j) under
    // the Gibbs distribution over alignment paths, i.e. dLoss/d cost(i,j).
    std::vector<double> e(n * m, 0.0);
    auto E = [&](std::size_t i, std::size_t j) -> double& { return e[i * m + j]; };
    E(n - 1, m - 1) = 1.0;
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t jj = m; jj-- > 0;) {
            if (ii == n - 1 && jj == m - 1) continue;
            double acc = 0.0;
            if (ii + 1 < n) {
                acc += E(ii + 1, jj) * std::exp((R(ii + 1, jj) - R(ii, jj) - cost.at(ii + 1, jj)) / gamma);
            }
            if (jj + 1 < m) {
                acc += E(ii, jj + 1) * std::exp((R(ii, jj + 1) - R(ii, jj) - cost.at(ii, jj + 1)) / gamma);
            }
            if (ii + 1 < n && jj + 1 < m) {
                acc += E(ii + 1, jj + 1) *
                       std::exp((R(ii + 1, jj + 1) - R(ii, jj) - cost.at(ii + 1, jj + 1)) / gamma);
            }
            E(ii, jj) = acc;
        }
    }

    // Chain rule through cost(i,j) = |a_i - b_j|^2.
    std::vector<Vec3> grad(n, Vec3{});
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 g{};
        for (std::size_t j = 0; j < m; ++j) {
            g += 2.0 * E(i, j) * (a[i] - b[j]);
        }
        grad[i] = g;
    }
    return grad;
}

void SoftDtwParams::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("SoftDtwParams: gamma must be > 0");
    if (!(step_size > 0.0)) throw std::invalid_argument("SoftDtwParams: step_size must be > 0");
    if (!(smoothness_weight >= 0.0)) {
        throw std::invalid_argument("SoftDtwParams: smoothness_weight must be >= 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw std::invalid_argument("SoftDtwParams: momentum must be in [0,1)");
    }
}

namespace {

double smoothness_penalty(const std::vector<Vec3>& field, double lambda) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < field.size(); ++k) {
        acc += squared_norm(field[k + 1] - field[k]);
    }
    return lambda * acc;
}

void add_smoothness_gradient(const std::vector<Vec3>& field, double lambda, std::vector<Vec3>& grad) {
    if (lambda == 0.0) return;
    for (std::size_t k = 0; k < field.size(); ++k) {
        Vec3 g{};
        if (k > 0) g += 2.0 * (field[k] - field[k - 1]);
        if (k + 1 < field.size()) g -= 2.0 * (field[k + 1] - field[k]);
        grad[k] += lambda * g;
    }
}

} // namespace

AlignmentResult optimize_field(std::span<const Point3> source, std::span<const Point3> target,
                               const SoftDtwParams& params, const DeformationField& init) {
    check_nonempty(source, target, "optimize_field");
    params.validate();
    if (!init.empty() && init.size() != source.size()) {
        throw std::invalid_argument("optimize_field: init field length mismatch");
    }

    const std::size_t n = source.size();
    std::vector<Vec3> field = init.empty() ? std::vector<Vec3>(n, Vec3{}) : init.vectors;
    std::vector<Vec3> velocity(n, Vec3{});
    std::vector<Point3> mapped(n);

    auto objective = [&](std::vector<Vec3>* grad_out) {
        for (std::size_t i = 0; i < n; ++i) mapped[i] = source[i] + field[i];
        double loss = soft_dtw(mapped, target, params.gamma) +
                      smoothness_penalty(field, params.smoothness_weight);
        if (grad_out != nullptr) {
            *grad_out = soft_dtw_grad(mapped, target, params.gamma);
            add_smoothness_gradient(field, params.smoothness_weight, *grad_out);
        }
        return loss;
    };

    AlignmentResult result;
    result.loss_history.reserve(params.iterations + 1);

    std::vector<Vec3> grad;
    for (std::size_t iter = 0; iter < params.iterations; ++iter) {
        const double loss = objective(&grad);
        if (!std::isfinite(loss)) {
            throw std::runtime_error("optimize_field: non-finite loss at iteration " +
                                     std::to_string(iter) + " (step size too large?)");
        }
        result.loss_history.push_back(loss);
        for (std::size_t i = 0; i < n; ++i) {
            velocity[i] = params.momentum * velocity[i] - params.step_size * grad[i];
            field[i] += velocity[i];
        }
    }

    const double final_loss = objective(nullptr);
    if (!std::isfinite(final_loss)) {
        throw std::runtime_error("optimize_field: non-finite final loss (step size too large?)");
    }
    result.loss_history.push_back(final_loss);
    result.loss = final_loss;
    result.field.vectors = std::move(field);
    return result;
}

} // namespace coro4d
