#include "coro4d/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace coro4d {

namespace {

constexpr double kTau = 6.283185307179586476925286766559;

Point3 lerp(const Point3& a, const Point3& b, double u) { return (1.0 - u) * a + u * b; }

Point3 de_casteljau(std::vector<Point3> work, double u) {
    for (std::size_t level = work.size() - 1; level > 0; --level) {
        for (std::size_t i = 0; i < level; ++i) {
            work[i] = lerp(work[i], work[i + 1], u);
        }
    }
    return work[0];
}

// Uniform double in [0,1) from the top 53 bits; avoids the
// implementation-defined std distributions so outputs are stable.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void deterministic_shuffle(std::vector<int>& values, std::mt19937_64& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(values[i - 1], values[j]);
    }
}

Vec3 unit_or_throw(const Vec3& v, const char* what) {
    const double n = norm(v);
    if (n == 0.0) {
        throw std::invalid_argument(std::string(what) + ": degenerate tangent");
    }
    return v * (1.0 / n);
}

void frame_axes(const Vec3& tangent, Vec3& u, Vec3& v) {
    const double ax = std::abs(tangent.x), ay = std::abs(tangent.y), az = std::abs(tangent.z);
    Vec3 g{1.0, 0.0, 0.0};
    if (ay <= ax && ay <= az) {
        g = Vec3{0.0, 1.0, 0.0};
    } else if (az <= ax && az <= ay) {
        g = Vec3{0.0, 0.0, 1.0};
    }
    u = unit_or_throw(cross(tangent, g), "tube_sample");
    v = cross(tangent, u);
}

} // namespace

void BezierSpec::validate() const {
    if (control_points.size() < 2) {
        throw std::invalid_argument("BezierSpec: need >= 2 control points");
    }
    if (samples < 2) {
        throw std::invalid_argument("BezierSpec: need >= 2 samples");
    }
    for (const Point3& p : control_points) {
        if (!is_finite(p)) throw std::invalid_argument("BezierSpec: non-finite control point");
    }
}

std::vector<Point3> bezier_curve(const BezierSpec& spec) {
    spec.validate();
    std::vector<Point3> out;
    out.reserve(spec.samples);
    for (std::size_t k = 0; k < spec.samples; ++k) {
        const double u = static_cast<double>(k) / static_cast<double>(spec.samples - 1);
        out.push_back(de_casteljau(spec.control_points, u));
    }
    return out;
}

namespace {

// Accumulates the recipe as a displacement of `p` rather than a chain of
// absolute positions: translations and bends then stay exact in floating
// point (the truth vector IS the offset), and a factor-1 scale is a strict
// no-op instead of a centroid round trip that leaves 1e-17 residue.
Vec3 recipe_displacement(const Point3& p, double u, const Point3& reference_centroid,
                         const DeformRecipe& recipe) {
    Vec3 disp{0.0, 0.0, 0.0};
    for (const DeformStep& step : recipe) {
        if (const auto* tr = std::get_if<TranslateRecipe>(&step)) {
            disp += tr->offset;
        } else if (const auto* sc = std::get_if<ScaleRecipe>(&step)) {
            if (sc->factor == 0.0) {
                throw std::invalid_argument("make_pair: degenerate recipe (zero scale)");
            }
            if (sc->factor != 1.0) {
                const Point3 current = p + disp;
                disp = reference_centroid + sc->factor * (current - reference_centroid) - p;
            }
        } else if (const auto* bend = std::get_if<BendRecipe>(&step)) {
            if (bend->offset_controls.size() < 2) {
                throw std::invalid_argument("make_pair: bend recipe needs >= 2 offset controls");
            }
            disp += de_casteljau(bend->offset_controls, u);
        }
    }
    return disp;
}

} // namespace

SyntheticPair make_pair(const BezierSpec& spec, const DeformRecipe& recipe, std::uint64_t seed,
                        const TubeSpec& tube) {
    SyntheticPair pair;
    pair.seed = seed;
    pair.systole.points = bezier_curve(spec);

    const std::size_t n = pair.systole.points.size();
    Point3 centroid{};
    for (const Point3& p : pair.systole.points) centroid += p;
    centroid *= 1.0 / static_cast<double>(n);

    pair.diastole.points.reserve(n);
    pair.truth_field.vectors.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double u = static_cast<double>(k) / static_cast<double>(n - 1);
        // Deriving the diastole from the displacement makes
        // systole + truth_field reproduce it bit-exactly by construction.
        const Vec3 truth = recipe_displacement(pair.systole.points[k], u, centroid, recipe);
        pair.diastole.points.push_back(pair.systole.points[k] + truth);
        pair.truth_field.vectors.push_back(truth);
    }

    if (tube.radius > 0.0) {
        if (tube.ring_count < 3) {
            throw std::invalid_argument("make_pair: tube ring_count must be >= 3");
        }
        pair.systole_tube =
            tube_sample(pair.systole.points, tube.radius, tube.ring_count, seed, &pair.tube_station);
        pair.diastole_tube.reserve(pair.systole_tube.size());
        for (std::size_t i = 0; i < pair.systole_tube.size(); ++i) {
            const double u = static_cast<double>(pair.tube_station[i]) / static_cast<double>(n - 1);
            const Vec3 disp = recipe_displacement(pair.systole_tube[i], u, centroid, recipe);
            pair.diastole_tube.push_back(pair.systole_tube[i] + disp);
        }
    }
    return pair;
}

PointCloud tube_sample(std::span<const Point3> centerline, double radius, int ring_count,
                       std::uint64_t seed, std::vector<std::size_t>* station_out) {
    if (!(radius > 0.0)) {
        throw std::invalid_argument("tube_sample: radius must be > 0");
    }
    if (ring_count < 3) {
        throw std::invalid_argument("tube_sample: ring_count must be >= 3");
    }
    if (centerline.size() < 2) {
        throw std::invalid_argument("tube_sample: need >= 2 centerline points");
    }

    std::mt19937_64 rng(seed);
    PointCloud out;
    out.reserve(centerline.size() * static_cast<std::size_t>(ring_count));
    if (station_out != nullptr) {
        station_out->clear();
        station_out->reserve(out.capacity());
    }

    for (std::size_t i = 0; i < centerline.size(); ++i) {
        const std::size_t next = i + 1 < centerline.size() ? i + 1 : i;
        const std::size_t prev = i + 1 < centerline.size() ? i : i - 1;
        const Vec3 tangent = unit_or_throw(centerline[next] - centerline[prev], "tube_sample");
        Vec3 u, v;
        frame_axes(tangent, u, v);
        const double phase = uniform01(rng) * kTau;
        for (int k = 0; k < ring_count; ++k) {
            const double angle = phase + kTau * static_cast<double>(k) / ring_count;
            out.push_back(centerline[i] + radius * (std::cos(angle) * u + std::sin(angle) * v));
            if (station_out != nullptr) station_out->push_back(i);
        }
    }
    return out;
}

DropResult drop_branches(const Centerline& segmented, double proportion, std::uint64_t seed,
                         const CubeParams& params) {
    if (!(proportion >= 0.0 && proportion < 1.0)) {
        throw std::invalid_argument("drop_branches: proportion must be in [0,1)");
    }
    if (!segmented.segmented() || !segmented.classified()) {
        throw std::invalid_argument("drop_branches: centerline must be segmented");
    }

    const std::size_t total = segmented.size();
    const auto members = segment_members(segmented);

    // Branch point -> ids of segments reachable through its cube.
    std::vector<std::size_t> branch_points;
    std::vector<std::set<int>> branch_adjacent;
    for (std::size_t i = 0; i < total; ++i) {
        if (segmented.attributes[i] != PointAttribute::Branch) continue;
        branch_points.push_back(i);
        std::set<int> adjacent;
        for (std::size_t j : cube_neighbors(segmented, i, params)) {
            if (segmented.segment_ids[j] >= 0) adjacent.insert(segmented.segment_ids[j]);
        }
        branch_adjacent.push_back(std::move(adjacent));
    }

    std::vector<int> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    deterministic_shuffle(order, rng);

    DropResult result;
    std::set<int> dropped;
    std::vector<bool> removed(total, false);
    std::size_t removed_count = 0;

    auto induced_branch_removals = [&](const std::set<int>& would_drop) {
        std::size_t extra = 0;
        for (std::size_t b = 0; b < branch_points.size(); ++b) {
            if (removed[branch_points[b]]) continue;
            const auto& adj = branch_adjacent[b];
            if (adj.empty()) continue;
            const bool all_gone = std::all_of(adj.begin(), adj.end(), [&](int s) {
                return would_drop.count(s) > 0;
            });
            if (all_gone) ++extra;
        }
        return extra;
    };

    for (int candidate : order) {
        const std::size_t seg_size = members[static_cast<std::size_t>(candidate)].size();
        if (seg_size == 0) continue;
        std::set<int> would_drop = dropped;
        would_drop.insert(candidate);
        const std::size_t tentative =
            removed_count + seg_size + induced_branch_removals(would_drop);
        if (static_cast<double>(tentative) / static_cast<double>(total) <= proportion) {
            dropped = std::move(would_drop);
            result.dropped_segments.push_back(candidate);
            for (std::size_t idx : members[static_cast<std::size_t>(candidate)]) removed[idx] = true;
            for (std::size_t b = 0; b < branch_points.size(); ++b) {
                if (removed[branch_points[b]] || branch_adjacent[b].empty()) continue;
                const bool all_gone = std::all_of(branch_adjacent[b].begin(), branch_adjacent[b].end(),
                                                  [&](int s) { return dropped.count(s) > 0; });
                if (all_gone) removed[branch_points[b]] = true;
            }
            removed_count = static_cast<std::size_t>(std::count(removed.begin(), removed.end(), true));
        }
    }

    for (std::size_t i = 0; i < total; ++i) {
        if (removed[i]) continue;
        result.pruned.points.push_back(segmented.points[i]);
        result.pruned.attributes.push_back(segmented.attributes[i]);
        result.pruned.segment_ids.push_back(segmented.segment_ids[i]);
    }
    result.achieved_fraction = static_cast<double>(removed_count) / static_cast<double>(total);
    result.removed_point = std::move(removed);
    std::sort(result.dropped_segments.begin(), result.dropped_segments.end());
    return result;
}

PointCloud prune_tube(const PointCloud& tube, std::span<const std::size_t> station,
                      const std::vector<bool>& removed_point) {
    if (tube.size() != station.size()) {
        throw std::invalid_argument("prune_tube: tube and station map lengths differ");
    }
    PointCloud out;
    for (std::size_t i = 0; i < tube.size(); ++i) {
        if (station[i] < removed_point.size() && removed_point[station[i]]) continue;
        out.push_back(tube[i]);
    }
    return out;
}

} // namespace coro4d
