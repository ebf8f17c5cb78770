// support.hpp - shared test plumbing: deterministic RNG, shuffling, throw
// message checks, and scratch directories.

#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "coro4d/geometry.hpp"

namespace testsup {

// Uniform doubles from the top 53 bits of mt19937_64, so sequences are
// identical on every standard library.
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen() % n); }

    coro4d::Point3 point(double lo = -1.0, double hi = 1.0) {
        const double x = range(lo, hi), y = range(lo, hi), z = range(lo, hi);
        return coro4d::Point3{x, y, z};
    }

    std::vector<coro4d::Point3> cloud(std::size_t n, double lo = -1.0, double hi = 1.0) {
        std::vector<coro4d::Point3> out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(point(lo, hi));
        return out;
    }
};

template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::swap(values[i - 1], values[rng.index(i)]);
    }
}

/// Runs `body`, requiring an exception of type E whose message contains
/// `needle`.
template <typename E, typename F>
void check_throws_containing(F&& body, const std::string& needle) {
    try {
        body();
        FAIL_CHECK("expected an exception containing '" << needle << "', none thrown");
    } catch (const E& e) {
        const std::string what = e.what();
        CHECK_MESSAGE(what.find(needle) != std::string::npos,
                      "message '" << what << "' lacks '" << needle << "'");
    }
}

/// Self-cleaning scratch directory under the system temp root.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("coro4d_test_" + tag + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& leaf) const { return (path / leaf).string(); }
};

} // namespace testsup
