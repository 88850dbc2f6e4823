#pragma once

// Minimal property runner: each case gets its own seeded generator so a
// failure can be replayed from the printed case seed.

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include <doctest.h>

namespace prop {

struct Gen {
    std::mt19937_64 g;
    explicit Gen(std::uint64_t seed) : g(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * (static_cast<double>(g() >> 11) * 0x1.0p-53);
    }
    int integer(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(g() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    bool coin(double p = 0.5) { return uniform() < p; }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(g); }
};

constexpr int kDefaultCases = 100;

/// Runs `body(gen, case_index)` for `cases` seeded cases. The body uses
/// doctest assertions; the case seed is attached to any failure.
template <class F>
void for_all(const char* name, F&& body, int cases = kDefaultCases, std::uint64_t base_seed = 0x5eed) {
    for (int k = 0; k < cases; ++k) {
        const std::uint64_t seed = base_seed * 1000003ULL + static_cast<std::uint64_t>(k);
        std::ostringstream ctx;
        ctx << name << " case " << k << " seed " << seed;
        INFO(ctx.str());
        Gen gen(seed);
        body(gen, k);
    }
}

}  // namespace prop
