// Shared helpers for the unit tests: ulp distance, matched-tone probes, and
// carrier draws with a minimum spacing.
#pragma once

#include <usmb/signal_model.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <random>
#include <span>
#include <vector>

namespace testutil {

inline constexpr double kEps = 2.220446049250313e-16;

// Signed-magnitude bit distance between two doubles; 0 iff a == b (so
// +0.0 and -0.0 count as one step apart).
inline std::int64_t ulp_steps(double a, double b) {
    if (a == b) return 0;
    std::int64_t ia, ib;
    std::memcpy(&ia, &a, sizeof ia);
    std::memcpy(&ib, &b, sizeof ib);
    if (ia < 0) ia = std::numeric_limits<std::int64_t>::min() - ia;
    if (ib < 0) ib = std::numeric_limits<std::int64_t>::min() - ib;
    return std::llabs(ia - ib);
}

inline bool same_bits(double a, double b) {
    std::uint64_t ia, ib;
    std::memcpy(&ia, &a, sizeof ia);
    std::memcpy(&ib, &b, sizeof ib);
    return ia == ib;
}

// Correlation of the series against the sampled tone e^{-j omega k T}:
// sum_k x[k] e^{+j omega k T}. Peaks when the series contains that tone.
inline std::complex<double> matched_tone(const usmb::ComplexSeries& x, double omega) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t k = 0; k < x.samples.size(); ++k)
        acc += x.samples[k] * std::polar(1.0, omega * static_cast<double>(k) * x.sample_period);
    return acc;
}

// `count` values in [lo, hi] with pairwise gaps of at least min_gap.
inline std::vector<double> draw_spaced(std::mt19937_64& rng, std::size_t count, double lo,
                                       double hi, double min_gap) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out;
    while (out.size() < count) {
        double v = dist(rng);
        bool ok = true;
        for (double u : out)
            if (std::abs(u - v) < min_gap) ok = false;
        if (ok) out.push_back(v);
    }
    return out;
}

inline double max_abs_diff(std::span<const usmb::cplx> a, std::span<const usmb::cplx> b) {
    double worst = 0.0;
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
}

}  // namespace testutil
