#include "usmb/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace usmb {

std::vector<RateWindow> bandpass_windows(double omega0, double omega_b) {
    if (!(omega_b > 0.0) || !std::isfinite(omega_b))
        throw std::invalid_argument("baseband halfwidth must be positive and finite");
    if (!(omega0 > omega_b) || !std::isfinite(omega0))
        throw std::invalid_argument("carrier must sit above the baseband halfwidth");

    double cap = 1.0 / (4.0 * omega_b * std::numbers::e);
    std::vector<RateWindow> windows;
    for (std::size_t n = 1;; ++n) {
        double t_lo = std::numbers::pi * static_cast<double>(n - 1) / (omega0 - omega_b);
        if (t_lo > cap) break;
        double t_bp = std::numbers::pi * static_cast<double>(n) / (omega0 + omega_b);
        double t_hi = std::min(t_bp, cap);
        if (t_lo <= t_hi)
            windows.push_back(RateWindow{t_lo, t_hi, static_cast<int>(n),
                                         t_bp <= cap ? WindowLimit::BandpassUpper
                                                     : WindowLimit::UsfUpper});
    }
    return windows;
}

AliasCheck alias_free_check(std::span<const double> carriers, double omega_b,
                            double sample_period) {
    if (!(omega_b > 0.0) || !(sample_period > 0.0))
        throw std::invalid_argument("bandwidth and sample period must be positive");
    double rate = 2.0 * std::numbers::pi / sample_period;
    if (2.0 * omega_b > rate)
        throw std::invalid_argument("band wider than the sampling rate: every placement aliases");

    auto wrap = [&](double v) {
        double m = std::fmod(v, rate);
        if (m < 0.0) m += rate;
        return m;
    };

    AliasCheck check;
    check.alias_free = true;
    std::vector<double> starts(carriers.size());
    for (std::size_t p = 0; p < carriers.size(); ++p) starts[p] = wrap(carriers[p] - omega_b);

    double width = 2.0 * omega_b;
    for (std::size_t p = 0; p < carriers.size(); ++p) {
        for (std::size_t q = p + 1; q < carriers.size(); ++q) {
            double d1 = wrap(starts[q] - starts[p]);
            double d2 = rate - d1;
            if (d1 < width || d2 < width) {
                check.alias_free = false;
                check.colliding.emplace_back(p, q);
            }
        }
    }
    return check;
}

UsfRateCheck usf_rate_check(std::size_t band_count, double omega_b, double sample_period) {
    if (band_count == 0) throw std::invalid_argument("band count must be at least 1");
    if (!(omega_b > 0.0) || !(sample_period > 0.0))
        throw std::invalid_argument("bandwidth and sample period must be positive");

    UsfRateCheck check;
    check.max_admissible_ts =
        1.0 / (std::ldexp(1.0, static_cast<int>(band_count) - 1) * omega_b * std::numbers::e);
    check.conservative_max_ts =
        1.0 / (std::ldexp(1.0, static_cast<int>(band_count)) * omega_b * std::numbers::e);
    check.admissible = sample_period < check.max_admissible_ts;
    return check;
}

FeasibilityReport feasibility_report(std::span<const double> carriers, double omega_b,
                                     double sample_period) {
    if (carriers.empty()) throw std::invalid_argument("at least one carrier is required");

    double top = 0.0;
    for (double w : carriers) top = std::max(top, std::abs(w));

    FeasibilityReport rep;
    rep.nyquist_span_period = std::numbers::pi / (top + omega_b);
    rep.windows = bandpass_windows(top, omega_b);
    rep.alias = alias_free_check(carriers, omega_b, sample_period);
    rep.rate = usf_rate_check(carriers.size(), omega_b, sample_period);
    return rep;
}

std::vector<MapPoint> achievability_map(double f_upper_min_hz, double f_upper_max_hz,
                                        std::size_t f_count, double ts_min, double ts_max,
                                        std::size_t ts_count, double omega_b) {
    if (f_count == 0 || ts_count == 0) throw std::invalid_argument("grid counts must be positive");
    if (!(omega_b > 0.0)) throw std::invalid_argument("baseband halfwidth must be positive");
    if (!(f_upper_min_hz <= f_upper_max_hz) || !(ts_min <= ts_max) || !(ts_min > 0.0))
        throw std::invalid_argument("grid bounds are inverted or nonpositive");

    auto grid_at = [](double lo, double hi, std::size_t count, std::size_t i) {
        if (count == 1) return lo;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    };

    std::vector<MapPoint> points;
    points.reserve(f_count * ts_count);
    for (std::size_t i = 0; i < f_count; ++i) {
        double f_upper = grid_at(f_upper_min_hz, f_upper_max_hz, f_count, i);
        double omega0 = 2.0 * std::numbers::pi * f_upper - omega_b;
        std::vector<RateWindow> windows;
        if (omega0 > omega_b) windows = bandpass_windows(omega0, omega_b);
        for (std::size_t j = 0; j < ts_count; ++j) {
            double ts = grid_at(ts_min, ts_max, ts_count, j);
            bool ok = std::any_of(windows.begin(), windows.end(), [&](const RateWindow& w) {
                return w.t_min <= ts && ts <= w.t_max;
            });
            points.push_back(MapPoint{f_upper, ts, ok});
        }
    }
    return points;
}

}  // namespace usmb
