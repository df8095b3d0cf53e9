// Sampling-rate planning: bandpass zone windows intersected with the folding
// rate cap, circular alias-freeness of carrier sets, and achievability maps.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "usmb/signal_model.hpp"

namespace usmb {

enum class WindowLimit {
    BandpassUpper,  ///< upper edge set by the bandpass zone bound
    UsfUpper,       ///< upper edge set by the folding rate cap 1/(4 Omega_B e)
};

/// One admissible sampling-period window [t_min, t_max] in undersampling zone
/// `zone_index` (1 = classical oversampling).
struct RateWindow {
    double t_min = 0.0;
    double t_max = 0.0;
    int zone_index = 1;
    WindowLimit limited_by = WindowLimit::BandpassUpper;
};

struct AliasCheck {
    bool alias_free = false;
    std::vector<std::pair<std::size_t, std::size_t>> colliding;  ///< band index pairs
};

struct UsfRateCheck {
    bool admissible = false;
    double max_admissible_ts = 0.0;    ///< 1/(2^{P-1} Omega_B e), strict bound
    double conservative_max_ts = 0.0;  ///< 1/(2^P Omega_B e); equals the window cap at P=2
};

struct FeasibilityReport {
    double nyquist_span_period = 0.0;  ///< pi / (max |w_p| + Omega_B)
    std::vector<RateWindow> windows;
    AliasCheck alias;
    UsfRateCheck rate;
};

/// Admissible sampling periods for a single band centered at omega0 with
/// halfwidth omega_b: zone windows
///   pi*(n-1)/(omega0 - omega_b) <= T_S <= min(pi*n/(omega0 + omega_b), cap)
/// with cap = 1/(4 Omega_B e), for n = 1.., nonempty ones only, sorted by
/// t_min and pairwise disjoint. Requires omega0 > omega_b > 0.
std::vector<RateWindow> bandpass_windows(double omega0, double omega_b);

/// True when the bands [w_p - Omega_B, w_p + Omega_B], taken modulo the
/// sampling rate 2*pi/T_S, are pairwise disjoint on the circle (half-open
/// arcs, touching allowed). Throws std::invalid_argument when a single band
/// is wider than the sampling rate (always collides).
AliasCheck alias_free_check(std::span<const double> carriers, double omega_b, double sample_period);

/// Folding rate caps for a P-band signal; `admissible` is strict T_S < cap.
UsfRateCheck usf_rate_check(std::size_t band_count, double omega_b, double sample_period);

/// Full report for one carrier set and a queried sampling period.
FeasibilityReport feasibility_report(std::span<const double> carriers, double omega_b,
                                     double sample_period);

struct MapPoint {
    double f_upper_hz = 0.0;  ///< upper band edge, Hz
    double t_s = 0.0;         ///< sampling period, seconds
    bool achievable = false;
};

/// Grid classification for a single band whose upper edge sweeps
/// [f_upper_min, f_upper_max] Hz: achievable iff T_S falls in some window of
/// bandpass_windows(2*pi*f_upper - omega_b, omega_b). Row-major, f_upper
/// outermost, both axes ascending.
std::vector<MapPoint> achievability_map(double f_upper_min_hz, double f_upper_max_hz,
                                        std::size_t f_count, double ts_min, double ts_max,
                                        std::size_t ts_count, double omega_b);

}  // namespace usmb
