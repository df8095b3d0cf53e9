// Carrier-aware FIR filter: convolution of the 2-tap sections
// [-1, e^{-j w_p T_S}], one per carrier, raised to an integer power. The
// composite has a spectral zero on every carrier, so it contracts a multiband
// signal while leaving fold residuals on the 2*lambda lattice detectable.
#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "usmb/signal_model.hpp"

namespace usmb {

inline constexpr std::size_t kDefaultTapCap = 64;  ///< cap on order * carrier count

struct FilterTaps {
    std::vector<cplx> taps;           ///< causal, taps[0] applies to the current sample
    int order = 1;                    ///< N; taps.size() == order * carriers.size() + 1
    std::vector<double> carriers;     ///< rad/s
    double sample_period = 1.0;       ///< T_S, seconds
    bool normalized = false;          ///< true once taps[0] has been divided out
    cplx normalizer = {1.0, 0.0};     ///< original taps[0] (product over powers)

    std::size_t size() const { return taps.size(); }
};

/// Plain full convolution of two tap sequences (length a + b - 1).
std::vector<cplx> convolve(std::span<const cplx> a, std::span<const cplx> b);

/// First-order composite filter over the carrier set: conv of the per-carrier
/// sections. Empty carrier set gives the identity [1]. Throws
/// std::invalid_argument if two carriers coincide modulo 2*pi/T_S (their
/// sections would be identical and the carrier set degenerate).
FilterTaps build_psi(std::span<const double> carriers, double sample_period);

/// N-fold self-convolution of a first-order composite; length N*P + 1.
/// Throws std::length_error when order * P exceeds tap_cap.
FilterTaps psi_power(const FilterTaps& base, int order, std::size_t tap_cap = kDefaultTapCap);

/// Elementary symmetric polynomial e_k over {e^{-j w_p T_S}}, evaluated by
/// brute-force subset enumeration (independent of the convolution path;
/// cross-check only). For first-order taps: taps[k] == (-1)^{P+k} * e_k.
cplx esp_coefficient(std::span<const double> carriers, double sample_period, std::size_t k);

/// Gain the filter applies to the sampled tone e^{-j w t}:
/// sum_k taps[k] e^{+j w k T_S}. Zero (to rounding) at every carrier.
cplx carrier_gain(const FilterTaps& f, double omega);

double l1_norm(const FilterTaps& f);
double l1_norm(std::span<const cplx> taps);

/// Worst-case peak of the order-N filtered signal:
/// P * (T_S * 2^{P-1} * Omega_B * e)^N * phi_peak.
double shrinkage_bound(std::size_t band_count, double omega_b, double sample_period,
                       int order, double phi_peak);

/// Divide all taps by taps[0] so the current-sample tap is exactly 1; records
/// the divisor in `normalizer`. Idempotent. Throws std::domain_error if
/// |taps[0]| is zero (degenerate filter).
FilterTaps normalize_for_recovery(FilterTaps f);

/// Carriers reduced into [0, 2*pi/T_S). The filter is exactly invariant under
/// this map. Throws std::invalid_argument when two carriers collide after
/// reduction.
std::vector<double> alias_map(std::span<const double> carriers, double sample_period);

/// Both-sign deviations for the filter/modulation commutation identity
///   (Psi_C^N * phi~_p)[k] == (Psi_{C\{p}}^N * [(D^N * phi)[m] e^{-+j w_p m T_S}])[k]
/// where phi~_p[k] = phi[k] e^{-j w_p k T_S} and D = [-1, 1]. `deviation` uses
/// the minus sign on the right (the one consistent with the e^{-j w t} signal
/// convention); `deviation_flipped` uses the plus sign and should be large.
struct CommutationReport {
    double deviation = 0.0;
    double deviation_flipped = 0.0;
    double phi_peak = 0.0;
};

CommutationReport verify_commutation_identity(std::span<const cplx> phi,
                                              std::span<const double> carriers,
                                              std::size_t band_index, int order,
                                              double sample_period);

}  // namespace usmb
