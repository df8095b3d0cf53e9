// Unfolding: recover the unfolded samples from a folded multiband record by
// filtering with the normalized carrier-aware FIR, reading residual jumps off
// the 2*lambda lattice sample by sample, and propagating each correction
// forward through the filter. Includes the classical difference-only
// baseline and error metrics.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "usmb/modulo.hpp"
#include "usmb/spectral_filter.hpp"

namespace usmb {

struct RecoveryParams {
    double lambda = 1.0;
    std::vector<double> carriers;           ///< rad/s
    int order = 1;                          ///< N
    double beta = 0.0;                      ///< baseband peak bound, multiple of 2*lambda
    double sample_period = 1.0;             ///< T_S
    std::optional<std::size_t> warmup;      ///< fold-free prefix; default 2*N*P
    std::size_t tap_cap = kDefaultTapCap;

    std::size_t warmup_length() const;
    void validate() const;
};

struct RecoveryDiagnostics {
    double max_filtered_prefix = 0.0;    ///< max componentwise |filtered| before corrections
    double max_lattice_deviation = 0.0;  ///< worst snap distance seen at corrections
    std::size_t corrections = 0;         ///< samples with a nonzero residual estimate
    int order_used = 0;
    std::size_t warmup_used = 0;
};

struct RecoveryResult {
    ComplexSeries recovered;
    ResidualSeries residual;                 ///< estimated counts, exact lattice
    std::vector<std::size_t> fold_indices;   ///< sample indices with nonzero residual
    RecoveryDiagnostics diagnostics;
};

/// Sampling too slow for the order formula: the contraction base is >= 1.
struct RateError : std::runtime_error {
    RateError(double max_admissible_ts_, const std::string& what_);
    double max_admissible_ts;
};

/// Detected recovery-contract violations. WarmupViolation: a filtered
/// component reaches lambda inside the fold-free warm-up prefix (the head
/// folded, or was never contracted). OrderTooSmall: an estimated residual
/// count exceeds what band envelopes bounded by beta can add up to, i.e. the
/// corrections ran away mid-stream.
struct RecoveryContractError : std::runtime_error {
    enum class Kind { WarmupViolation, OrderTooSmall };
    RecoveryContractError(Kind kind_, std::size_t index_, double observed_, const std::string& what_);
    Kind kind;
    std::size_t index;    ///< sample index where the violation surfaced
    double observed;      ///< max componentwise filtered magnitude seen
};

struct RecoveryOptions {
    bool enforce_contract = true;  ///< throw on warm-up fold / residual runaway
};

/// Smallest multiple of 2*lambda that is >= max(phi_peak, 2*lambda).
double choose_beta(double phi_peak, double lambda);

/// Order from the closed-form rate condition:
/// N = max(1, ceil((log lambda - log(P beta)) / log(T_S P 2^{P-1} Omega_B e))),
/// then incremented until shrinkage_bound(N) <= lambda. Throws RateError when
/// the log base is >= 1.
int choose_order(double lambda, double beta, std::size_t band_count, double omega_b,
                 double sample_period);

struct MeasuredOrder {
    int order = 0;
    double measured_peak = 0.0;  ///< max componentwise |(Psi^N * reference)[k]|
    bool satisfied = false;      ///< measured_peak <= margin * lambda
};

/// Empirical order selection: smallest N (with N*P <= tap_cap) whose filtered
/// reference peaks at most margin*lambda over the fully-overlapped region.
/// Falls back to the argmin-peak N with satisfied == false when none fits.
MeasuredOrder choose_order_measured(const ComplexSeries& reference,
                                    std::span<const double> carriers, double lambda,
                                    int max_order, double margin = 1.0,
                                    std::size_t tap_cap = kDefaultTapCap);

/// Filtered componentwise peak over the fully-overlapped indices.
double filtered_peak(const ComplexSeries& reference, const FilterTaps& taps);

/// Carrier-aware recovery. Requires the first warmup_length() samples of y to
/// be fold-free; under enforce_contract a filtered component reaching lambda
/// in the warm-up region raises WarmupViolation, and a residual count past
/// the beta-implied ceiling raises OrderTooSmall (beta == 0 disables the
/// ceiling).
RecoveryResult recover(const FoldedSeries& y, const RecoveryParams& params,
                       const RecoveryOptions& options = {});

/// Classical difference-only baseline: N-th difference, snap to the lattice,
/// anti-difference N times in exact integer lattice units anchored at the
/// fold-free prefix. Never throws on bad inputs; wrong output is the result.
RecoveryResult difference_recover(const FoldedSeries& y, double lambda, int order);

struct ErrorStats {
    double mse = 0.0;      ///< mean |x - xhat|^2
    double nmse = 0.0;     ///< mse / mean |x|^2
    double max_err = 0.0;  ///< max |x - xhat|
};

ErrorStats error_stats(const ComplexSeries& truth, const ComplexSeries& estimate);

}  // namespace usmb
