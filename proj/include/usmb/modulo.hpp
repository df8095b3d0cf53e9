// Modulo (folding) front end: centered fold into [-lambda, lambda), optional
// AWGN and mid-rise quantization, and the ground-truth residual extractor.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "usmb/signal_model.hpp"

namespace usmb {

enum class NoisePlacement {
    PreFold,           ///< noise added to x, then folded (default)
    PostFold,          ///< noise added to the folded samples, no refold
    PostFoldRefolded,  ///< noise added to the folded samples, folded again
};

struct ModuloConfig {
    double threshold = 1.0;                 ///< lambda
    std::optional<int> bit_depth;           ///< mid-rise quantizer bits, if any
    std::optional<double> noise_snr_db;     ///< AWGN level, if any
    std::uint64_t noise_seed = 0;
    NoisePlacement noise_placement = NoisePlacement::PreFold;

    void validate() const;
};

/// Folded sample sequence together with the acquisition settings that
/// produced it. Samples stay inside [-lambda, lambda) componentwise except
/// under post-fold noise, which legitimately leaves the range.
struct FoldedSeries {
    ComplexSeries series;
    ModuloConfig config;

    std::size_t size() const { return series.size(); }
};

/// Residual counts r[k] = x[k] - y[k] expressed in exact integer multiples of
/// 2*lambda per component.
struct ResidualSeries {
    std::vector<std::pair<std::int64_t, std::int64_t>> counts;  ///< (re, im)
    double threshold = 1.0;

    std::size_t size() const { return counts.size(); }
};

/// Thrown when x - y is not on the 2*lambda lattice within tolerance.
struct FoldConsistencyError : std::runtime_error {
    FoldConsistencyError(std::size_t index_, double deviation_, const std::string& what_);
    std::size_t index;
    double deviation;
};

/// Centered modulo onto [-lambda, lambda): v - 2*lambda*floor((v+lambda)/(2*lambda)).
/// Computed via IEEE remainder so the result is exact: idempotent, identity
/// for |v| < lambda, and +lambda maps to -lambda.
double fold_scalar(double value, double lambda);

/// Componentwise complex fold.
cplx fold_complex(cplx value, double lambda);

/// Acquisition pipeline: (pre-fold noise) -> fold -> (post-fold noise) ->
/// (quantize), per the config.
FoldedSeries fold_series(const ComplexSeries& x, const ModuloConfig& config);

/// Mid-rise uniform quantizer on [-lambda, lambda): step 2*lambda/2^bits,
/// reconstruction levels at step*(k + 1/2). Componentwise.
FoldedSeries quantize(const FoldedSeries& y, int bits);

/// Seeded complex AWGN with per-component standard deviation sigma.
std::vector<cplx> draw_noise(std::size_t n, double sigma_component, std::uint64_t seed);

/// Per-component noise sigma for a given SNR against reference power
/// (mean |z|^2). SNR is total complex noise power relative to reference.
double noise_sigma_for_snr(double reference_power, double snr_db);

/// Mean |z|^2 over the series.
double mean_power(const ComplexSeries& z);

/// Exact residual extraction from ground truth: r = x - y snapped to the
/// 2*lambda lattice. Throws FoldConsistencyError if any component deviates
/// from the lattice by more than 1e-9 * lambda.
ResidualSeries residual_oracle(const ComplexSeries& x, const FoldedSeries& y);

}  // namespace usmb
