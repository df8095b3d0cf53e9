// Multiband test-signal synthesis: sums of bandlimited sinc mixtures
// modulated onto complex carriers, sampled on a uniform grid.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace usmb {

using cplx = std::complex<double>;

/// Uniform sampling grid. time_at(i) = start_time + i * sample_period.
struct TimeGrid {
    double start_time = 0.0;       ///< seconds
    double sample_period = 1.0;    ///< T_S, seconds
    std::size_t length = 0;

    double time_at(std::size_t i) const { return start_time + static_cast<double>(i) * sample_period; }
    void validate() const;
};

/// Complex sample sequence on a uniform grid. Sample i sits at index
/// start_index + i, i.e. time (start_index + i) * sample_period.
struct ComplexSeries {
    std::vector<cplx> samples;
    double sample_period = 1.0;
    std::int64_t start_index = 0;

    std::size_t size() const { return samples.size(); }
};

/// Per-band synthesis seed. energy_scale multiplies every atom energy.
struct BandSeed {
    std::uint64_t seed = 0;
    double energy_scale = 1.0;
};

/// Optional soft start: the first `quiet` samples of each baseband are zero,
/// followed by a raised-cosine ramp of `ramp` samples up to full scale.
/// Keeps the leading samples of the modulated sum fold-free for any
/// threshold, at the cost of ~2*pi/(ramp * T_S) rad/s bandwidth spread.
struct Taper {
    std::size_t quiet = 0;
    std::size_t ramp = 0;

    bool active() const { return quiet > 0 || ramp > 0; }
    double weight(std::size_t i) const;
};

/// Description of a multiband signal: band p occupies
/// [w_p - baseband_halfwidth, w_p + baseband_halfwidth] and the composite is
/// sum_p phi_p(t) * exp(-j w_p t).
struct MultibandSpec {
    std::size_t band_count = 0;                 ///< P
    double baseband_halfwidth = 0.0;            ///< Omega_B, rad/s
    std::vector<double> carriers;               ///< w_p, rad/s, size == band_count
    std::vector<BandSeed> band_seeds;           ///< size == band_count
    std::size_t components_per_band = 8;        ///< sinc atoms per baseband
    Taper taper;                                ///< applied to every baseband

    void validate() const;
};

/// Synthesized multiband signal plus the per-band peak metadata needed to
/// pick the recovery constant beta.
struct MultibandSignal {
    ComplexSeries series;
    std::vector<double> band_peaks;   ///< max |phi_p| over the grid
    double phi_peak = 0.0;            ///< max over bands
};

/// sin(W t)/(W t), the unit-energy-at-origin atom bandlimited to [-W, W].
double sinc_atom(double omega_b, double t);

/// One bandlimited baseband: `components` sinc atoms with seeded energies in
/// [-scale, scale] and offsets inside the grid span. components == 0 gives
/// the zero series. Real-valued (imaginary parts are exactly zero).
ComplexSeries synth_baseband(const BandSeed& seed, double omega_b, const TimeGrid& grid,
                             std::size_t components, const Taper& taper = {});

/// Composite signal for the given MultibandSpec plus band peak metadata.
MultibandSignal synth_multiband(const MultibandSpec& spec, const TimeGrid& grid);

/// Componentwise peak max_k max(|Re x[k]|, |Im x[k]|). This is the norm the
/// folding threshold compares against, since folding acts per component.
double peak_amplitude(const ComplexSeries& x);

/// Scale the signal (and its band peak metadata) so peak_amplitude == target.
void scale_to_peak(MultibandSignal& sig, double target);

}  // namespace usmb
