#include "usmb/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace usmb {

namespace {

// Atoms are kept away from the grid edges so their tails decay inside the
// window; a fraction of the span on each side is enough to keep truncation
// leakage well under the -40 dB floor.
constexpr double kAtomInteriorMargin = 0.15;

void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
}

}  // namespace

void TimeGrid::validate() const {
    check_finite(start_time, "start_time");
    check_finite(sample_period, "sample_period");
    if (sample_period <= 0.0) throw std::invalid_argument("sample_period must be positive");
    if (length == 0) throw std::invalid_argument("grid length must be at least 1");
}

double Taper::weight(std::size_t i) const {
    if (i < quiet) return 0.0;
    std::size_t j = i - quiet;
    if (j >= ramp) return 1.0;
    double u = static_cast<double>(j + 1) / static_cast<double>(ramp + 1);
    return 0.5 * (1.0 - std::cos(std::numbers::pi * u));
}

void MultibandSpec::validate() const {
    if (band_count == 0) throw std::invalid_argument("band_count must be at least 1");
    if (carriers.size() != band_count)
        throw std::invalid_argument("carriers must have band_count entries");
    if (band_seeds.size() != band_count)
        throw std::invalid_argument("band_seeds must have band_count entries");
    check_finite(baseband_halfwidth, "baseband_halfwidth");
    if (baseband_halfwidth <= 0.0)
        throw std::invalid_argument("baseband_halfwidth must be positive");
    for (double w : carriers) check_finite(w, "carrier");
    for (std::size_t p = 0; p < band_count; ++p)
        for (std::size_t q = p + 1; q < band_count; ++q)
            if (std::abs(carriers[p] - carriers[q]) <= baseband_halfwidth)
                throw std::invalid_argument("carrier bands overlap: carriers closer than the baseband halfwidth");
}

double sinc_atom(double omega_b, double t) {
    double u = omega_b * t;
    if (std::abs(u) < 1e-8) {
        double u2 = u * u;
        return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;  // series; exact 1 at t == 0
    }
    return std::sin(u) / u;
}

ComplexSeries synth_baseband(const BandSeed& seed, double omega_b, const TimeGrid& grid,
                             std::size_t components, const Taper& taper) {
    grid.validate();
    check_finite(omega_b, "omega_b");
    if (omega_b <= 0.0) throw std::invalid_argument("omega_b must be positive");

    ComplexSeries out;
    out.sample_period = grid.sample_period;
    out.start_index = static_cast<std::int64_t>(std::llround(grid.start_time / grid.sample_period));
    out.samples.assign(grid.length, cplx{0.0, 0.0});
    if (components == 0) return out;

    double span = static_cast<double>(grid.length - 1) * grid.sample_period;
    double lo = grid.start_time + kAtomInteriorMargin * span;
    double hi = grid.start_time + (1.0 - kAtomInteriorMargin) * span;

    std::mt19937_64 rng(seed.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> offset(lo, hi);

    std::vector<double> energies(components);
    std::vector<double> centers(components);
    for (std::size_t j = 0; j < components; ++j) {
        energies[j] = seed.energy_scale * unit(rng);
        centers[j] = offset(rng);
    }

    for (std::size_t i = 0; i < grid.length; ++i) {
        double t = grid.time_at(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < components; ++j)
            acc += energies[j] * sinc_atom(omega_b, t - centers[j]);
        if (taper.active()) acc *= taper.weight(i);
        out.samples[i] = cplx{acc, 0.0};
    }
    return out;
}

MultibandSignal synth_multiband(const MultibandSpec& spec, const TimeGrid& grid) {
    spec.validate();
    grid.validate();

    MultibandSignal sig;
    sig.series.sample_period = grid.sample_period;
    sig.series.start_index = static_cast<std::int64_t>(std::llround(grid.start_time / grid.sample_period));
    sig.series.samples.assign(grid.length, cplx{0.0, 0.0});
    sig.band_peaks.assign(spec.band_count, 0.0);

    for (std::size_t p = 0; p < spec.band_count; ++p) {
        ComplexSeries phi = synth_baseband(spec.band_seeds[p], spec.baseband_halfwidth, grid,
                                           spec.components_per_band, spec.taper);
        double peak = 0.0;
        for (std::size_t i = 0; i < grid.length; ++i) {
            double v = phi.samples[i].real();
            peak = std::max(peak, std::abs(v));
            double phase = -spec.carriers[p] * grid.time_at(i);
            sig.series.samples[i] += v * cplx{std::cos(phase), std::sin(phase)};
        }
        sig.band_peaks[p] = peak;
        sig.phi_peak = std::max(sig.phi_peak, peak);
    }
    return sig;
}

double peak_amplitude(const ComplexSeries& x) {
    double peak = 0.0;
    for (const cplx& v : x.samples)
        peak = std::max({peak, std::abs(v.real()), std::abs(v.imag())});
    return peak;
}

void scale_to_peak(MultibandSignal& sig, double target) {
    check_finite(target, "target");
    if (target <= 0.0) throw std::invalid_argument("target peak must be positive");
    double current = peak_amplitude(sig.series);
    if (current == 0.0) throw std::invalid_argument("cannot scale an all-zero signal");
    double factor = target / current;
    for (cplx& v : sig.series.samples) v *= factor;
    for (double& b : sig.band_peaks) b *= factor;
    sig.phi_peak *= factor;
}

}  // namespace usmb
