#include "usmb/modulo.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace usmb {

FoldConsistencyError::FoldConsistencyError(std::size_t index_, double deviation_,
                                           const std::string& what_)
    : std::runtime_error(what_), index(index_), deviation(deviation_) {}

void ModuloConfig::validate() const {
    if (!std::isfinite(threshold) || threshold <= 0.0)
        throw std::invalid_argument("fold threshold must be positive and finite");
    if (bit_depth && (*bit_depth < 1 || *bit_depth > 32))
        throw std::invalid_argument("bit depth must be in [1, 32]");
    if (noise_snr_db && !std::isfinite(*noise_snr_db))
        throw std::invalid_argument("noise SNR must be finite");
}

double fold_scalar(double v, double lambda) {
    // remainder() is exact, so the identity fold(v) == v holds bit for bit
    // whenever |v| < lambda; the half-open convention maps +lambda to -lambda.
    double r = std::remainder(v, 2.0 * lambda);
    if (r >= lambda) r -= 2.0 * lambda;
    if (r == 0.0) r = 0.0;  // normalize -0.0
    return r;
}

cplx fold_complex(cplx v, double lambda) {
    return {fold_scalar(v.real(), lambda), fold_scalar(v.imag(), lambda)};
}

double mean_power(const ComplexSeries& x) {
    if (x.samples.empty()) return 0.0;
    double acc = 0.0;
    for (const cplx& v : x.samples) acc += std::norm(v);
    return acc / static_cast<double>(x.samples.size());
}

double noise_sigma_for_snr(double reference_power, double snr_db) {
    if (!(reference_power > 0.0))
        throw std::invalid_argument("noise reference power must be positive");
    double noise_power = reference_power * std::pow(10.0, -snr_db / 10.0);
    return std::sqrt(noise_power / 2.0);  // per real component
}

std::vector<cplx> draw_noise(std::size_t n, double sigma_component, std::uint64_t seed) {
    std::vector<cplx> out(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma_component);
    for (std::size_t i = 0; i < n; ++i) {
        double re = gauss(rng);
        double im = gauss(rng);
        out[i] = cplx{re, im};
    }
    return out;
}

FoldedSeries fold_series(const ComplexSeries& x, const ModuloConfig& config) {
    config.validate();

    FoldedSeries y;
    y.config = config;
    y.series = x;

    if (config.noise_snr_db && config.noise_placement == NoisePlacement::PreFold) {
        double sigma = noise_sigma_for_snr(mean_power(y.series), *config.noise_snr_db);
        std::vector<cplx> eta = draw_noise(y.series.samples.size(), sigma, config.noise_seed);
        for (std::size_t i = 0; i < eta.size(); ++i) y.series.samples[i] += eta[i];
    }

    for (cplx& v : y.series.samples) v = fold_complex(v, config.threshold);

    if (config.noise_snr_db && config.noise_placement != NoisePlacement::PreFold) {
        double sigma = noise_sigma_for_snr(mean_power(y.series), *config.noise_snr_db);
        std::vector<cplx> eta = draw_noise(y.series.samples.size(), sigma, config.noise_seed);
        for (std::size_t i = 0; i < eta.size(); ++i) y.series.samples[i] += eta[i];
        if (config.noise_placement == NoisePlacement::PostFoldRefolded)
            for (cplx& v : y.series.samples) v = fold_complex(v, config.threshold);
    }

    if (config.bit_depth) {
        FoldedSeries q = quantize(y, *config.bit_depth);
        y.series = std::move(q.series);
    }
    return y;
}

FoldedSeries quantize(const FoldedSeries& y, int bits) {
    if (bits < 1 || bits > 32) throw std::invalid_argument("bit depth must be in [1, 32]");

    FoldedSeries out = y;
    out.config.bit_depth = bits;

    // Mid-rise on [-lambda, lambda): step = 2*lambda / 2^bits, outputs at
    // step * (i + 1/2). Reconstruction levels are fixed points of the map.
    double step = std::ldexp(y.config.threshold, 1 - bits);
    double lo = -std::ldexp(1.0, bits - 1);
    double hi = std::ldexp(1.0, bits - 1) - 1.0;
    auto q1 = [&](double v) {
        double idx = std::floor(v / step);
        if (idx < lo) idx = lo;
        if (idx > hi) idx = hi;
        return step * (idx + 0.5);
    };
    for (cplx& v : out.series.samples) v = cplx{q1(v.real()), q1(v.imag())};
    return out;
}

ResidualSeries residual_oracle(const ComplexSeries& x, const FoldedSeries& y) {
    if (x.samples.size() != y.series.samples.size())
        throw std::invalid_argument("residual oracle: length mismatch");
    if (x.sample_period != y.series.sample_period)
        throw std::invalid_argument("residual oracle: sample period mismatch");
    if (x.start_index != y.series.start_index)
        throw std::invalid_argument("residual oracle: start index mismatch");

    double lambda = y.config.threshold;
    double tol = 1e-9 * lambda;
    ResidualSeries r;
    r.threshold = lambda;
    r.counts.resize(x.samples.size());
    for (std::size_t k = 0; k < x.samples.size(); ++k) {
        double dre = x.samples[k].real() - y.series.samples[k].real();
        double dim = x.samples[k].imag() - y.series.samples[k].imag();
        auto snap = [&](double d) {
            long long m = std::llround(d / (2.0 * lambda));
            double dev = std::abs(d - 2.0 * lambda * static_cast<double>(m));
            if (dev > tol)
                throw FoldConsistencyError(k, dev,
                                           "sample " + std::to_string(k) +
                                               " is off the 2*lambda lattice by " +
                                               std::to_string(dev));
            return static_cast<std::int64_t>(m);
        };
        r.counts[k] = {snap(dre), snap(dim)};
    }
    return r;
}

}  // namespace usmb
