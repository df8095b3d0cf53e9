#include "usmb/spectral_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace usmb {

namespace {

cplx unit_phasor(double angle) { return {std::cos(angle), std::sin(angle)}; }

void check_build_args(std::span<const double> carriers, double sample_period) {
    if (!std::isfinite(sample_period) || sample_period <= 0.0)
        throw std::invalid_argument("sample period must be positive and finite");
    for (double w : carriers)
        if (!std::isfinite(w)) throw std::invalid_argument("carriers must be finite");
}

}  // namespace

std::vector<cplx> convolve(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("convolve: empty operand");
    std::vector<cplx> c(a.size() + b.size() - 1, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

FilterTaps build_psi(std::span<const double> carriers, double sample_period) {
    check_build_args(carriers, sample_period);

    FilterTaps f;
    f.order = 1;
    f.carriers.assign(carriers.begin(), carriers.end());
    f.sample_period = sample_period;
    f.taps = {cplx{1.0, 0.0}};

    std::vector<cplx> roots(carriers.size());
    for (std::size_t p = 0; p < carriers.size(); ++p)
        roots[p] = unit_phasor(-carriers[p] * sample_period);
    for (std::size_t p = 0; p < roots.size(); ++p)
        for (std::size_t q = p + 1; q < roots.size(); ++q)
            if (std::abs(roots[p] - roots[q]) < 1e-12)
                throw std::invalid_argument(
                    "carriers " + std::to_string(p) + " and " + std::to_string(q) +
                    " coincide modulo the sampling rate; the filter would be degenerate");

    // One two-tap section [-1, e^{-j w T}] per carrier; the cascade zeroes
    // every sampled tone e^{-j w k T}.
    for (const cplx& u : roots) {
        const cplx section[2] = {cplx{-1.0, 0.0}, u};
        f.taps = convolve(f.taps, section);
    }
    return f;
}

FilterTaps psi_power(const FilterTaps& base, int order, std::size_t tap_cap) {
    if (order < 1) throw std::invalid_argument("filter order must be at least 1");
    if (base.order != 1) throw std::invalid_argument("psi_power expects a first-order base filter");
    std::size_t degree = base.taps.size() - 1;
    if (degree * static_cast<std::size_t>(order) > tap_cap)
        throw std::length_error("filter tap budget exceeded: order * carrier count > " +
                                std::to_string(tap_cap));

    FilterTaps f = base;
    f.order = order;
    for (int n = 1; n < order; ++n) f.taps = convolve(f.taps, base.taps);
    return f;
}

cplx esp_coefficient(std::span<const double> carriers, double sample_period, std::size_t k) {
    check_build_args(carriers, sample_period);
    std::size_t count = carriers.size();
    if (k > count) throw std::invalid_argument("elementary symmetric index out of range");
    if (count > 24) throw std::invalid_argument("subset enumeration capped at 24 carriers");
    if (k == 0) return {1.0, 0.0};

    std::vector<cplx> roots(count);
    for (std::size_t p = 0; p < count; ++p) roots[p] = unit_phasor(-carriers[p] * sample_period);

    // Sum of products over all k-subsets, enumerated directly. Compensated
    // accumulation keeps the oracle tight enough for ulp-level comparisons.
    double sum_re = 0.0, c_re = 0.0, sum_im = 0.0, c_im = 0.0;
    auto add = [](double& sum, double& comp, double term) {
        double yv = term - comp;
        double t = sum + yv;
        comp = (t - sum) - yv;
        sum = t;
    };
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        cplx prod{1.0, 0.0};
        for (std::size_t i : idx) prod *= roots[i];
        add(sum_re, c_re, prod.real());
        add(sum_im, c_im, prod.imag());

        std::size_t i = k;
        while (i > 0 && idx[i - 1] == count - k + (i - 1)) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
    return {sum_re, sum_im};
}

cplx carrier_gain(const FilterTaps& f, double omega) {
    // Gain applied to the sampled tone e^{-j w k T}: sum_n h[n] e^{+j w n T}.
    cplx acc{0.0, 0.0};
    for (std::size_t n = 0; n < f.taps.size(); ++n)
        acc += f.taps[n] * unit_phasor(omega * static_cast<double>(n) * f.sample_period);
    return acc;
}

double l1_norm(std::span<const cplx> taps) {
    double acc = 0.0;
    for (const cplx& t : taps) acc += std::abs(t);
    return acc;
}

double l1_norm(const FilterTaps& f) { return l1_norm(f.taps); }

double shrinkage_bound(std::size_t band_count, double omega_b, double sample_period, int order,
                       double phi_peak) {
    if (band_count == 0) throw std::invalid_argument("band count must be at least 1");
    if (order < 1) throw std::invalid_argument("filter order must be at least 1");
    if (!(omega_b > 0.0) || !(sample_period > 0.0))
        throw std::invalid_argument("bandwidth and sample period must be positive");
    double base = sample_period * std::ldexp(1.0, static_cast<int>(band_count) - 1) * omega_b *
                  std::numbers::e;
    return static_cast<double>(band_count) * std::pow(base, order) * phi_peak;
}

FilterTaps normalize_for_recovery(FilterTaps f) {
    if (f.taps.empty()) throw std::invalid_argument("cannot normalize an empty filter");
    cplx lead = f.taps.front();
    if (std::abs(lead) == 0.0) throw std::domain_error("leading filter tap is zero");
    if (lead != cplx{1.0, 0.0}) {
        for (cplx& t : f.taps) t /= lead;
        f.taps.front() = cplx{1.0, 0.0};
        f.normalizer *= lead;
    }
    f.normalized = true;
    return f;
}

std::vector<double> alias_map(std::span<const double> carriers, double sample_period) {
    check_build_args(carriers, sample_period);
    double rate = 2.0 * std::numbers::pi / sample_period;
    std::vector<double> out(carriers.size());
    for (std::size_t p = 0; p < carriers.size(); ++p) {
        double m = std::fmod(carriers[p], rate);
        if (m < 0.0) m += rate;
        if (m == rate) m = 0.0;
        out[p] = m;
    }
    for (std::size_t p = 0; p < out.size(); ++p) {
        for (std::size_t q = p + 1; q < out.size(); ++q) {
            double d = std::abs(out[p] - out[q]);
            if (std::min(d, rate - d) < 1e-12 * rate)
                throw std::invalid_argument("carriers " + std::to_string(p) + " and " +
                                            std::to_string(q) + " collide modulo the sampling rate");
        }
    }
    return out;
}

CommutationReport verify_commutation_identity(std::span<const cplx> phi,
                                              std::span<const double> carriers,
                                              std::size_t band_index, int order,
                                              double sample_period) {
    if (band_index >= carriers.size()) throw std::invalid_argument("band index out of range");
    if (order < 1) throw std::invalid_argument("filter order must be at least 1");
    std::size_t P = carriers.size();
    std::size_t full_len = static_cast<std::size_t>(order) * P;
    if (phi.size() <= full_len)
        throw std::invalid_argument("series too short for the filter length");

    FilterTaps psi_full = psi_power(build_psi(carriers, sample_period), order);

    std::vector<double> others;
    for (std::size_t p = 0; p < P; ++p)
        if (p != band_index) others.push_back(carriers[p]);
    std::vector<cplx> loo = {cplx{1.0, 0.0}};
    if (!others.empty()) loo = psi_power(build_psi(others, sample_period), order).taps;

    std::vector<cplx> diff = {cplx{1.0, 0.0}};
    {
        const cplx delta[2] = {cplx{-1.0, 0.0}, cplx{1.0, 0.0}};
        for (int n = 0; n < order; ++n) diff = convolve(diff, delta);
    }

    double w = carriers[band_index];
    std::size_t M = phi.size();

    std::vector<cplx> modulated(M);
    for (std::size_t k = 0; k < M; ++k)
        modulated[k] = phi[k] * unit_phasor(-w * static_cast<double>(k) * sample_period);

    // d = (N-fold plain difference) * phi, then remodulated with each sign.
    std::vector<cplx> d(M, cplx{0.0, 0.0});
    for (std::size_t k = diff.size() - 1; k < M; ++k)
        for (std::size_t n = 0; n < diff.size(); ++n) d[k] += diff[n] * phi[k - n];

    CommutationReport rep;
    for (const cplx& v : phi) rep.phi_peak = std::max(rep.phi_peak, std::abs(v));

    for (std::size_t k = full_len; k < M; ++k) {
        cplx lhs{0.0, 0.0};
        for (std::size_t n = 0; n < psi_full.taps.size(); ++n)
            lhs += psi_full.taps[n] * modulated[k - n];

        cplx rhs_minus{0.0, 0.0}, rhs_plus{0.0, 0.0};
        for (std::size_t n = 0; n < loo.size(); ++n) {
            std::size_t m = k - n;
            cplx g = d[m];
            cplx ph = unit_phasor(w * static_cast<double>(m) * sample_period);
            rhs_minus += loo[n] * (g * std::conj(ph));
            rhs_plus += loo[n] * (g * ph);
        }
        rep.deviation = std::max(rep.deviation, std::abs(lhs - rhs_minus));
        rep.deviation_flipped = std::max(rep.deviation_flipped, std::abs(lhs - rhs_plus));
    }
    return rep;
}

}  // namespace usmb
