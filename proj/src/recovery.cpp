#include "usmb/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "usmb/modulo.hpp"

namespace usmb {

RateError::RateError(double max_admissible_ts_, const std::string& what_)
    : std::runtime_error(what_), max_admissible_ts(max_admissible_ts_) {}

RecoveryContractError::RecoveryContractError(Kind kind_, std::size_t index_, double observed_,
                                             const std::string& what_)
    : std::runtime_error(what_), kind(kind_), index(index_), observed(observed_) {}

std::size_t RecoveryParams::warmup_length() const {
    if (warmup) return *warmup;
    return 2 * static_cast<std::size_t>(order) * carriers.size();
}

void RecoveryParams::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("fold threshold must be positive and finite");
    if (carriers.empty()) throw std::invalid_argument("at least one carrier is required");
    if (order < 1) throw std::invalid_argument("filter order must be at least 1");
    if (!(sample_period > 0.0) || !std::isfinite(sample_period))
        throw std::invalid_argument("sample period must be positive and finite");
    if (beta != 0.0) {
        double cells = beta / (2.0 * lambda);
        if (!(beta > 0.0) || std::abs(cells - std::round(cells)) > 1e-9)
            throw std::invalid_argument("amplitude bound must be a positive multiple of 2*lambda");
    }
    if (warmup && *warmup < static_cast<std::size_t>(order) * carriers.size())
        throw std::invalid_argument("warm-up region shorter than the filter support");
}

double choose_beta(double phi_peak, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("fold threshold must be positive and finite");
    if (!(phi_peak >= 0.0) || !std::isfinite(phi_peak))
        throw std::invalid_argument("signal peak must be nonnegative and finite");
    double cells = std::max(1.0, std::ceil(phi_peak / (2.0 * lambda)));
    return 2.0 * lambda * cells;
}

int choose_order(double lambda, double beta, std::size_t band_count, double omega_b,
                 double sample_period) {
    if (band_count == 0) throw std::invalid_argument("band count must be at least 1");
    if (!(omega_b > 0.0) || !(sample_period > 0.0))
        throw std::invalid_argument("bandwidth and sample period must be positive");
    if (!(lambda > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("threshold and amplitude bound must be positive");

    double rate_term = static_cast<double>(band_count) *
                       std::ldexp(1.0, static_cast<int>(band_count) - 1) * omega_b *
                       std::numbers::e;
    double base = sample_period * rate_term;
    if (base >= 1.0)
        throw RateError(1.0 / rate_term,
                        "sampling too slow for any contracting order; need T_S below " +
                            std::to_string(1.0 / rate_term));

    double target = lambda / (static_cast<double>(band_count) * beta);
    int n = 1;
    if (target < 1.0) n = std::max(1, static_cast<int>(std::ceil(std::log(target) / std::log(base))));

    while (shrinkage_bound(band_count, omega_b, sample_period, n, beta) > lambda) {
        if (++n > 4096) throw std::runtime_error("order search failed to converge");
    }
    return n;
}

double filtered_peak(const ComplexSeries& x, const FilterTaps& f) {
    std::size_t L = f.taps.size();
    if (x.samples.size() < L) throw std::invalid_argument("series shorter than the filter");
    double peak = 0.0;
    for (std::size_t k = L - 1; k < x.samples.size(); ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t n = 0; n < L; ++n) acc += f.taps[n] * x.samples[k - n];
        peak = std::max({peak, std::abs(acc.real()), std::abs(acc.imag())});
    }
    return peak;
}

MeasuredOrder choose_order_measured(const ComplexSeries& reference, std::span<const double> carriers,
                                    double lambda, int max_order, double margin,
                                    std::size_t tap_cap) {
    if (!(lambda > 0.0)) throw std::invalid_argument("fold threshold must be positive");
    if (max_order < 1) throw std::invalid_argument("max order must be at least 1");
    if (!(margin > 0.0)) throw std::invalid_argument("margin must be positive");

    FilterTaps base = build_psi(carriers, reference.sample_period);
    std::size_t degree = base.taps.size() - 1;

    MeasuredOrder best{1, std::numeric_limits<double>::infinity(), false};
    FilterTaps current = base;
    for (int n = 1; n <= max_order; ++n) {
        if (degree * static_cast<std::size_t>(n) > tap_cap) break;
        if (n > 1) {
            current.taps = convolve(current.taps, base.taps);
            current.order = n;
        }
        if (current.taps.size() > reference.samples.size()) break;
        double peak = filtered_peak(reference, current);
        if (peak < best.measured_peak) best = MeasuredOrder{n, peak, false};
        if (peak <= margin * lambda) return MeasuredOrder{n, peak, true};
    }
    return best;  // smallest observed peak; satisfied stays false
}

RecoveryResult recover(const FoldedSeries& y, const RecoveryParams& params,
                       const RecoveryOptions& options) {
    params.validate();
    double lambda = params.lambda;
    if (std::abs(y.config.threshold - lambda) > 1e-12 * lambda)
        throw std::invalid_argument("fold threshold mismatch between series and parameters");
    if (std::abs(y.series.sample_period - params.sample_period) >
        1e-12 * params.sample_period)
        throw std::invalid_argument("sample period mismatch between series and parameters");

    FilterTaps taps = normalize_for_recovery(
        psi_power(build_psi(params.carriers, params.sample_period), params.order, params.tap_cap));
    std::size_t L = taps.taps.size();
    std::size_t M = y.series.samples.size();
    if (M < L) throw std::invalid_argument("series shorter than the filter");
    std::size_t warmup = std::min(params.warmup_length(), M);

    RecoveryResult out;
    out.recovered = y.series;
    out.residual.threshold = lambda;
    out.residual.counts.assign(M, {0, 0});
    out.diagnostics.order_used = params.order;
    out.diagnostics.warmup_used = warmup;

    // Filtered stream over the full-overlap region; corrections feed forward
    // so each later sample sees the unfolded past.
    std::vector<cplx> filtered(M, cplx{0.0, 0.0});
    for (std::size_t k = L - 1; k < M; ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t n = 0; n < L; ++n) acc += taps.taps[n] * y.series.samples[k - n];
        filtered[k] = acc;
    }

    std::size_t violation_index = M;
    double violation_mag = 0.0;
    for (std::size_t k = L - 1; k < warmup; ++k) {
        auto probe = [&](double v) {
            double mag = std::abs(v);
            out.diagnostics.max_filtered_prefix =
                std::max(out.diagnostics.max_filtered_prefix, mag);
            // any component at or past lambda demands a residual, which the
            // fold-free warm-up contract forbids
            if (mag >= lambda && violation_index == M) {
                violation_index = k;
                violation_mag = mag;
            }
        };
        probe(filtered[k].real());
        probe(filtered[k].imag());
    }
    if (options.enforce_contract && violation_index != M)
        throw RecoveryContractError(
            RecoveryContractError::Kind::WarmupViolation, violation_index, violation_mag,
            "filtered magnitude " + std::to_string(violation_mag) + " at sample " +
                std::to_string(violation_index) +
                " demands a residual inside the warm-up region; the head must be "
                "fold-free and contracted below the threshold");

    // beta bounds each band's envelope, so the composite series stays within
    // band_count * beta and no sample can demand a residual count beyond
    // (band_count * beta + lambda) / (2 lambda); anything larger means the
    // filter failed to contract this capture and the corrections are running
    // away.
    std::int64_t count_cap = std::numeric_limits<std::int64_t>::max();
    if (params.beta > 0.0) {
        double composite = static_cast<double>(params.carriers.size()) * params.beta;
        count_cap = std::llround(composite / (2.0 * lambda)) + 1;
    }

    for (std::size_t k = warmup; k < M; ++k) {
        cplx v = filtered[k];
        auto snap = [&](double comp) {
            double rho = fold_scalar(comp, lambda) - comp;
            long long m = std::llround(rho / (2.0 * lambda));
            double dev = std::abs(rho - 2.0 * lambda * static_cast<double>(m));
            out.diagnostics.max_lattice_deviation =
                std::max(out.diagnostics.max_lattice_deviation, dev);
            return static_cast<std::int64_t>(m);
        };
        std::int64_t m_re = snap(v.real());
        std::int64_t m_im = snap(v.imag());
        if (options.enforce_contract &&
            (std::llabs(m_re) > count_cap || std::llabs(m_im) > count_cap))
            throw RecoveryContractError(
                RecoveryContractError::Kind::OrderTooSmall, k,
                std::max(std::abs(v.real()), std::abs(v.imag())),
                "residual count at sample " + std::to_string(k) +
                    " exceeds the composite envelope bound; the filter order is "
                    "too small for this capture");
        if (m_re == 0 && m_im == 0) continue;

        cplx corr{2.0 * lambda * static_cast<double>(m_re),
                  2.0 * lambda * static_cast<double>(m_im)};
        out.recovered.samples[k] += corr;
        out.residual.counts[k] = {m_re, m_im};
        out.fold_indices.push_back(k);
        ++out.diagnostics.corrections;
        for (std::size_t n = 1; n < L && k + n < M; ++n) filtered[k + n] += corr * taps.taps[n];
    }
    return out;
}

RecoveryResult difference_recover(const FoldedSeries& y, double lambda, int order) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("fold threshold must be positive and finite");
    if (order < 1) throw std::invalid_argument("difference order must be at least 1");

    std::size_t N = static_cast<std::size_t>(order);
    std::size_t M = y.series.samples.size();
    if (M <= N) throw std::invalid_argument("series shorter than the difference filter");

    // Plain N-th difference taps, exact small integers.
    std::vector<cplx> diff = {cplx{1.0, 0.0}};
    {
        const cplx delta[2] = {cplx{-1.0, 0.0}, cplx{1.0, 0.0}};
        for (int n = 0; n < order; ++n) diff = convolve(diff, delta);
    }

    RecoveryResult out;
    out.recovered = y.series;
    out.residual.threshold = lambda;
    out.residual.counts.assign(M, {0, 0});
    out.diagnostics.order_used = order;
    out.diagnostics.warmup_used = N;

    // The folded residual of the N-th difference lives on the 2*lambda
    // lattice; snap it to integers and undo the differencing exactly.
    std::vector<std::int64_t> eps_re(M, 0), eps_im(M, 0);
    for (std::size_t k = N; k < M; ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t n = 0; n <= N; ++n) acc += diff[n] * y.series.samples[k - n];
        auto snap = [&](double comp) {
            double rho = fold_scalar(comp, lambda) - comp;
            long long m = std::llround(rho / (2.0 * lambda));
            double dev = std::abs(rho - 2.0 * lambda * static_cast<double>(m));
            out.diagnostics.max_lattice_deviation =
                std::max(out.diagnostics.max_lattice_deviation, dev);
            out.diagnostics.max_filtered_prefix =
                std::max(out.diagnostics.max_filtered_prefix, std::abs(comp));
            return static_cast<std::int64_t>(m);
        };
        eps_re[k] = snap(acc.real());
        eps_im[k] = snap(acc.imag());
    }

    // Each anti-difference pass integrates with a zero anchor at the start.
    for (int s = 0; s < order; ++s) {
        std::int64_t run_re = 0, run_im = 0;
        for (std::size_t k = 0; k < M; ++k) {
            run_re -= eps_re[k];
            run_im -= eps_im[k];
            eps_re[k] = run_re;
            eps_im[k] = run_im;
        }
    }

    for (std::size_t k = 0; k < M; ++k) {
        if (eps_re[k] == 0 && eps_im[k] == 0) continue;
        out.residual.counts[k] = {eps_re[k], eps_im[k]};
        out.recovered.samples[k] +=
            cplx{2.0 * lambda * static_cast<double>(eps_re[k]),
                 2.0 * lambda * static_cast<double>(eps_im[k])};
        out.fold_indices.push_back(k);
    }
    out.diagnostics.corrections = out.fold_indices.size();
    return out;
}

ErrorStats error_stats(const ComplexSeries& truth, const ComplexSeries& estimate) {
    if (truth.samples.size() != estimate.samples.size())
        throw std::invalid_argument("error stats: length mismatch");
    ErrorStats s;
    if (truth.samples.empty()) return s;
    double err_acc = 0.0, ref_acc = 0.0;
    for (std::size_t k = 0; k < truth.samples.size(); ++k) {
        cplx e = estimate.samples[k] - truth.samples[k];
        err_acc += std::norm(e);
        ref_acc += std::norm(truth.samples[k]);
        s.max_err = std::max(s.max_err, std::abs(e));
    }
    double n = static_cast<double>(truth.samples.size());
    s.mse = err_acc / n;
    double ref = ref_acc / n;
    if (ref > 0.0)
        s.nmse = s.mse / ref;
    else
        s.nmse = s.mse > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return s;
}

}  // namespace usmb
