// Release acceptance: every gate below must hold before the tool ships.
// Each criterion prints exactly one [PASS]/[FAIL] line; the exit code is the
// number of failed criteria.
#include <usmb/feasibility.hpp>
#include <usmb/harness.hpp>
#include <usmb/modulo.hpp>
#include <usmb/recovery.hpp>
#include <usmb/signal_model.hpp>
#include <usmb/spectral_filter.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

using namespace usmb;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 20240817;
constexpr double kEps = 2.220446049250313e-16;

int g_failures = 0;

void verdict(int number, bool pass, const std::string& text) {
    std::printf("[%s] %d. %s\n", pass ? "PASS" : "FAIL", number, text.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in.good()) return "<unreadable:" + p.string() + ">";
    return {std::istreambuf_iterator<char>(in), {}};
}

bool same_bits(double a, double b) {
    std::uint64_t ia, ib;
    std::memcpy(&ia, &a, sizeof ia);
    std::memcpy(&ib, &b, sizeof ib);
    return ia == ib;
}

char buf[512];

// ---- 1. noiseless suite ---------------------------------------------------

SuiteOutcome criterion_suite(const fs::path& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = make_noiseless_suite_config(kMasterSeed);
    cfg.out_dir = out_dir;
    SuiteOutcome out = run_noiseless_suite(cfg);
    emit_report(cfg, out.records, suite_aggregates_json(out), out.pass);
    double elapsed = seconds_since(t0);

    double worst_nmse = 0.0;
    std::size_t exact = 0;
    for (auto& r : out.records)
        if (r.status == TrialStatus::Exact) {
            ++exact;
            worst_nmse = std::max(worst_nmse, r.nmse);
        }
    bool pass = out.feasible >= cfg.trials / 2 && exact == out.feasible &&
                worst_nmse < cfg.exact_nmse && elapsed < 60.0 && out.pass;
    std::snprintf(buf, sizeof buf,
                  "noiseless suite: %zu/%zu feasible, %zu exact, worst nmse %.2e, %.1f s "
                  "(need >=%zu feasible, all exact with nmse < %.0e, < 60 s)",
                  out.feasible, cfg.trials, exact, worst_nmse, elapsed, cfg.trials / 2,
                  cfg.exact_nmse);
    verdict(1, pass, buf);
    return out;
}

// ---- 2. noise sweep -------------------------------------------------------

SweepOutcome criterion_sweep(const fs::path& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg = make_noise_sweep_config(kMasterSeed);
    cfg.out_dir = out_dir;
    SweepOutcome out = run_noise_sweep(cfg);
    emit_report(cfg, out.records, sweep_aggregates_json(out), out.pass);
    double elapsed = seconds_since(t0);

    double gate = cfg.degraded_mse_ratio * cfg.scale_peak * cfg.scale_peak;
    double worst_high_snr = 0.0;
    for (auto& [snr, mse] : out.mean_mse_by_snr)
        if (snr >= 20.0) worst_high_snr = std::max(worst_high_snr, mse);
    bool pass = worst_high_snr < gate && out.monotonicity_inversions <= 1 &&
                elapsed < 300.0 && out.pass;
    std::snprintf(buf, sizeof buf,
                  "noise sweep: worst mean mse %.2e at snr >= 20 dB, %zu inversion(s), %.1f s "
                  "(need < %.0e, <= 1 inversion, < 300 s)",
                  worst_high_snr, out.monotonicity_inversions, elapsed, gate);
    verdict(2, pass, buf);
    return out;
}

// ---- 3. quantized hardware-grade run --------------------------------------

HwOutcome criterion_hw(const fs::path& out_dir) {
    ExperimentConfig cfg = make_quantized_hw_config(kMasterSeed);
    cfg.out_dir = out_dir;
    HwOutcome out = run_quantized_hw(cfg);
    std::vector<TrialRecord> recs = {out.proposed};
    emit_report(cfg, recs, hw_aggregates_json(out), out.pass);

    double dr_want = 5.91 / 0.43;
    bool pass = out.proposed.mse <= 1e-2 && out.baseline_mse > 10.0 * out.proposed.mse &&
                std::abs(out.dynamic_range_ratio - dr_want) < 1e-9 && out.pass;
    std::snprintf(buf, sizeof buf,
                  "quantized capture: mse %.2e vs difference baseline %.2e (%.0fx), "
                  "dynamic range %.2f lambda (need mse <= 1e-2, baseline > 10x, range %.2f)",
                  out.proposed.mse, out.baseline_mse,
                  out.baseline_mse / std::max(out.proposed.mse, 1e-300),
                  out.dynamic_range_ratio, dr_want);
    verdict(3, pass, buf);
    return out;
}

// ---- 4. shrinkage bound ---------------------------------------------------

void criterion_shrinkage() {
    std::mt19937_64 rng(derive_seed(kMasterSeed, 40));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int checked = 0, violations = 0;
    double worst_ratio = 0.0;
    while (checked < 100) {
        std::size_t p = 1 + rng() % 4;
        int n = 1 + int(rng() % 6);
        double omega_b = 50.0 + 750.0 * u01(rng);
        double contraction = 0.05 + 0.75 * u01(rng);
        double ts = contraction / (std::ldexp(1.0, int(p) - 1) * omega_b * std::numbers::e);
        double rate = 2 * std::numbers::pi / ts;

        // carriers spaced at least 2.5 halfwidths, then checked on the circle
        std::vector<double> carriers;
        bool ok = true;
        for (std::size_t i = 0; i < p && ok; ++i) {
            ok = false;
            for (int attempt = 0; attempt < 50; ++attempt) {
                double w = (u01(rng) - 0.5) * 0.9 * rate;
                bool clear = true;
                for (double v : carriers)
                    if (std::abs(v - w) < 2.5 * omega_b) clear = false;
                if (clear) {
                    carriers.push_back(w);
                    ok = true;
                    break;
                }
            }
        }
        if (!ok || !alias_free_check(carriers, omega_b, ts).alias_free) continue;

        MultibandSpec spec;
        spec.band_count = p;
        spec.baseband_halfwidth = omega_b;
        spec.carriers = carriers;
        for (std::size_t i = 0; i < p; ++i) spec.band_seeds.push_back({rng(), 1.0});
        spec.components_per_band = 6;
        TimeGrid grid{0.0, ts, 1024};
        MultibandSignal sig = synth_multiband(spec, grid);
        if (sig.phi_peak <= 0.0) continue;

        FilterTaps taps = psi_power(build_psi(carriers, ts), n, 128);
        double measured = filtered_peak(sig.series, taps);
        double bound = shrinkage_bound(p, omega_b, ts, n, sig.phi_peak);
        worst_ratio = std::max(worst_ratio, measured / bound);
        if (measured > bound) ++violations;
        ++checked;
    }
    bool pass = violations == 0;
    std::snprintf(buf, sizeof buf,
                  "shrinkage bound: %d random band configurations, %d above the bound, "
                  "worst measured/bound %.3f (need none above)",
                  checked, violations, worst_ratio);
    verdict(4, pass, buf);
}

// ---- 5. filter/modulation commutation -------------------------------------

void criterion_commutation() {
    std::mt19937_64 rng(derive_seed(kMasterSeed, 50));
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(0.2, 2.9);
    double worst = 0.0;
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t p = 1 + rng() % 4;
        int n = 1 + int(rng() % 3);
        std::vector<double> w;
        while (w.size() < p) {
            double v = phase(rng);
            bool clear = true;
            for (double uu : w)
                if (std::abs(uu - v) < 0.05) clear = false;
            if (clear) w.push_back(v);
        }
        std::vector<cplx> phi(static_cast<std::size_t>(n) * p + 40);
        double peak = 0.0;
        for (auto& v : phi) {
            v = {amp(rng), amp(rng)};
            peak = std::max({peak, std::abs(v.real()), std::abs(v.imag())});
        }
        CommutationReport rep =
            verify_commutation_identity(phi, w, rng() % p, n, 1.0);
        worst = std::max(worst, rep.deviation / peak);
        ++checked;
    }

    // single-band reduction: the identity collapses to a modulated plain
    // difference, and the flipped modulation sign must break it
    bool reduction_ok = true;
    for (double wt : {0.4, 1.1, 2.2, 2.7}) {
        std::vector<cplx> phi(48);
        for (auto& v : phi) v = {amp(rng), amp(rng)};
        CommutationReport rep =
            verify_commutation_identity(phi, std::vector<double>{wt}, 0, 2, 1.0);
        if (rep.deviation > 1e-10 * rep.phi_peak) reduction_ok = false;
        if (rep.deviation_flipped < 1e6 * std::max(rep.deviation, 1e-300)) reduction_ok = false;
    }
    bool pass = worst < 1e-9 && reduction_ok;
    std::snprintf(buf, sizeof buf,
                  "commutation identity: %d random filters, worst deviation %.2e of peak, "
                  "single-band reduction %s (need < 1e-9 and sign sensitivity)",
                  checked, worst, reduction_ok ? "sign-sensitive" : "NOT sign-sensitive");
    verdict(5, pass, buf);
}

// ---- 6. tap identity, carrier zeros, l1 growth ----------------------------

void criterion_taps() {
    std::mt19937_64 rng(derive_seed(kMasterSeed, 60));
    std::uniform_real_distribution<double> phase(0.15, 3.0);
    double worst_ulps = 0.0, worst_zero = 0.0, worst_l1_excess = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t p = 1 + rng() % 8;
        std::vector<double> w;
        while (w.size() < p) {
            double v = phase(rng);
            bool clear = true;
            for (double uu : w)
                if (std::abs(uu - v) < 0.02) clear = false;
            if (clear) w.push_back(v);
        }
        FilterTaps f = build_psi(w, 1.0);
        double vecmax = 0.0;
        for (auto& t : f.taps)
            vecmax = std::max({vecmax, std::abs(t.real()), std::abs(t.imag())});
        for (std::size_t k = 0; k <= p; ++k) {
            cplx e = esp_coefficient(w, 1.0, k);
            double sgn = ((p + k) % 2 == 0) ? 1.0 : -1.0;
            cplx want = sgn * e;
            double d = std::max(std::abs(f.taps[k].real() - want.real()),
                                std::abs(f.taps[k].imag() - want.imag()));
            worst_ulps = std::max(worst_ulps, d / (kEps * vecmax));
        }
        double l1 = l1_norm(f);
        for (double wp : w)
            worst_zero = std::max(worst_zero, std::abs(carrier_gain(f, wp)) / l1);
    }
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t p = 1 + rng() % 6;
        int n = 1 + int(rng() % 12);
        if (n * p > 72) continue;
        std::vector<double> w;
        while (w.size() < p) {
            double v = phase(rng);
            bool clear = true;
            for (double uu : w)
                if (std::abs(uu - v) < 0.05) clear = false;
            if (clear) w.push_back(v);
        }
        FilterTaps f = psi_power(build_psi(w, 1.0), n, 128);
        double excess = l1_norm(f) / std::pow(2.0, double(n) * double(p));
        worst_l1_excess = std::max(worst_l1_excess, excess);
    }
    bool pass = worst_ulps <= 4.0 && worst_zero < 1e-9 && worst_l1_excess <= 1.0 + 1e-12;
    std::snprintf(buf, sizeof buf,
                  "filter taps: taps vs symmetric polynomials %.2f ulps of top tap, carrier "
                  "zeros %.1e of l1, l1/2^(NP) <= %.3f (need <= 4 ulps, < 1e-9, <= 1)",
                  worst_ulps, worst_zero, worst_l1_excess);
    verdict(6, pass, buf);
}

// ---- 7. sampling-rate windows vs brute replica scan -----------------------

bool bandpass_ok_brute(double omega0, double omega_b, double ts) {
    double rate = 2 * std::numbers::pi / ts;
    double lo = omega0 - omega_b, hi = omega0 + omega_b;
    int kmax = static_cast<int>(std::ceil(2.0 * hi / rate)) + 2;
    for (int k = -kmax; k <= kmax; ++k) {
        double shift = k * rate;
        double a = -hi + shift, b = -lo + shift;
        if (a < hi && lo < b) return false;
        if (k != 0) {
            double c = lo + shift, d = hi + shift;
            if (c < hi && lo < d) return false;
        }
    }
    return true;
}

void criterion_windows() {
    std::mt19937_64 rng(derive_seed(kMasterSeed, 70));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    int mismatches = 0, compared = 0, capped = 0;
    for (int pair = 0; pair < 100; ++pair) {
        double omega_b = 1.0 + 999.0 * u01(rng);
        double omega0 = omega_b * (1.5 + 398.5 * u01(rng));
        auto windows = bandpass_windows(omega0, omega_b);
        double cap = 1.0 / (4.0 * omega_b * std::numbers::e);
        for (auto& w : windows)
            if (w.t_max > cap * (1 + 1e-12)) ++capped;
        for (int i = 0; i < 100; ++i) {
            double ts = u01(rng) * cap * 1.05;
            if (ts <= 0.0) continue;
            bool near_edge = std::abs(ts - cap) < 1e-9 * cap;
            bool in_window = false;
            for (auto& w : windows) {
                if (ts >= w.t_min && ts <= w.t_max) in_window = true;
                if (std::abs(ts - w.t_min) < 1e-9 * cap || std::abs(ts - w.t_max) < 1e-9 * cap)
                    near_edge = true;
            }
            if (near_edge) continue;
            bool ok = bandpass_ok_brute(omega0, omega_b, ts) && ts < cap;
            if (in_window != ok) ++mismatches;
            ++compared;
        }
    }
    bool pass = mismatches == 0 && capped == 0 && compared > 9000;
    std::snprintf(buf, sizeof buf,
                  "rate windows: %d sampled periods across 100 band placements, %d "
                  "misclassified, %d past the fold cap (need 0 and 0)",
                  compared, mismatches, capped);
    verdict(7, pass, buf);
}

// ---- 8. fold map properties -----------------------------------------------

void criterion_fold() {
    std::mt19937_64 rng(derive_seed(kMasterSeed, 80));
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    std::size_t checked = 0, range_bad = 0, idem_bad = 0, ident_bad = 0;
    std::size_t lattice_bad = 0, phase_bad = 0, phase_checked = 0;

    for (double lambda : {1.0, 0.5, 0.43}) {
        std::vector<double> values;
        values.reserve(340000);
        for (int i = 0; i < 333000; ++i) values.push_back(u(rng) * lambda);
        // exact lattice points and their neighbours, both zeros, denormals
        for (int k = -16; k <= 16; ++k) {
            double v = k * lambda;
            values.push_back(v);
            values.push_back(std::nextafter(v, 1e300));
            values.push_back(std::nextafter(v, -1e300));
        }
        values.push_back(0.0);
        values.push_back(-0.0);
        values.push_back(5e-324);
        values.push_back(-5e-324);

        for (double v : values) {
            double r = fold_scalar(v, lambda);
            ++checked;
            if (!(r >= -lambda && r < lambda)) ++range_bad;
            if (!same_bits(fold_scalar(r, lambda), r)) ++idem_bad;
            if (std::abs(v) < lambda) {
                // identity bit for bit, except -0.0 which normalizes to +0.0
                bool ok = same_bits(r, v) || (v == 0.0 && r == 0.0 && !std::signbit(r));
                if (!ok) ++ident_bad;
            }
            double m = std::round((v - r) / (2.0 * lambda));
            if (std::abs(v - r - 2.0 * lambda * m) > 1e-12 * lambda) ++lattice_bad;
            if (lambda - std::abs(r) > 1e-6 * lambda) {
                double via_phase = lambda / std::numbers::pi *
                                   std::arg(std::polar(1.0, std::numbers::pi * v / lambda));
                ++phase_checked;
                if (std::abs(r - via_phase) > 1e-9 * lambda) ++phase_bad;
            }
        }
        // half-open boundary on exactly representable multiples
        if (lambda == 1.0 || lambda == 0.5) {
            if (fold_scalar(lambda, lambda) != -lambda) ++range_bad;
            if (fold_scalar(-lambda, lambda) != -lambda) ++range_bad;
            if (fold_scalar(3 * lambda, lambda) != -lambda) ++range_bad;
            double z = fold_scalar(2 * lambda, lambda);
            if (z != 0.0 || std::signbit(z)) ++range_bad;
            z = fold_scalar(-2 * lambda, lambda);
            if (z != 0.0 || std::signbit(z)) ++range_bad;
        }
    }
    bool pass = range_bad == 0 && idem_bad == 0 && ident_bad == 0 && lattice_bad == 0 &&
                phase_bad == 0 && checked > 990000;
    std::snprintf(buf, sizeof buf,
                  "fold map: %zu values, %zu range / %zu idempotence / %zu identity / %zu "
                  "lattice / %zu phase-form defects over %zu phase checks (need all 0)",
                  checked, range_bad, idem_bad, ident_bad, lattice_bad, phase_bad,
                  phase_checked);
    verdict(8, pass, buf);
}

// ---- 9. byte-identical reruns ---------------------------------------------

void criterion_determinism(const fs::path& root) {
    bool pass = true;
    std::string detail;

    auto compare = [&](const fs::path& a, const fs::path& b, const char* label) {
        bool same = slurp(a / "results.csv") == slurp(b / "results.csv") &&
                    slurp(a / "summary.json") == slurp(b / "summary.json");
        if (!same) {
            pass = false;
            detail += std::string(" ") + label + " differs;";
        }
    };

    {
        ExperimentConfig cfg = make_noiseless_suite_config(kMasterSeed);
        cfg.out_dir = root / "suite_rerun";
        cfg.jobs = 4;  // also crosses the parallel path
        SuiteOutcome out = run_noiseless_suite(cfg);
        emit_report(cfg, out.records, suite_aggregates_json(out), out.pass);
        compare(root / "suite", cfg.out_dir, "suite");
    }
    {
        ExperimentConfig cfg = make_noise_sweep_config(kMasterSeed);
        cfg.out_dir = root / "sweep_rerun";
        SweepOutcome out = run_noise_sweep(cfg);
        emit_report(cfg, out.records, sweep_aggregates_json(out), out.pass);
        compare(root / "sweep", cfg.out_dir, "sweep");
    }
    {
        ExperimentConfig cfg = make_quantized_hw_config(kMasterSeed);
        cfg.out_dir = root / "hw_rerun";
        HwOutcome out = run_quantized_hw(cfg);
        std::vector<TrialRecord> recs = {out.proposed};
        emit_report(cfg, recs, hw_aggregates_json(out), out.pass);
        compare(root / "hw", cfg.out_dir, "hw");
    }
    std::snprintf(buf, sizeof buf,
                  "determinism: suite (4 threads), sweep, and quantized reruns%s "
                  "(need byte-identical result files)",
                  pass ? " byte-identical" : detail.c_str());
    verdict(9, pass, buf);
}

}  // namespace

int main() {
    fs::path root = fs::temp_directory_path() /
                    ("usmb_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(root);

    criterion_suite(root / "suite");
    criterion_sweep(root / "sweep");
    criterion_hw(root / "hw");
    criterion_shrinkage();
    criterion_commutation();
    criterion_taps();
    criterion_windows();
    criterion_fold();
    criterion_determinism(root);

    std::error_code ec;
    fs::remove_all(root, ec);

    std::printf("%d/9 criteria passed\n", 9 - g_failures);
    return g_failures;
}
