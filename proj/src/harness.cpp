#include "usmb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "usmb/series_io.hpp"

namespace usmb {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kHwMseGate = 1e-2;  ///< absolute MSE bound for the quantized run

double effective_lambda(const ExperimentConfig& cfg) {
    if (cfg.lambda_fixed) return *cfg.lambda_fixed;
    return cfg.scale_peak / cfg.lambda_ratio;
}

const char* placement_name(NoisePlacement p) {
    switch (p) {
        case NoisePlacement::PreFold: return "pre-fold";
        case NoisePlacement::PostFold: return "post-fold";
        case NoisePlacement::PostFoldRefolded: return "post-fold-refolded";
    }
    return "post-fold";
}

/// Runs fn(0..n-1) across `jobs` threads. Each index writes only its own
/// output slot, so the result is identical to the sequential order.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::size_t workers = std::min(jobs, n);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string sanitize_note(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

/// Seed index for band p: conjugate-paired carriers share the seed of their
/// common |carrier| so mirrored bands carry identical basebands and the
/// composite is real-valued.
std::vector<std::uint64_t> band_seed_values(const ExperimentConfig& cfg,
                                            std::span<const double> carriers_hz,
                                            std::uint64_t trial_seed) {
    std::vector<std::uint64_t> seeds(carriers_hz.size());
    if (!cfg.conjugate_pairs) {
        for (std::size_t p = 0; p < carriers_hz.size(); ++p)
            seeds[p] = derive_seed(trial_seed, 100 + p);
        return seeds;
    }
    std::vector<double> mags(carriers_hz.size());
    for (std::size_t p = 0; p < carriers_hz.size(); ++p) mags[p] = std::abs(carriers_hz[p]);
    std::vector<double> unique_mags = mags;
    std::sort(unique_mags.begin(), unique_mags.end());
    unique_mags.erase(std::unique(unique_mags.begin(), unique_mags.end()), unique_mags.end());
    for (std::size_t p = 0; p < carriers_hz.size(); ++p) {
        std::size_t canonical =
            static_cast<std::size_t>(std::lower_bound(unique_mags.begin(), unique_mags.end(),
                                                      mags[p]) -
                                     unique_mags.begin());
        seeds[p] = derive_seed(trial_seed, 100 + canonical);
    }
    return seeds;
}

MultibandSignal synth_trial_signal(const ExperimentConfig& cfg,
                                   std::span<const double> carriers_hz,
                                   std::uint64_t trial_seed) {
    double omega_b = std::numbers::pi * cfg.band_width_hz;
    MultibandSpec spec;
    spec.band_count = carriers_hz.size();
    spec.baseband_halfwidth = omega_b;
    spec.carriers.resize(carriers_hz.size());
    for (std::size_t p = 0; p < carriers_hz.size(); ++p)
        spec.carriers[p] = 2.0 * std::numbers::pi * carriers_hz[p];
    std::vector<std::uint64_t> seeds = band_seed_values(cfg, carriers_hz, trial_seed);
    spec.band_seeds.resize(carriers_hz.size());
    for (std::size_t p = 0; p < carriers_hz.size(); ++p)
        spec.band_seeds[p] = BandSeed{seeds[p], 1.0};
    spec.components_per_band = cfg.components_per_band;
    spec.taper = Taper{cfg.taper_quiet, cfg.taper_ramp};

    TimeGrid grid{0.0, cfg.sample_period, cfg.grid_length};
    MultibandSignal sig = synth_multiband(spec, grid);
    scale_to_peak(sig, cfg.scale_peak);
    return sig;
}

TrialStatus classify(const ExperimentConfig& cfg, const ErrorStats& stats) {
    if (stats.nmse <= cfg.exact_nmse) return TrialStatus::Exact;
    if (stats.mse <= cfg.degraded_mse_ratio * cfg.scale_peak * cfg.scale_peak)
        return TrialStatus::Degraded;
    return TrialStatus::Failed;
}

TrialRecord run_suite_trial(const ExperimentConfig& cfg, std::size_t trial) {
    auto start = std::chrono::steady_clock::now();
    double omega_b = std::numbers::pi * cfg.band_width_hz;
    double lambda = effective_lambda(cfg);

    TrialRecord rec;
    rec.trial = trial;
    rec.seed = derive_seed(cfg.master_seed, trial);
    rec.lambda = lambda;
    rec.peak = cfg.scale_peak;

    std::mt19937_64 rng(derive_seed(rec.seed, 1));
    double f_lo = cfg.band_width_hz;
    double f_hi = cfg.carrier_span_factor / cfg.sample_period - cfg.band_width_hz;
    std::uniform_real_distribution<double> draw(f_lo, f_hi);

    std::vector<double> carriers_hz(cfg.band_count);
    std::vector<double> carriers_rad(cfg.band_count);
    MultibandSignal sig;
    MeasuredOrder measured;
    std::string reason;
    for (std::size_t attempt = 0; attempt <= cfg.max_redraws; ++attempt) {
        if (attempt > 0) ++rec.redraws;
        for (double& f : carriers_hz) f = draw(rng);
        std::sort(carriers_hz.begin(), carriers_hz.end());
        for (std::size_t p = 0; p < cfg.band_count; ++p)
            carriers_rad[p] = 2.0 * std::numbers::pi * carriers_hz[p];

        reason.clear();
        for (std::size_t p = 0; p + 1 < cfg.band_count && reason.empty(); ++p)
            if (carriers_rad[p + 1] - carriers_rad[p] <= omega_b) reason = "carrier-overlap";
        if (reason.empty() &&
            !alias_free_check(carriers_rad, omega_b, cfg.sample_period).alias_free)
            reason = "alias-collision";
        if (!reason.empty()) continue;

        sig = synth_trial_signal(cfg, carriers_hz, rec.seed);
        measured = choose_order_measured(sig.series, carriers_rad, lambda, cfg.max_order,
                                         cfg.order_margin);
        if (!measured.satisfied) {
            reason = "no-admissible-order";
            continue;
        }
        break;
    }
    rec.carriers_hz = carriers_hz;
    if (!reason.empty()) {
        rec.status = TrialStatus::InfeasibleConfig;
        rec.note = reason;
        rec.runtime_ms = elapsed_ms(start);
        return rec;
    }

    rec.order = measured.order;
    rec.measured_peak = measured.measured_peak;
    rec.beta = choose_beta(sig.phi_peak, lambda);

    ModuloConfig fold_cfg;
    fold_cfg.threshold = lambda;
    FoldedSeries y = fold_series(sig.series, fold_cfg);

    RecoveryParams params;
    params.lambda = lambda;
    params.carriers = carriers_rad;
    params.order = measured.order;
    params.beta = rec.beta;
    params.sample_period = cfg.sample_period;
    try {
        RecoveryResult res = recover(y, params, RecoveryOptions{true});
        ErrorStats stats = error_stats(sig.series, res.recovered);
        rec.mse = stats.mse;
        rec.nmse = stats.nmse;
        rec.max_err = stats.max_err;
        rec.fold_count = res.fold_indices.size();
        rec.status = classify(cfg, stats);
    } catch (const RecoveryContractError& e) {
        rec.status = TrialStatus::Failed;
        rec.note = e.what();
    }
    rec.runtime_ms = elapsed_ms(start);
    return rec;
}

}  // namespace

std::string to_string(TrialStatus s) {
    switch (s) {
        case TrialStatus::Exact: return "exact";
        case TrialStatus::Degraded: return "degraded";
        case TrialStatus::Failed: return "failed";
        case TrialStatus::InfeasibleConfig: return "infeasible-config";
    }
    return "failed";
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::filesystem::path default_out_dir() {
    if (const char* env = std::getenv(kOutputDirEnvVar); env && *env) return env;
    return ".";
}

void ExperimentConfig::validate() const {
    if (kind != "noiseless-suite" && kind != "noise-sweep" && kind != "quantized-hw")
        throw std::invalid_argument("unknown experiment kind \"" + kind + "\"");
    if (trials == 0) throw std::invalid_argument("at least one trial is required");
    if (band_count == 0) throw std::invalid_argument("band count must be at least 1");
    if (!(band_width_hz > 0.0)) throw std::invalid_argument("band width must be positive");
    if (!(sample_period > 0.0)) throw std::invalid_argument("sample period must be positive");
    if (grid_length < taper_quiet + taper_ramp + 256)
        throw std::invalid_argument("grid too short for the taper plus a useful body");
    if (!(scale_peak > 0.0)) throw std::invalid_argument("scale peak must be positive");
    if (!lambda_fixed && !(lambda_ratio > 0.0))
        throw std::invalid_argument("lambda ratio must be positive");
    if (lambda_fixed && !(*lambda_fixed > 0.0))
        throw std::invalid_argument("fixed lambda must be positive");
    if (!carriers_hz.empty() && carriers_hz.size() != band_count)
        throw std::invalid_argument("carrier list must match the band count");
    if (carriers_hz.empty() && conjugate_pairs)
        throw std::invalid_argument("conjugate pairing needs an explicit carrier list");
    if (conjugate_pairs) {
        for (double f : carriers_hz) {
            bool mirrored = std::any_of(carriers_hz.begin(), carriers_hz.end(),
                                        [&](double g) { return g == -f; });
            if (!mirrored)
                throw std::invalid_argument("conjugate pairing needs a sign-symmetric carrier list");
        }
    }
    if (carriers_hz.empty() && !(carrier_span_factor / sample_period > 2.0 * band_width_hz))
        throw std::invalid_argument("carrier draw span is empty");
    if (kind == "noise-sweep" && snr_levels_db.empty())
        throw std::invalid_argument("a noise sweep needs SNR levels");
    if (bit_depth && (*bit_depth < 1 || *bit_depth > 32))
        throw std::invalid_argument("bit depth must be in [1, 32]");
    if (max_order < 1) throw std::invalid_argument("max order must be at least 1");
    if (!(order_margin > 0.0)) throw std::invalid_argument("order margin must be positive");
    if (jobs == 0) throw std::invalid_argument("jobs must be at least 1");
    if (!(exact_nmse > 0.0) || !(degraded_mse_ratio > 0.0))
        throw std::invalid_argument("status thresholds must be positive");
}

ExperimentConfig make_noiseless_suite_config(std::uint64_t master_seed) {
    ExperimentConfig cfg;
    cfg.kind = "noiseless-suite";
    cfg.master_seed = master_seed;
    cfg.out_dir = default_out_dir() / cfg.kind;
    return cfg;
}

ExperimentConfig make_noise_sweep_config(std::uint64_t master_seed) {
    ExperimentConfig cfg;
    cfg.kind = "noise-sweep";
    cfg.master_seed = master_seed;
    cfg.band_width_hz = 100.0;
    cfg.sample_period = 5e-5;
    cfg.grid_length = 2048;
    cfg.taper_quiet = 160;
    cfg.taper_ramp = 512;
    cfg.lambda_ratio = 6.6;
    cfg.carriers_hz = {-23500.0, -15500.0, -9700.0, 9700.0, 15500.0, 23500.0};
    cfg.conjugate_pairs = true;
    cfg.snr_levels_db = {50.0, 45.0, 40.0, 35.0, 30.0, 25.0, 20.0, 15.0, 10.0, 5.0};
    cfg.noise_placement = NoisePlacement::PostFold;
    cfg.order_margin = 0.4;
    cfg.out_dir = default_out_dir() / cfg.kind;
    return cfg;
}

ExperimentConfig make_quantized_hw_config(std::uint64_t master_seed) {
    ExperimentConfig cfg;
    cfg.kind = "quantized-hw";
    cfg.master_seed = master_seed;
    cfg.trials = 1;
    cfg.band_count = 3;
    cfg.band_width_hz = 22.04;
    cfg.sample_period = 1.3e-3;
    cfg.grid_length = 2048;
    cfg.taper_quiet = 160;
    cfg.taper_ramp = 512;
    cfg.scale_peak = 5.91;
    cfg.lambda_fixed = 0.43;
    cfg.carriers_hz = {25.64, 79.77, 182.34};
    cfg.bit_depth = 7;
    cfg.out_dir = default_out_dir() / cfg.kind;
    return cfg;
}

SuiteOutcome run_noiseless_suite(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.kind != "noiseless-suite")
        throw std::invalid_argument("config kind is not noiseless-suite");

    SuiteOutcome out;
    out.records.resize(cfg.trials);
    parallel_for(cfg.trials, cfg.jobs,
                 [&](std::size_t i) { out.records[i] = run_suite_trial(cfg, i); });

    for (const TrialRecord& rec : out.records) {
        if (rec.status == TrialStatus::InfeasibleConfig) continue;
        ++out.feasible;
        if (rec.status == TrialStatus::Exact) ++out.exact;
    }
    out.pass = (2 * out.feasible >= cfg.trials) && (out.exact == out.feasible);
    return out;
}

SweepOutcome run_noise_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.kind != "noise-sweep") throw std::invalid_argument("config kind is not noise-sweep");

    double omega_b = std::numbers::pi * cfg.band_width_hz;
    double lambda = effective_lambda(cfg);
    std::vector<double> carriers_rad(cfg.band_count);
    for (std::size_t p = 0; p < cfg.band_count; ++p)
        carriers_rad[p] = 2.0 * std::numbers::pi * cfg.carriers_hz[p];
    if (!alias_free_check(carriers_rad, omega_b, cfg.sample_period).alias_free)
        throw std::invalid_argument("sweep carrier set aliases at the configured rate");

    SweepOutcome out;
    out.records.resize(cfg.snr_levels_db.size() * cfg.trials);

    parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
        std::uint64_t trial_seed = derive_seed(cfg.master_seed, t);
        MultibandSignal sig = synth_trial_signal(cfg, cfg.carriers_hz, trial_seed);
        MeasuredOrder measured = choose_order_measured(sig.series, carriers_rad, lambda,
                                                       cfg.max_order, cfg.order_margin);
        double beta = choose_beta(sig.phi_peak, lambda);
        std::uint64_t noise_seed = derive_seed(trial_seed, 777);

        for (std::size_t li = 0; li < cfg.snr_levels_db.size(); ++li) {
            auto start = std::chrono::steady_clock::now();
            TrialRecord rec;
            rec.trial = t;
            rec.seed = trial_seed;
            rec.snr_db = cfg.snr_levels_db[li];
            rec.order = measured.order;
            rec.measured_peak = measured.measured_peak;
            rec.lambda = lambda;
            rec.beta = beta;
            rec.peak = cfg.scale_peak;
            rec.carriers_hz = cfg.carriers_hz;
            if (!measured.satisfied) rec.note = "order-cap-reached";

            ModuloConfig fold_cfg;
            fold_cfg.threshold = lambda;
            fold_cfg.noise_snr_db = cfg.snr_levels_db[li];
            fold_cfg.noise_seed = noise_seed;
            fold_cfg.noise_placement = cfg.noise_placement;
            FoldedSeries y = fold_series(sig.series, fold_cfg);

            RecoveryParams params;
            params.lambda = lambda;
            params.carriers = carriers_rad;
            params.order = measured.order;
            params.beta = beta;
            params.sample_period = cfg.sample_period;
            RecoveryResult res = recover(y, params, RecoveryOptions{false});
            ErrorStats stats = error_stats(sig.series, res.recovered);
            rec.mse = stats.mse;
            rec.nmse = stats.nmse;
            rec.max_err = stats.max_err;
            rec.fold_count = res.fold_indices.size();
            rec.status = classify(cfg, stats);
            rec.runtime_ms = elapsed_ms(start);
            out.records[li * cfg.trials + t] = std::move(rec);
        }
    });

    for (std::size_t li = 0; li < cfg.snr_levels_db.size(); ++li) {
        double mse_acc = 0.0, nmse_acc = 0.0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            const TrialRecord& rec = out.records[li * cfg.trials + t];
            mse_acc += rec.mse;
            nmse_acc += rec.nmse;
        }
        out.mean_mse_by_snr[cfg.snr_levels_db[li]] = mse_acc / static_cast<double>(cfg.trials);
        out.mean_nmse_by_snr[cfg.snr_levels_db[li]] = nmse_acc / static_cast<double>(cfg.trials);
    }

    // Levels are listed highest SNR first; the mean MSE should grow as the
    // SNR drops. Count adjacent pairs that run the other way.
    for (std::size_t li = 0; li + 1 < cfg.snr_levels_db.size(); ++li) {
        double hi = out.mean_mse_by_snr[cfg.snr_levels_db[li]];
        double lo = out.mean_mse_by_snr[cfg.snr_levels_db[li + 1]];
        if (lo < hi) ++out.monotonicity_inversions;
    }

    bool clean_levels = true;
    double gate = cfg.degraded_mse_ratio * cfg.scale_peak * cfg.scale_peak;
    for (double level : cfg.snr_levels_db)
        if (level >= 20.0 && !(out.mean_mse_by_snr[level] < gate)) clean_levels = false;
    out.pass = clean_levels && out.monotonicity_inversions <= 1;
    return out;
}

HwOutcome run_quantized_hw(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.kind != "quantized-hw") throw std::invalid_argument("config kind is not quantized-hw");

    auto start = std::chrono::steady_clock::now();
    double lambda = effective_lambda(cfg);
    std::uint64_t trial_seed = derive_seed(cfg.master_seed, 0);
    std::vector<double> carriers_rad(cfg.band_count);
    for (std::size_t p = 0; p < cfg.band_count; ++p)
        carriers_rad[p] = 2.0 * std::numbers::pi * cfg.carriers_hz[p];

    MultibandSignal sig = synth_trial_signal(cfg, cfg.carriers_hz, trial_seed);
    MeasuredOrder measured = choose_order_measured(sig.series, carriers_rad, lambda,
                                                   cfg.max_order, cfg.order_margin);

    ModuloConfig fold_cfg;
    fold_cfg.threshold = lambda;
    fold_cfg.bit_depth = cfg.bit_depth;
    FoldedSeries y = fold_series(sig.series, fold_cfg);

    RecoveryParams params;
    params.lambda = lambda;
    params.carriers = carriers_rad;
    params.order = measured.order;
    params.beta = choose_beta(sig.phi_peak, lambda);
    params.sample_period = cfg.sample_period;
    RecoveryResult res = recover(y, params, RecoveryOptions{false});
    ErrorStats stats = error_stats(sig.series, res.recovered);

    RecoveryResult base = difference_recover(y, lambda, measured.order);
    ErrorStats base_stats = error_stats(sig.series, base.recovered);

    HwOutcome out;
    out.proposed.trial = 0;
    out.proposed.seed = trial_seed;
    out.proposed.order = measured.order;
    out.proposed.measured_peak = measured.measured_peak;
    out.proposed.mse = stats.mse;
    out.proposed.nmse = stats.nmse;
    out.proposed.max_err = stats.max_err;
    out.proposed.fold_count = res.fold_indices.size();
    out.proposed.lambda = lambda;
    out.proposed.beta = params.beta;
    out.proposed.peak = cfg.scale_peak;
    out.proposed.carriers_hz = cfg.carriers_hz;
    out.proposed.status = classify(cfg, stats);
    out.proposed.runtime_ms = elapsed_ms(start);
    out.baseline_mse = base_stats.mse;
    out.dynamic_range_ratio = cfg.scale_peak / lambda;
    out.pass = stats.mse <= kHwMseGate && base_stats.mse > 10.0 * stats.mse;
    return out;
}

std::string suite_aggregates_json(const SuiteOutcome& outcome) {
    double max_nmse = 0.0;
    std::size_t total_folds = 0;
    for (const TrialRecord& rec : outcome.records) {
        if (rec.status == TrialStatus::InfeasibleConfig) continue;
        max_nmse = std::max(max_nmse, rec.nmse);
        total_folds += rec.fold_count;
    }
    ordered_json j;
    j["trials"] = outcome.records.size();
    j["feasible"] = outcome.feasible;
    j["exact"] = outcome.exact;
    j["infeasible"] = outcome.records.size() - outcome.feasible;
    j["max_nmse_feasible"] = max_nmse;
    j["total_folds"] = total_folds;
    return j.dump();
}

std::string sweep_aggregates_json(const SweepOutcome& outcome) {
    ordered_json levels = ordered_json::array();
    std::size_t level_count = outcome.mean_mse_by_snr.size();
    std::size_t trials = level_count == 0 ? 0 : outcome.records.size() / level_count;
    // Preserve run order (highest SNR first) rather than map order.
    std::vector<double> order;
    for (std::size_t i = 0; i < outcome.records.size(); i += std::max<std::size_t>(trials, 1)) {
        if (!outcome.records[i].snr_db) continue;
        double s = *outcome.records[i].snr_db;
        if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
    }
    for (double s : order) {
        ordered_json lj;
        lj["snr_db"] = s;
        lj["mean_mse"] = outcome.mean_mse_by_snr.at(s);
        lj["mean_nmse"] = outcome.mean_nmse_by_snr.at(s);
        lj["trials"] = trials;
        levels.push_back(std::move(lj));
    }
    ordered_json j;
    j["levels"] = std::move(levels);
    j["monotonicity_inversions"] = outcome.monotonicity_inversions;
    return j.dump();
}

std::string hw_aggregates_json(const HwOutcome& outcome) {
    ordered_json j;
    j["order"] = outcome.proposed.order;
    j["mse"] = outcome.proposed.mse;
    j["nmse"] = outcome.proposed.nmse;
    j["baseline_mse"] = outcome.baseline_mse;
    j["improvement_factor"] =
        outcome.proposed.mse > 0.0 ? outcome.baseline_mse / outcome.proposed.mse : 0.0;
    j["dynamic_range_ratio"] = outcome.dynamic_range_ratio;
    j["fold_count"] = outcome.proposed.fold_count;
    return j.dump();
}

void emit_report(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records,
                 const std::string& aggregates_json, bool pass) {
    std::filesystem::create_directories(cfg.out_dir);

    std::filesystem::path csv_path = cfg.out_dir / "results.csv";
    std::ofstream csv(csv_path, std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot open " + csv_path.string() + " for writing");
    csv << "trial,seed,status,snr_db,order,measured_peak,mse,nmse,max_err,fold_count,redraws,"
           "lambda,beta,peak,carriers_hz,note\n";
    for (const TrialRecord& rec : records) {
        csv << rec.trial << ',' << rec.seed << ',' << to_string(rec.status) << ','
            << (rec.snr_db ? format_double(*rec.snr_db) : std::string{}) << ',' << rec.order << ','
            << format_double(rec.measured_peak) << ',' << format_double(rec.mse) << ','
            << format_double(rec.nmse) << ',' << format_double(rec.max_err) << ','
            << rec.fold_count << ',' << rec.redraws << ',' << format_double(rec.lambda) << ','
            << format_double(rec.beta) << ',' << format_double(rec.peak) << ',';
        for (std::size_t i = 0; i < rec.carriers_hz.size(); ++i) {
            if (i > 0) csv << '|';
            csv << format_double(rec.carriers_hz[i]);
        }
        csv << ',' << sanitize_note(rec.note) << '\n';
    }
    if (!csv.good()) throw std::runtime_error("write failed on " + csv_path.string());

    ordered_json config;
    config["master_seed"] = cfg.master_seed;
    config["trials"] = cfg.trials;
    config["band_count"] = cfg.band_count;
    config["band_width_hz"] = cfg.band_width_hz;
    config["sample_period"] = cfg.sample_period;
    config["grid_length"] = cfg.grid_length;
    config["components_per_band"] = cfg.components_per_band;
    config["taper_quiet"] = cfg.taper_quiet;
    config["taper_ramp"] = cfg.taper_ramp;
    config["scale_peak"] = cfg.scale_peak;
    config["lambda_ratio"] = cfg.lambda_ratio;
    config["lambda_fixed"] = cfg.lambda_fixed ? ordered_json(*cfg.lambda_fixed) : ordered_json(nullptr);
    config["carriers_hz"] = cfg.carriers_hz;
    config["conjugate_pairs"] = cfg.conjugate_pairs;
    config["carrier_span_factor"] = cfg.carrier_span_factor;
    config["snr_levels_db"] = cfg.snr_levels_db;
    config["noise_placement"] = placement_name(cfg.noise_placement);
    config["bit_depth"] = cfg.bit_depth ? ordered_json(*cfg.bit_depth) : ordered_json(nullptr);
    config["max_order"] = cfg.max_order;
    config["order_margin"] = cfg.order_margin;
    config["max_redraws"] = cfg.max_redraws;
    config["exact_nmse"] = cfg.exact_nmse;
    config["degraded_mse_ratio"] = cfg.degraded_mse_ratio;

    ordered_json summary;
    summary["tool"] = kToolName;
    summary["version"] = kToolVersion;
    summary["experiment"] = cfg.kind;
    summary["config"] = std::move(config);
    summary["aggregates"] = ordered_json::parse(aggregates_json);
    summary["pass"] = pass;

    std::filesystem::path json_path = cfg.out_dir / "summary.json";
    std::ofstream meta(json_path, std::ios::trunc);
    if (!meta) throw std::runtime_error("cannot open " + json_path.string() + " for writing");
    meta << summary.dump(2) << "\n";
    if (!meta.good()) throw std::runtime_error("write failed on " + json_path.string());
}

}  // namespace usmb
