// usmb command line: signal synthesis, modulo folding, carrier-aware
// recovery, sampling-rate planning, and the three seeded experiment
// reproductions. Every run is deterministic in its flags and seed.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "usmb/feasibility.hpp"
#include "usmb/harness.hpp"
#include "usmb/modulo.hpp"
#include "usmb/recovery.hpp"
#include "usmb/series_io.hpp"
#include "usmb/signal_model.hpp"
#include "usmb/spectral_filter.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace usmb;

namespace {

std::vector<double> to_angular(const std::vector<double>& hz) {
    std::vector<double> w;
    w.reserve(hz.size());
    for (double f : hz) w.push_back(2.0 * std::numbers::pi * f);
    return w;
}

const char* limit_name(WindowLimit l) {
    return l == WindowLimit::UsfUpper ? "fold-rate-cap" : "bandpass-zone";
}

const std::map<std::string, NoisePlacement> kPlacementNames{
    {"pre", NoisePlacement::PreFold},
    {"post", NoisePlacement::PostFold},
    {"post-refold", NoisePlacement::PostFoldRefolded},
};

struct SynthOpts {
    std::uint64_t seed = 20240817;
    std::vector<double> carriers_hz;
    double band_width_hz = 400.0;
    std::size_t components = 8;
    std::size_t taper_quiet = 0;
    std::size_t taper_ramp = 0;
    std::size_t grid_length = 2048;
    double sample_period = 0.0;
    double start_time = 0.0;
    double energy_scale = 1.0;
    std::optional<double> scale_peak;
    fs::path out;
    fs::path meta;
};

int run_synth(const SynthOpts& o) {
    TimeGrid grid{o.start_time, o.sample_period, o.grid_length};
    grid.validate();

    MultibandSpec spec;
    spec.band_count = o.carriers_hz.size();
    spec.baseband_halfwidth = std::numbers::pi * o.band_width_hz;
    spec.carriers = to_angular(o.carriers_hz);
    for (std::size_t p = 0; p < spec.band_count; ++p)
        spec.band_seeds.push_back({derive_seed(o.seed, p), o.energy_scale});
    spec.components_per_band = o.components;
    spec.taper = {o.taper_quiet, o.taper_ramp};
    spec.validate();

    MultibandSignal sig = synth_multiband(spec, grid);
    if (o.scale_peak) scale_to_peak(sig, *o.scale_peak);
    write_series(sig.series, o.out);

    if (!o.meta.empty()) {
        ordered_json j;
        j["format"] = "usmb-synth-meta";
        j["tool_version"] = kToolVersion;
        j["seed"] = o.seed;
        j["carriers_hz"] = o.carriers_hz;
        j["band_width_hz"] = o.band_width_hz;
        j["components_per_band"] = o.components;
        j["taper"] = {{"quiet", o.taper_quiet}, {"ramp", o.taper_ramp}};
        j["grid"] = {{"start_time", o.start_time},
                     {"sample_period", o.sample_period},
                     {"length", o.grid_length}};
        j["peak_amplitude"] = peak_amplitude(sig.series);
        j["phi_peak"] = sig.phi_peak;
        j["band_peaks"] = sig.band_peaks;
        std::ofstream f(o.meta);
        if (!f) throw std::runtime_error("cannot write " + o.meta.string());
        f << j.dump(2) << '\n';
    }

    std::printf("wrote %zu samples to %s.{csv,json}  peak %.6g  envelope peak %.6g\n",
                sig.series.size(), o.out.string().c_str(), peak_amplitude(sig.series),
                sig.phi_peak);
    return 0;
}

struct FoldOpts {
    fs::path in;
    fs::path out;
    double lambda = 0.0;
    std::optional<int> bits;
    std::optional<double> snr_db;
    std::uint64_t noise_seed = 0;
    NoisePlacement placement = NoisePlacement::PreFold;
};

int run_fold(const FoldOpts& o) {
    SeriesFile input = read_series(o.in);
    if (input.fold)
        throw std::runtime_error(o.in.string() + " already declares a fold; refusing to refold");

    ModuloConfig cfg;
    cfg.threshold = o.lambda;
    cfg.bit_depth = o.bits;
    cfg.noise_snr_db = o.snr_db;
    cfg.noise_seed = o.noise_seed;
    cfg.noise_placement = o.placement;
    cfg.validate();

    FoldedSeries folded = fold_series(input.series, cfg);
    write_series(folded, o.out);

    std::printf("wrote %zu folded samples to %s.{csv,json}  lambda %.6g\n", folded.size(),
                o.out.string().c_str(), o.lambda);
    // the residual oracle only applies to clean folds; noise and quantization
    // move samples off the 2*lambda lattice
    if (!o.snr_db && !o.bits) {
        ResidualSeries res = residual_oracle(input.series, folded);
        std::size_t folds = 0;
        for (auto& [re, im] : res.counts)
            if (re != 0 || im != 0) ++folds;
        std::printf("%zu of %zu samples folded\n", folds, res.size());
    }
    return 0;
}

struct RecoverOpts {
    fs::path in;
    fs::path out;
    fs::path report;
    fs::path truth;
    std::vector<double> carriers_hz;
    int order = 0;
    std::optional<double> lambda;
    double beta = 0.0;
    std::optional<std::size_t> warmup;
    std::size_t tap_cap = kDefaultTapCap;
    bool no_enforce = false;
    std::optional<double> max_nmse;
};

int run_recover(const RecoverOpts& o) {
    SeriesFile input = read_series(o.in);
    FoldedSeries folded;
    folded.series = input.series;
    if (input.fold) {
        folded.config = *input.fold;
    } else if (o.lambda) {
        folded.config.threshold = *o.lambda;
    } else {
        throw std::runtime_error(o.in.string() +
                                 " does not declare a fold threshold; pass --lambda");
    }

    RecoveryParams params;
    params.lambda = o.lambda.value_or(folded.config.threshold);
    params.carriers = to_angular(o.carriers_hz);
    params.order = o.order;
    params.beta = o.beta;
    params.sample_period = input.series.sample_period;
    params.warmup = o.warmup;
    params.tap_cap = o.tap_cap;

    RecoveryOptions opts;
    opts.enforce_contract = !o.no_enforce;

    RecoveryResult result;
    try {
        result = recover(folded, params, opts);
    } catch (const RecoveryContractError& e) {
        std::fprintf(stderr, "usmb: recovery contract violated: %s\n", e.what());
        return 1;
    }

    write_series(result.recovered, o.out);
    fs::path report = o.report;
    if (report.empty()) {
        report = o.out;
        report += "_report.json";
    }
    write_recovery_report(result, params, report);

    std::printf("wrote %zu recovered samples to %s.{csv,json}  %zu corrections, report %s\n",
                result.recovered.size(), o.out.string().c_str(),
                result.diagnostics.corrections, report.string().c_str());

    if (!o.truth.empty()) {
        SeriesFile truth = read_series(o.truth);
        ErrorStats es = error_stats(truth.series, result.recovered);
        std::printf("vs truth: mse %.6g  nmse %.6g  max err %.6g\n", es.mse, es.nmse,
                    es.max_err);
        if (o.max_nmse && !(es.nmse <= *o.max_nmse)) {
            std::fprintf(stderr, "usmb: nmse %.6g exceeds --max-nmse %.6g\n", es.nmse,
                         *o.max_nmse);
            return 1;
        }
    }
    return 0;
}

struct PlanOpts {
    std::vector<double> carriers_hz;
    double band_width_hz = 0.0;
    double sample_period = 0.0;
    std::optional<double> lambda;
    std::optional<double> peak;
    fs::path out;
};

int run_plan(const PlanOpts& o) {
    double omega_b = std::numbers::pi * o.band_width_hz;
    std::vector<double> carriers = to_angular(o.carriers_hz);
    FeasibilityReport rep = feasibility_report(carriers, omega_b, o.sample_period);

    ordered_json j;
    j["format"] = "usmb-plan";
    j["tool_version"] = kToolVersion;
    j["carriers_hz"] = o.carriers_hz;
    j["band_width_hz"] = o.band_width_hz;
    j["sample_period"] = o.sample_period;
    j["nyquist_span_period"] = rep.nyquist_span_period;
    ordered_json windows = ordered_json::array();
    for (const RateWindow& w : rep.windows)
        windows.push_back({{"t_min", w.t_min},
                           {"t_max", w.t_max},
                           {"zone", w.zone_index},
                           {"limited_by", limit_name(w.limited_by)}});
    j["windows"] = windows;
    j["alias_free"] = rep.alias.alias_free;
    ordered_json colliding = ordered_json::array();
    for (auto& [a, b] : rep.alias.colliding) colliding.push_back({a, b});
    j["colliding_band_pairs"] = colliding;
    j["rate"] = {{"admissible", rep.rate.admissible},
                 {"max_admissible_ts", rep.rate.max_admissible_ts},
                 {"conservative_max_ts", rep.rate.conservative_max_ts}};

    if (o.lambda && o.peak) {
        double beta = choose_beta(*o.peak, *o.lambda);
        ordered_json sugg{{"lambda", *o.lambda}, {"beta", beta}};
        try {
            sugg["order"] = choose_order(*o.lambda, beta, carriers.size(), omega_b,
                                         o.sample_period);
        } catch (const RateError& e) {
            sugg["rate_error"] = e.what();
            sugg["max_admissible_ts"] = e.max_admissible_ts;
        }
        j["order_suggestion"] = sugg;
    }

    std::string text = j.dump(2) + "\n";
    if (o.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream f(o.out);
        if (!f) throw std::runtime_error("cannot write " + o.out.string());
        f << text;
        std::printf("wrote plan to %s\n", o.out.string().c_str());
    }
    return 0;
}

struct MapOpts {
    double f_min_hz = 0.0;
    double f_max_hz = 0.0;
    std::size_t f_count = 0;
    double ts_min = 0.0;
    double ts_max = 0.0;
    std::size_t ts_count = 0;
    double band_width_hz = 0.0;
    fs::path out;
};

int run_map(const MapOpts& o) {
    double omega_b = std::numbers::pi * o.band_width_hz;
    std::vector<MapPoint> points = achievability_map(o.f_min_hz, o.f_max_hz, o.f_count,
                                                     o.ts_min, o.ts_max, o.ts_count, omega_b);
    std::string text = "f_upper_hz,t_s,achievable\n";
    for (const MapPoint& p : points) {
        text += format_double(p.f_upper_hz);
        text += ',';
        text += format_double(p.t_s);
        text += ',';
        text += p.achievable ? '1' : '0';
        text += '\n';
    }
    if (o.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream f(o.out);
        if (!f) throw std::runtime_error("cannot write " + o.out.string());
        f << text;
        std::printf("wrote %zu grid points to %s\n", points.size(), o.out.string().c_str());
    }
    return 0;
}

// flags mirror the ExperimentConfig keys; factory defaults fill everything a
// flag does not override
void add_experiment_flags(CLI::App* sub, ExperimentConfig& cfg, fs::path& out_dir) {
    sub->fallthrough();
    sub->add_option("--trials", cfg.trials, "trials (per SNR level for the sweep)");
    sub->add_option("--band-count", cfg.band_count, "bands per trial");
    sub->add_option("--band-width-hz", cfg.band_width_hz, "full band width in Hz");
    sub->add_option("--sample-period", cfg.sample_period, "T_S in seconds");
    sub->add_option("--grid-length", cfg.grid_length, "samples per trial");
    sub->add_option("--components-per-band", cfg.components_per_band, "sinc atoms per band");
    sub->add_option("--taper-quiet", cfg.taper_quiet, "leading zero samples");
    sub->add_option("--taper-ramp", cfg.taper_ramp, "raised-cosine ramp samples");
    sub->add_option("--scale-peak", cfg.scale_peak, "componentwise signal peak");
    sub->add_option("--lambda-ratio", cfg.lambda_ratio, "lambda = peak / ratio");
    sub->add_option("--lambda-fixed,--lambda", cfg.lambda_fixed,
                    "fixed fold threshold (overrides --lambda-ratio)");
    sub->add_option("--carriers-hz", cfg.carriers_hz,
                    "fixed carrier set in Hz (empty = drawn per trial)");
    sub->add_flag("--conjugate-pairs,!--no-conjugate-pairs", cfg.conjugate_pairs,
                  "mirror carriers share a baseband seed");
    sub->add_option("--carrier-span-factor", cfg.carrier_span_factor,
                    "draw span upper edge factor/T_S Hz");
    sub->add_option("--snr-levels-db", cfg.snr_levels_db, "sweep SNR levels in dB");
    sub->add_option("--noise-placement", cfg.noise_placement, "noise insertion point")
        ->transform(CLI::CheckedTransformer(kPlacementNames, CLI::ignore_case));
    sub->add_option("--bit-depth,--bits", cfg.bit_depth, "mid-rise quantizer bits");
    sub->add_option("--max-order", cfg.max_order, "order search ceiling");
    sub->add_option("--order-margin", cfg.order_margin,
                    "accept order when filtered peak <= margin * lambda");
    sub->add_option("--max-redraws", cfg.max_redraws, "carrier redraws before giving up");
    sub->add_option("--jobs", cfg.jobs, "worker threads (results are identical)");
    sub->add_option("--exact-nmse", cfg.exact_nmse, "nmse bound for an exact trial");
    sub->add_option("--degraded-mse-ratio", cfg.degraded_mse_ratio,
                    "mse/peak^2 bound for a degraded trial");
    sub->add_option("--out", out_dir, "output directory (default $" +
                                          std::string(kOutputDirEnvVar) + "/<kind>)");
}

void finish_experiment_config(ExperimentConfig& cfg, std::uint64_t seed,
                              const fs::path& out_dir) {
    cfg.master_seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();
}

int run_suite_cmd(ExperimentConfig cfg) {
    SuiteOutcome out = run_noiseless_suite(cfg);
    emit_report(cfg, out.records, suite_aggregates_json(out), out.pass);
    double worst_nmse = 0.0;
    for (const TrialRecord& r : out.records)
        if (r.status == TrialStatus::Exact && r.nmse > worst_nmse) worst_nmse = r.nmse;
    std::printf("%s: %zu trials, %zu feasible, %zu exact, worst nmse %.3g  ->  %s\n",
                cfg.kind.c_str(), out.records.size(), out.feasible, out.exact, worst_nmse,
                out.pass ? "pass" : "FAIL");
    std::printf("wrote %s and %s\n", (cfg.out_dir / "results.csv").string().c_str(),
                (cfg.out_dir / "summary.json").string().c_str());
    return out.pass ? 0 : 1;
}

int run_sweep_cmd(ExperimentConfig cfg) {
    SweepOutcome out = run_noise_sweep(cfg);
    emit_report(cfg, out.records, sweep_aggregates_json(out), out.pass);
    std::printf("%s: %zu records over %zu SNR levels, %zu inversion(s)  ->  %s\n",
                cfg.kind.c_str(), out.records.size(), out.mean_mse_by_snr.size(),
                out.monotonicity_inversions, out.pass ? "pass" : "FAIL");
    for (auto& [snr, mse] : out.mean_mse_by_snr)
        std::printf("  snr %5.1f dB  mean mse %.6g\n", snr, mse);
    std::printf("wrote %s and %s\n", (cfg.out_dir / "results.csv").string().c_str(),
                (cfg.out_dir / "summary.json").string().c_str());
    return out.pass ? 0 : 1;
}

int run_hw_cmd(ExperimentConfig cfg) {
    HwOutcome out = run_quantized_hw(cfg);
    std::vector<TrialRecord> records{out.proposed};
    emit_report(cfg, records, hw_aggregates_json(out), out.pass);
    std::printf("%s: mse %.6g, baseline mse %.6g (%.0fx), dynamic range %.4g lambda  ->  %s\n",
                cfg.kind.c_str(), out.proposed.mse, out.baseline_mse,
                out.proposed.mse > 0.0 ? out.baseline_mse / out.proposed.mse : 0.0,
                out.dynamic_range_ratio, out.pass ? "pass" : "FAIL");
    std::printf("wrote %s and %s\n", (cfg.out_dir / "results.csv").string().c_str(),
                (cfg.out_dir / "summary.json").string().c_str());
    return out.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modulo acquisition and carrier-aware recovery of multiband signals"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.set_config("--config", "",
                   "read options from an INI/TOML file; section [suite]/[sweep]/[hw] "
                   "addresses that subcommand");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    SynthOpts so;
    CLI::App* synth = app.add_subcommand("synth", "synthesize a multiband test signal");
    synth->add_option("--seed", so.seed, "master seed (band seeds derive from it)");
    synth->add_option("--carriers-hz", so.carriers_hz, "carrier frequencies in Hz")
        ->required();
    synth->add_option("--band-width-hz", so.band_width_hz, "full band width in Hz");
    synth->add_option("--components-per-band", so.components, "sinc atoms per band");
    synth->add_option("--taper-quiet", so.taper_quiet, "leading zero samples");
    synth->add_option("--taper-ramp", so.taper_ramp, "raised-cosine ramp samples");
    synth->add_option("--grid-length", so.grid_length, "sample count");
    synth->add_option("--sample-period", so.sample_period, "T_S in seconds")->required();
    synth->add_option("--start-time", so.start_time, "grid start time in seconds");
    synth->add_option("--energy-scale", so.energy_scale, "per-band atom energy scale");
    synth->add_option("--scale-peak", so.scale_peak, "rescale to this componentwise peak");
    synth->add_option("--out", so.out, "output series base path (writes .csv and .json)")
        ->required();
    synth->add_option("--meta", so.meta, "also write synthesis metadata JSON here");

    FoldOpts fo;
    CLI::App* fold = app.add_subcommand("fold", "fold a series through the modulo front end");
    fold->add_option("--in", fo.in, "input series base path")->required();
    fold->add_option("--out", fo.out, "output series base path")->required();
    fold->add_option("--lambda", fo.lambda, "fold threshold")->required();
    fold->add_option("--bit-depth,--bits", fo.bits, "mid-rise quantizer bits");
    fold->add_option("--snr-db", fo.snr_db, "add seeded noise at this SNR");
    fold->add_option("--noise-seed", fo.noise_seed, "noise draw seed");
    fold->add_option("--noise-placement", fo.placement, "noise insertion point")
        ->transform(CLI::CheckedTransformer(kPlacementNames, CLI::ignore_case));

    RecoverOpts ro;
    CLI::App* recover_cmd =
        app.add_subcommand("recover", "unfold a folded capture with the carrier-aware filter");
    recover_cmd->add_option("--in", ro.in, "folded series base path")->required();
    recover_cmd->add_option("--out", ro.out, "recovered series base path")->required();
    recover_cmd->add_option("--carriers-hz", ro.carriers_hz, "carrier frequencies in Hz")
        ->required();
    recover_cmd->add_option("--order", ro.order, "filter order N")->required();
    recover_cmd->add_option("--lambda", ro.lambda,
                            "fold threshold (default: from the input header)");
    recover_cmd->add_option("--beta", ro.beta,
                            "per-band envelope bound (0 disables the runaway ceiling)");
    recover_cmd->add_option("--warmup", ro.warmup, "fold-free prefix length");
    recover_cmd->add_option("--tap-cap", ro.tap_cap, "maximum filter tap count");
    recover_cmd->add_flag("--no-enforce", ro.no_enforce,
                          "skip the warm-up and runaway contract checks");
    recover_cmd->add_option("--report", ro.report,
                            "recovery report path (default <out>_report.json)");
    recover_cmd->add_option("--truth", ro.truth, "ground-truth series base for error stats");
    recover_cmd->add_option("--max-nmse", ro.max_nmse,
                            "with --truth, fail when nmse exceeds this");

    PlanOpts po;
    CLI::App* plan = app.add_subcommand("plan", "feasibility report for a carrier set");
    plan->add_option("--carriers-hz", po.carriers_hz, "carrier frequencies in Hz")->required();
    plan->add_option("--band-width-hz", po.band_width_hz, "full band width in Hz")->required();
    plan->add_option("--sample-period", po.sample_period, "T_S in seconds")->required();
    plan->add_option("--lambda", po.lambda, "fold threshold for an order suggestion");
    plan->add_option("--peak", po.peak, "per-band envelope peak for an order suggestion");
    plan->add_option("--out", po.out, "write the JSON here instead of stdout");

    MapOpts mo;
    CLI::App* map_cmd =
        app.add_subcommand("map", "achievability grid over band edge and sampling period");
    map_cmd->add_option("--f-min-hz", mo.f_min_hz, "lowest upper band edge in Hz")->required();
    map_cmd->add_option("--f-max-hz", mo.f_max_hz, "highest upper band edge in Hz")->required();
    map_cmd->add_option("--f-count", mo.f_count, "band edge grid points")->required();
    map_cmd->add_option("--ts-min", mo.ts_min, "smallest sampling period")->required();
    map_cmd->add_option("--ts-max", mo.ts_max, "largest sampling period")->required();
    map_cmd->add_option("--ts-count", mo.ts_count, "sampling period grid points")->required();
    map_cmd->add_option("--band-width-hz", mo.band_width_hz, "full band width in Hz")
        ->required();
    map_cmd->add_option("--out", mo.out, "write the CSV here instead of stdout");

    ExperimentConfig suite_cfg = make_noiseless_suite_config(0);
    std::uint64_t suite_seed = 0;
    fs::path suite_out;
    CLI::App* suite = app.add_subcommand("suite", "noiseless recovery suite over drawn carriers");
    suite->add_option("--seed", suite_seed, "master seed")->required();
    add_experiment_flags(suite, suite_cfg, suite_out);

    ExperimentConfig sweep_cfg = make_noise_sweep_config(0);
    std::uint64_t sweep_seed = 0;
    fs::path sweep_out;
    CLI::App* sweep = app.add_subcommand("sweep", "recovery error versus SNR");
    sweep->add_option("--seed", sweep_seed, "master seed")->required();
    add_experiment_flags(sweep, sweep_cfg, sweep_out);

    ExperimentConfig hw_cfg = make_quantized_hw_config(0);
    std::uint64_t hw_seed = 20240817;
    fs::path hw_out;
    CLI::App* hw = app.add_subcommand("hw", "quantized high-dynamic-range capture");
    hw->add_option("--seed", hw_seed, "master seed");
    add_experiment_flags(hw, hw_cfg, hw_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(so);
        if (fold->parsed()) return run_fold(fo);
        if (recover_cmd->parsed()) return run_recover(ro);
        if (plan->parsed()) return run_plan(po);
        if (map_cmd->parsed()) return run_map(mo);
        if (suite->parsed()) {
            finish_experiment_config(suite_cfg, suite_seed, suite_out);
            return run_suite_cmd(suite_cfg);
        }
        if (sweep->parsed()) {
            finish_experiment_config(sweep_cfg, sweep_seed, sweep_out);
            return run_sweep_cmd(sweep_cfg);
        }
        if (hw->parsed()) {
            finish_experiment_config(hw_cfg, hw_seed, hw_out);
            return run_hw_cmd(hw_cfg);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "usmb: %s\n", e.what());
        return 2;
    }
    return 0;
}
