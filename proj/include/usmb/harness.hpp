// Experiment harness: seeded end-to-end runs (noiseless suite, noise sweep,
// quantized hardware-grade run), trial records, and deterministic report
// emission (results.csv + summary.json).
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "usmb/feasibility.hpp"
#include "usmb/modulo.hpp"
#include "usmb/recovery.hpp"
#include "usmb/signal_model.hpp"

namespace usmb {

inline constexpr const char* kToolName = "usmb";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputDirEnvVar = "USMB_OUT_DIR";

enum class TrialStatus { Exact, Degraded, Failed, InfeasibleConfig };
std::string to_string(TrialStatus s);

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    TrialStatus status = TrialStatus::Failed;
    std::optional<double> snr_db;      ///< sweep only
    int order = 0;
    double measured_peak = 0.0;        ///< filtered reference peak used to pick the order
    double mse = 0.0;
    double nmse = 0.0;
    double max_err = 0.0;
    std::size_t fold_count = 0;
    std::size_t redraws = 0;
    double lambda = 0.0;
    double beta = 0.0;
    double peak = 0.0;
    std::vector<double> carriers_hz;
    std::string note;                  ///< infeasibility reason etc.
    double runtime_ms = 0.0;           ///< console only, never serialized
};

/// Common experiment knobs; the make_* factories fill in the published
/// configurations at desk scale.
struct ExperimentConfig {
    std::string kind;                        ///< "noiseless-suite" | "noise-sweep" | "quantized-hw"
    std::uint64_t master_seed = 0;
    std::size_t trials = 50;
    std::size_t band_count = 6;
    double band_width_hz = 400.0;            ///< full width; halfwidth is pi * this
    double sample_period = 2.5e-5;
    std::size_t grid_length = 4096;
    std::size_t components_per_band = 8;
    std::size_t taper_quiet = 160;
    std::size_t taper_ramp = 768;
    double scale_peak = 1.0;                 ///< signal scaled to this componentwise peak
    double lambda_ratio = 100.0;             ///< lambda = scale_peak / lambda_ratio
    std::optional<double> lambda_fixed;      ///< overrides lambda_ratio when set
    std::vector<double> carriers_hz;         ///< fixed carrier set; empty = drawn per trial
    bool conjugate_pairs = false;            ///< mirror carriers share a baseband seed
    double carrier_span_factor = 12.5;       ///< draw span [f_B, factor/T_S - f_B] Hz
    std::vector<double> snr_levels_db;       ///< sweep only
    NoisePlacement noise_placement = NoisePlacement::PostFold;
    std::optional<int> bit_depth;            ///< hardware run only
    int max_order = 10;
    double order_margin = 0.85;              ///< measured rule: peak <= margin * lambda
    std::size_t max_redraws = 200;
    std::size_t jobs = 1;
    double exact_nmse = 1e-18;
    double degraded_mse_ratio = 1e-3;        ///< vs peak^2; sweep status + pass gate
    std::filesystem::path out_dir;

    void validate() const;
};

ExperimentConfig make_noiseless_suite_config(std::uint64_t master_seed);
ExperimentConfig make_noise_sweep_config(std::uint64_t master_seed);
ExperimentConfig make_quantized_hw_config(std::uint64_t master_seed);

struct SuiteOutcome {
    std::vector<TrialRecord> records;
    std::size_t feasible = 0;
    std::size_t exact = 0;
    bool pass = false;
};

struct SweepOutcome {
    std::vector<TrialRecord> records;               ///< level-major, trial-minor
    std::map<double, double> mean_mse_by_snr;
    std::map<double, double> mean_nmse_by_snr;
    std::size_t monotonicity_inversions = 0;        ///< adjacent SNR pairs out of order
    bool pass = false;
};

struct HwOutcome {
    TrialRecord proposed;
    double baseline_mse = 0.0;     ///< difference-only recovery on the same capture
    double dynamic_range_ratio = 0.0;
    bool pass = false;
};

SuiteOutcome run_noiseless_suite(const ExperimentConfig& cfg);
SweepOutcome run_noise_sweep(const ExperimentConfig& cfg);
HwOutcome run_quantized_hw(const ExperimentConfig& cfg);

/// Aggregate blocks for summary.json, serialized deterministically.
std::string suite_aggregates_json(const SuiteOutcome& outcome);
std::string sweep_aggregates_json(const SweepOutcome& outcome);
std::string hw_aggregates_json(const HwOutcome& outcome);

/// Deterministic result files: <out_dir>/results.csv (one row per trial) and
/// <out_dir>/summary.json (config echo + aggregates + pass flag). Reruns with
/// the same config and master seed are byte-identical.
void emit_report(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records,
                 const std::string& aggregates_json, bool pass);

/// Stateless per-trial seed stream: splitmix64 over (master, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Default output directory: $USMB_OUT_DIR or ".".
std::filesystem::path default_out_dir();

}  // namespace usmb
