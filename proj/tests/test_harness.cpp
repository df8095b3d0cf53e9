#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <usmb/harness.hpp>

#include "testutil.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

using namespace usmb;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int c = 0;
        path = fs::temp_directory_path() /
               ("usmb_harness_test_" + std::to_string(::getpid()) + "_" + std::to_string(c++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("derive_seed matches the reference splitmix64 stream") {
    CHECK(derive_seed(0, 0) == 0xE220A8397B1DCDAFull);
    CHECK(derive_seed(0, 1) == 0x6E789E6AA1B965F4ull);
    CHECK(derive_seed(0, 2) == 0x06C45D188009454Full);
    CHECK(derive_seed(20240817, 1) == 0x9932FAFCD64A8A53ull);
    CHECK(derive_seed(20240817, 777) == 0xC1607AB5DD4AE577ull);
    // stateless: same inputs, same output, order-free
    CHECK(derive_seed(0, 1) == 0x6E789E6AA1B965F4ull);
}

TEST_CASE("status names") {
    CHECK(to_string(TrialStatus::Exact) == "exact");
    CHECK(to_string(TrialStatus::Degraded) == "degraded");
    CHECK(to_string(TrialStatus::Failed) == "failed");
    CHECK(to_string(TrialStatus::InfeasibleConfig) == "infeasible-config");
}

TEST_CASE("factory configs carry the published shapes") {
    ExperimentConfig suite = make_noiseless_suite_config(1);
    CHECK(suite.kind == "noiseless-suite");
    CHECK(suite.trials == 50);
    CHECK(suite.band_count == 6);
    CHECK(suite.lambda_ratio == 100.0);
    CHECK(suite.carriers_hz.empty());
    CHECK_NOTHROW(suite.validate());

    ExperimentConfig sweep = make_noise_sweep_config(1);
    CHECK(sweep.kind == "noise-sweep");
    CHECK(sweep.snr_levels_db.size() == 10);
    CHECK(sweep.carriers_hz.size() == 6);
    CHECK(sweep.conjugate_pairs);
    CHECK(sweep.noise_placement == NoisePlacement::PostFold);
    CHECK(sweep.sample_period == 5e-5);
    CHECK_NOTHROW(sweep.validate());

    ExperimentConfig hw = make_quantized_hw_config(1);
    CHECK(hw.kind == "quantized-hw");
    CHECK(hw.trials == 1);
    CHECK(hw.band_count == 3);
    CHECK(hw.bit_depth == 7);
    CHECK(hw.lambda_fixed == 0.43);
    CHECK(hw.scale_peak == 5.91);
    CHECK_NOTHROW(hw.validate());
}

TEST_CASE("config validation rejects inconsistent setups") {
    ExperimentConfig cfg = make_noiseless_suite_config(1);
    SUBCASE("unknown kind") {
        cfg.kind = "mystery";
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("grid too short for the taper") {
        cfg.grid_length = cfg.taper_quiet + cfg.taper_ramp + 100;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("sweep requires snr levels") {
        ExperimentConfig sw = make_noise_sweep_config(1);
        sw.snr_levels_db.clear();
        CHECK_THROWS_AS(sw.validate(), std::invalid_argument);
    }
    SUBCASE("conjugate pairing requires a sign-symmetric fixed set") {
        ExperimentConfig sw = make_noise_sweep_config(1);
        sw.carriers_hz = {-100.0, 200.0};
        CHECK_THROWS_AS(sw.validate(), std::invalid_argument);
    }
}

TEST_CASE("small noiseless suite runs deterministically") {
    ExperimentConfig cfg = make_noiseless_suite_config(20240817);
    cfg.trials = 6;
    SuiteOutcome a = run_noiseless_suite(cfg);
    REQUIRE(a.records.size() == 6);
    CHECK(a.feasible >= 3);
    CHECK(a.exact == a.feasible);
    for (auto& r : a.records) {
        if (r.status == TrialStatus::Exact) {
            CHECK(r.nmse < cfg.exact_nmse);
            CHECK(r.order >= 1);
            CHECK(r.measured_peak <= cfg.order_margin * r.lambda);
            CHECK(r.fold_count > 0);
            REQUIRE(r.carriers_hz.size() == 6);
            for (std::size_t i = 1; i < 6; ++i) CHECK(r.carriers_hz[i - 1] < r.carriers_hz[i]);
        }
    }

    // identical rerun, including when spread over threads
    SuiteOutcome b = run_noiseless_suite(cfg);
    ExperimentConfig par = cfg;
    par.jobs = 4;
    SuiteOutcome c = run_noiseless_suite(par);
    REQUIRE(b.records.size() == a.records.size());
    REQUIRE(c.records.size() == a.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].seed == b.records[i].seed);
        CHECK(a.records[i].nmse == b.records[i].nmse);
        CHECK(a.records[i].nmse == c.records[i].nmse);
        CHECK(a.records[i].carriers_hz == c.records[i].carriers_hz);
    }

    // a different master seed draws different carrier sets
    ExperimentConfig other = cfg;
    other.master_seed = 99;
    SuiteOutcome d = run_noiseless_suite(other);
    bool differs = false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
        if (a.records[i].carriers_hz != d.records[i].carriers_hz) differs = true;
    CHECK(differs);
}

TEST_CASE("two-level sweep orders the noise floors") {
    ExperimentConfig cfg = make_noise_sweep_config(20240817);
    cfg.trials = 2;
    cfg.snr_levels_db = {50.0, 20.0};
    SweepOutcome out = run_noise_sweep(cfg);
    REQUIRE(out.records.size() == 4);
    CHECK(out.records[0].snr_db == 50.0);
    CHECK(out.records[3].snr_db == 20.0);
    REQUIRE(out.mean_mse_by_snr.count(50.0) == 1);
    REQUIRE(out.mean_mse_by_snr.count(20.0) == 1);
    CHECK(out.mean_mse_by_snr.at(50.0) < out.mean_mse_by_snr.at(20.0));
    CHECK(out.monotonicity_inversions == 0);
    for (auto& r : out.records) CHECK(r.status != TrialStatus::InfeasibleConfig);
}

TEST_CASE("quantized hardware-grade run beats the difference baseline") {
    ExperimentConfig cfg = make_quantized_hw_config(20240817);
    HwOutcome out = run_quantized_hw(cfg);
    // quantization noise keeps the error at the step scale, not exact-zero
    CHECK(out.proposed.status == TrialStatus::Degraded);
    CHECK(out.proposed.mse <= 1e-2);
    CHECK(out.baseline_mse > 10.0 * out.proposed.mse);
    CHECK(out.dynamic_range_ratio == doctest::Approx(5.91 / 0.43).epsilon(1e-12));
    CHECK(out.pass);
}

TEST_CASE("emit_report writes byte-identical files on rerun") {
    TempDir dir;
    ExperimentConfig cfg = make_noiseless_suite_config(20240817);
    cfg.trials = 4;

    cfg.out_dir = dir.path / "run1";
    SuiteOutcome a = run_noiseless_suite(cfg);
    emit_report(cfg, a.records, suite_aggregates_json(a), a.pass);
    REQUIRE(fs::exists(cfg.out_dir / "results.csv"));
    REQUIRE(fs::exists(cfg.out_dir / "summary.json"));

    ExperimentConfig cfg2 = cfg;
    cfg2.out_dir = dir.path / "run2";
    cfg2.jobs = 3;  // parallelism must not leak into the files
    SuiteOutcome b = run_noiseless_suite(cfg2);
    emit_report(cfg2, b.records, suite_aggregates_json(b), b.pass);

    CHECK(slurp(cfg.out_dir / "results.csv") == slurp(cfg2.out_dir / "results.csv"));
    CHECK(slurp(cfg.out_dir / "summary.json") == slurp(cfg2.out_dir / "summary.json"));

    // sanity on the shape: header + one row per trial
    std::string csv = slurp(cfg.out_dir / "results.csv");
    std::size_t rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == 1 + cfg.trials);
    CHECK(csv.rfind("trial,seed,status,", 0) == 0);

    std::string summary = slurp(cfg.out_dir / "summary.json");
    CHECK(summary.find("\"noiseless-suite\"") != std::string::npos);
    CHECK(summary.find("\"pass\"") != std::string::npos);
    CHECK(summary.find("jobs") == std::string::npos);
    CHECK(summary.find("out_dir") == std::string::npos);
}
