#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <usmb/signal_model.hpp>

#include "testutil.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

using namespace usmb;

TEST_CASE("sinc_atom values and zeros") {
    CHECK(sinc_atom(5.0, 0.0) == 1.0);
    CHECK(sinc_atom(2.0, 0.7) == doctest::Approx(std::sin(1.4) / 1.4).epsilon(1e-15));
    CHECK(sinc_atom(2.0, -0.7) == sinc_atom(2.0, 0.7));
    // zero crossings at multiples of pi / W
    for (int k = 1; k <= 5; ++k)
        CHECK(std::abs(sinc_atom(3.0, k * std::numbers::pi / 3.0)) < 1e-15);
    // series branch continuous with the direct branch
    double w = 7.0;
    double near = 1e-9, far = 2e-8;
    CHECK(sinc_atom(w, near) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sinc_atom(w, far) == doctest::Approx(std::sin(w * far) / (w * far)).epsilon(1e-12));
}

TEST_CASE("TimeGrid validate and time_at") {
    TimeGrid g{1.0, 0.25, 8};
    CHECK_NOTHROW(g.validate());
    CHECK(g.time_at(0) == 1.0);
    CHECK(g.time_at(4) == 2.0);
    CHECK_THROWS_AS((TimeGrid{0.0, 0.0, 8}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TimeGrid{0.0, -0.1, 8}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 0}.validate()), std::invalid_argument);
}

TEST_CASE("Taper weight profile") {
    Taper t{2, 3};
    CHECK(t.weight(0) == 0.0);
    CHECK(t.weight(1) == 0.0);
    CHECK(t.weight(2) == doctest::Approx(0.14644660940672624).epsilon(1e-15));
    CHECK(t.weight(3) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(t.weight(4) == doctest::Approx(0.8535533905932737).epsilon(1e-15));
    CHECK(t.weight(5) == 1.0);
    CHECK(t.weight(100) == 1.0);
    CHECK(Taper{}.active() == false);
    CHECK(t.active());
    // strictly increasing across the ramp
    Taper big{10, 50};
    for (std::size_t i = 10; i < 59; ++i) CHECK(big.weight(i) < big.weight(i + 1));
}

TEST_CASE("synth_baseband determinism, realness, and taper action") {
    TimeGrid g{0.0, 1.0 / 1024.0, 1024};
    double omega_b = 2 * std::numbers::pi * 40.0;
    ComplexSeries a = synth_baseband({42, 1.0}, omega_b, g, 6);
    ComplexSeries b = synth_baseband({42, 1.0}, omega_b, g, 6);
    ComplexSeries c = synth_baseband({43, 1.0}, omega_b, g, 6);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    CHECK(a.sample_period == g.sample_period);
    REQUIRE(a.size() == g.length);
    for (auto& v : a.samples) CHECK(v.imag() == 0.0);

    ComplexSeries zero = synth_baseband({42, 1.0}, omega_b, g, 0);
    for (auto& v : zero.samples) CHECK(v == cplx{0.0, 0.0});

    // energy_scale is a pure gain on the same draw
    ComplexSeries twice = synth_baseband({42, 2.0}, omega_b, g, 6);
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(twice.samples[k].real() == doctest::Approx(2.0 * a.samples[k].real()).epsilon(1e-15));

    // the taper multiplies the untapered draw pointwise by its weight
    Taper taper{64, 128};
    ComplexSeries tapered = synth_baseband({42, 1.0}, omega_b, g, 6, taper);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(tapered.samples[k].real() ==
              doctest::Approx(taper.weight(k) * a.samples[k].real()).epsilon(1e-14));
    }
    for (std::size_t k = 0; k < 64; ++k) CHECK(tapered.samples[k] == cplx{0.0, 0.0});
}

TEST_CASE("synth_baseband stays essentially inside its band") {
    // matched-tone probe: out-of-band response a couple of decades below the
    // in-band peak (truncated sinc tails leak at the -30 dB scale, no lower)
    TimeGrid g{0.0, 1.0 / 4096.0, 4096};
    double omega_b = 2 * std::numbers::pi * 200.0;
    ComplexSeries s = synth_baseband({7, 1.0}, omega_b, g, 6);
    double inside = 0.0;
    for (int i = -20; i <= 20; ++i)
        inside = std::max(inside, std::abs(testutil::matched_tone(s, omega_b * i / 20.0)));
    double outside = 0.0;
    for (int i = 0; i <= 30; ++i) {
        double om = omega_b * (1.4 + 5.0 * i / 30.0);
        outside = std::max({outside, std::abs(testutil::matched_tone(s, om)),
                            std::abs(testutil::matched_tone(s, -om))});
    }
    CHECK(inside > 0.0);
    CHECK(outside < 5e-3 * inside);
}

TEST_CASE("synth_multiband composes modulated basebands") {
    TimeGrid g{0.0, 1.0 / 2048.0, 512};
    MultibandSpec spec;
    spec.band_count = 2;
    spec.baseband_halfwidth = 2 * std::numbers::pi * 30.0;
    spec.carriers = {2 * std::numbers::pi * 300.0, -2 * std::numbers::pi * 520.0};
    spec.band_seeds = {{11, 1.0}, {12, 1.0}};
    spec.components_per_band = 5;
    MultibandSignal sig = synth_multiband(spec, g);
    REQUIRE(sig.series.size() == g.length);
    REQUIRE(sig.band_peaks.size() == 2);

    ComplexSeries phi0 = synth_baseband(spec.band_seeds[0], spec.baseband_halfwidth, g, 5);
    ComplexSeries phi1 = synth_baseband(spec.band_seeds[1], spec.baseband_halfwidth, g, 5);
    double pk0 = 0.0, pk1 = 0.0, peak = 0.0;
    for (std::size_t k = 0; k < g.length; ++k) {
        double t = g.time_at(k);
        cplx want = phi0.samples[k] * std::polar(1.0, -spec.carriers[0] * t) +
                    phi1.samples[k] * std::polar(1.0, -spec.carriers[1] * t);
        CHECK(std::abs(sig.series.samples[k] - want) < 1e-12);
        pk0 = std::max(pk0, std::abs(phi0.samples[k]));
        pk1 = std::max(pk1, std::abs(phi1.samples[k]));
        peak = std::max(peak, std::abs(want));
    }
    CHECK(sig.band_peaks[0] == doctest::Approx(pk0).epsilon(1e-14));
    CHECK(sig.band_peaks[1] == doctest::Approx(pk1).epsilon(1e-14));
    CHECK(sig.phi_peak == doctest::Approx(std::max(pk0, pk1)).epsilon(1e-14));
}

TEST_CASE("conjugate carriers with a shared seed give a real composite") {
    TimeGrid g{0.0, 5e-5, 512};
    MultibandSpec spec;
    spec.band_count = 2;
    spec.baseband_halfwidth = std::numbers::pi * 100.0;
    spec.carriers = {2 * std::numbers::pi * 1500.0, -2 * std::numbers::pi * 1500.0};
    spec.band_seeds = {{99, 1.0}, {99, 1.0}};  // same draw both sides
    spec.components_per_band = 6;
    MultibandSignal sig = synth_multiband(spec, g);
    double peak = peak_amplitude(sig.series);
    REQUIRE(peak > 0.0);
    for (auto& v : sig.series.samples) CHECK(std::abs(v.imag()) < 1e-12 * peak);
}

TEST_CASE("MultibandSpec::validate") {
    MultibandSpec spec;
    spec.band_count = 2;
    spec.baseband_halfwidth = 10.0;
    spec.carriers = {0.0, 100.0};
    spec.band_seeds = {{1, 1.0}, {2, 1.0}};
    CHECK_NOTHROW(spec.validate());

    SUBCASE("carrier count mismatch") {
        spec.carriers = {0.0};
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
    SUBCASE("seed count mismatch") {
        spec.band_seeds = {{1, 1.0}};
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
    SUBCASE("carriers closer than the halfwidth") {
        spec.carriers = {0.0, 9.0};
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
    SUBCASE("zero bands") {
        spec.band_count = 0;
        spec.carriers.clear();
        spec.band_seeds.clear();
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
    SUBCASE("nonpositive halfwidth") {
        spec.baseband_halfwidth = 0.0;
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }
}

TEST_CASE("peak_amplitude is the componentwise max") {
    ComplexSeries x;
    x.samples = {{0.5, -2.0}, {1.5, 0.25}};
    CHECK(peak_amplitude(x) == 2.0);
}

TEST_CASE("scale_to_peak hits the target and rescales metadata") {
    TimeGrid g{0.0, 1e-4, 256};
    MultibandSpec spec;
    spec.band_count = 1;
    spec.baseband_halfwidth = std::numbers::pi * 200.0;
    spec.carriers = {2 * std::numbers::pi * 2000.0};
    spec.band_seeds = {{5, 1.0}};
    MultibandSignal sig = synth_multiband(spec, g);
    double before_peak = sig.band_peaks[0];
    double before_amp = peak_amplitude(sig.series);
    REQUIRE(before_amp > 0.0);
    scale_to_peak(sig, 5.91);
    CHECK(peak_amplitude(sig.series) == doctest::Approx(5.91).epsilon(1e-13));
    CHECK(sig.band_peaks[0] == doctest::Approx(before_peak * 5.91 / before_amp).epsilon(1e-13));
    CHECK(sig.phi_peak == sig.band_peaks[0]);
}
