// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "cohlab/channel.hpp"
#include "cohlab/rng.hpp"
#include "doctest.h"

using namespace cohlab;

namespace {

// Gaussian pulse with 1/e intensity half-width t0, peak power p0, on a
// window of n samples at rate fs; x polarization only.
ComplexWaveform gaussian_pulse(size_t n, double fs, double t0, double p0) {
    ComplexWaveform w;
    w.sample_rate = fs;
    w.pol[0].resize(n);
    w.pol[1].assign(n, cdouble(0, 0));
    const double t_center = 0.5 * static_cast<double>(n) / fs;
    for (size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / fs - t_center;
        w.pol[0][k] = std::sqrt(p0) * std::exp(-t * t / (2 * t0 * t0));
    }
    return w;
}

double rms_width(const ComplexWaveform& w) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
        const double p = std::norm(w.pol[0][k]);
        const double t = static_cast<double>(k) / w.sample_rate;
        m0 += p;
        m1 += p * t;
        m2 += p * t * t;
    }
    const double mean = m1 / m0;
    return std::sqrt(m2 / m0 - mean * mean);
}

double total_energy(const ComplexWaveform& w) {
    double e = 0.0;
    for (int p = 0; p < 2; ++p)
        for (const auto& v : w.pol[p]) e += std::norm(v);
    return e;
}

}  // namespace

TEST_CASE("gamma from n2 and effective area") {
    // hand evaluation: 2 pi 2.6e-20 / (1550e-9 * 80e-12) = 1.3174e-3
    const double g = derive_gamma(2.6e-20, 80e-12, 1550e-9);
    CHECK(g == doctest::Approx(1.317e-3).epsilon(1e-3));
    CHECK(derive_gamma(2.6e-20, 160e-12, 1550e-9) == doctest::Approx(g / 2).epsilon(1e-12));
    CHECK_THROWS(derive_gamma(0.0, 80e-12, 1550e-9));
    CHECK_THROWS(derive_gamma(2.6e-20, -1.0, 1550e-9));
}

TEST_CASE("engineering unit conversions") {
    // 0.2 dB/km * ln(10)/10 = 0.046052 per km
    CHECK(attenuation_to_alpha(0.2) * 1e3 == doctest::Approx(0.046052).epsilon(1e-4));
    // D = 17 ps/(nm km) at 1550 nm: beta2 = -D lambda^2/(2 pi c) = -21.68 ps^2/km
    const double b2 = dispersion_to_beta2(17.0, 1550e-9);
    CHECK(b2 * 1e27 / 1e3 == doctest::Approx(-21.68).epsilon(1e-3));  // ps^2/km
    CHECK(dispersion_to_beta2(0.0, 1550e-9) == 0.0);

    const FiberParams f = fiber_from_engineering(FiberEngineering{});
    CHECK(f.length == doctest::Approx(80e3));
    CHECK(f.alpha == doctest::Approx(attenuation_to_alpha(0.2)));
    CHECK(f.beta2 == doctest::Approx(b2));
    CHECK(f.gamma == doctest::Approx(derive_gamma(2.6e-20, 80e-12, 1550e-9)));
}

TEST_CASE("attenuation-only propagation is exact") {
    ComplexWaveform w = gaussian_pulse(1024, 100e9, 50e-12, 2e-3);
    GaussianSampler g(4);
    for (auto& v : w.pol[1]) v = 0.01 * cdouble(g.normal(), g.normal());
    FiberParams f;
    f.alpha = attenuation_to_alpha(0.2);
    f.length = 10e3;
    const ComplexWaveform out = ssfm_propagate(w, f, 1e3, PolarizationModel::IndependentScalar);
    const double ratio = total_energy(out) / total_energy(w);
    CHECK(std::fabs(ratio / std::exp(-f.alpha * f.length) - 1.0) < 1e-12);
    // field samples individually scaled by exp(-alpha L / 2)
    const double amp = std::exp(-f.alpha * f.length / 2);
    for (size_t k = 0; k < w.size(); ++k)
        CHECK(std::abs(out.pol[0][k] - amp * w.pol[0][k]) < 1e-15);
}

TEST_CASE("dispersion-only Gaussian broadening matches the analytic factor") {
    const double t0 = 20e-12;
    ComplexWaveform w = gaussian_pulse(4096, 4e12, t0, 1e-3);
    FiberParams f;
    f.beta2 = dispersion_to_beta2(17.0, 1550e-9);
    f.length = 80e3;
    const ComplexWaveform out = ssfm_propagate(w, f, 1e3, PolarizationModel::IndependentScalar);
    const double factor = rms_width(out) / rms_width(w);
    const double expected = std::sqrt(1.0 + std::pow(f.beta2 * f.length / (t0 * t0), 2));
    CHECK(factor == doctest::Approx(expected).epsilon(0.01));
    // alpha = 0: linear operator is unitary, energy conserved
    CHECK(std::fabs(total_energy(out) / total_energy(w) - 1.0) < 1e-10);
}

TEST_CASE("SPM-only propagation: magnitudes kept, peak phase = gamma P0 L") {
    const double p0 = 2e-3;
    ComplexWaveform w = gaussian_pulse(1024, 100e9, 50e-12, p0);
    FiberParams f;
    f.gamma = 1.3e-3;
    f.length = 100e3;
    const ComplexWaveform out = ssfm_propagate(w, f, 1e3, PolarizationModel::IndependentScalar);
    size_t peak = 0;
    for (size_t k = 0; k < w.size(); ++k) {
        CHECK(std::fabs(std::abs(out.pol[0][k]) - std::abs(w.pol[0][k])) < 1e-12);
        if (std::norm(w.pol[0][k]) > std::norm(w.pol[0][peak])) peak = k;
    }
    const double phase = std::arg(out.pol[0][peak] / w.pol[0][peak]);
    const double expected = f.gamma * p0 * f.length;  // 0.26 rad, no wrap
    CHECK(phase == doctest::Approx(expected).epsilon(0.005));
}

TEST_CASE("manakov with an empty polarization equals scalar with 8/9 gamma") {
    ComplexWaveform w = gaussian_pulse(1024, 100e9, 50e-12, 2e-3);
    FiberParams f = fiber_from_engineering(FiberEngineering{});
    const ComplexWaveform mk = ssfm_propagate(w, f, 1e3, PolarizationModel::Manakov);
    FiberParams f89 = f;
    f89.gamma = (8.0 / 9.0) * f.gamma;
    const ComplexWaveform sc = ssfm_propagate(w, f89, 1e3, PolarizationModel::IndependentScalar);
    double err = 0.0;
    for (size_t k = 0; k < w.size(); ++k) err = std::max(err, std::abs(mk.pol[0][k] - sc.pol[0][k]));
    CHECK(err < 1e-14);
}

TEST_CASE("step-halving shrinks the splitting error at 2nd order") {
    ComplexWaveform w = gaussian_pulse(2048, 200e9, 20e-12, 50e-3);  // strongly nonlinear
    FiberParams f = fiber_from_engineering(FiberEngineering{});
    const auto ref = ssfm_propagate_steps(w, f, 1024, PolarizationModel::IndependentScalar);
    auto err_at = [&](int steps) {
        const auto out = ssfm_propagate_steps(w, f, steps, PolarizationModel::IndependentScalar);
        double e = 0.0;
        for (size_t k = 0; k < w.size(); ++k) e += std::norm(out.pol[0][k] - ref.pol[0][k]);
        return std::sqrt(e / total_energy(ref));
    };
    const double e8 = err_at(8), e16 = err_at(16);
    CHECK(e8 / e16 >= 3.0);  // symmetric splitting is 2nd order
}

TEST_CASE("ssfm step count variant matches the target-step entry point") {
    ComplexWaveform w = gaussian_pulse(1024, 100e9, 30e-12, 5e-3);
    FiberParams f = fiber_from_engineering(FiberEngineering{});
    // length/step = 80, integral, so both entry points take 80 uniform steps
    const auto a = ssfm_propagate(w, f, 1e3, PolarizationModel::Manakov);
    const auto b = ssfm_propagate_steps(w, f, 80, PolarizationModel::Manakov);
    for (size_t k = 0; k < w.size(); ++k) REQUIRE(a.pol[0][k] == b.pol[0][k]);
}

TEST_CASE("a diverging field reports the distance reached") {
    ComplexWaveform w = gaussian_pulse(256, 100e9, 50e-12, 1e-3);
    FiberParams f;
    f.alpha = -10.0;  // huge distributed gain: overflow mid-span
    f.length = 1e3;
    CHECK_THROWS_WITH_AS(ssfm_propagate(w, f, 100.0, PolarizationModel::IndependentScalar),
                         doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("edfa pure gain with the noise hook off") {
    ComplexWaveform w = gaussian_pulse(512, 100e9, 50e-12, 1e-3);
    AmplifierParams a;
    a.gain_db = 16.0;
    a.ase_enabled = false;
    const ComplexWaveform out = edfa_amplify(w, a, 1);
    const double ratio = total_energy(out) / total_energy(w);
    CHECK(ratio == doctest::Approx(std::pow(10.0, 1.6)).epsilon(1e-12));
}

TEST_CASE("ase variance matches the documented PSD over the full bandwidth") {
    ComplexWaveform w;
    w.sample_rate = 32e9;
    w.center_wavelength = 1550e-9;
    const size_t n = 1 << 20;
    w.pol[0].assign(n, cdouble(0, 0));
    w.pol[1].assign(n, cdouble(0, 0));
    AmplifierParams a;
    a.gain_db = 16.0;
    a.noise_figure_db = 4.5;
    const ComplexWaveform out = edfa_amplify(w, a, 99);
    const double gain = std::pow(10.0, a.gain_db / 10.0);
    const double nf = std::pow(10.0, a.noise_figure_db / 10.0);
    const double nu = kSpeedOfLight / w.center_wavelength;
    const double expect = (gain - 1.0) * kPlanck * nu * nf / 2.0 * w.sample_rate;
    for (int p = 0; p < 2; ++p) {
        double var = 0.0;
        for (const auto& v : out.pol[p]) var += std::norm(v);
        var /= static_cast<double>(n);
        CHECK(var == doctest::Approx(expect).epsilon(0.03));
    }
    // determinism and per-polarization stream independence
    const ComplexWaveform again = edfa_amplify(w, a, 99);
    CHECK(again.pol[0] == out.pol[0]);
    CHECK(again.pol[1] == out.pol[1]);
    CHECK(out.pol[0][0] != out.pol[1][0]);
}

TEST_CASE("one transparent noiseless span conserves power") {
    BitStream bits = prbs_generate(3, 4 * 512);
    SymbolFrame fr = qam16_map(bits);
    const ComplexWaveform w = shape_pulse(fr, fr, PulseShape{}, 10e9, 1e-3);
    LinkConfig link;
    link.span = fiber_from_engineering(FiberEngineering{});
    link.n_spans = 1;
    link.amplifier.gain_db = 0.2 * 80.0;
    link.amplifier.ase_enabled = false;
    link.ssfm_step = 1e3;
    const ComplexWaveform out = link_propagate(w, link, 5);
    CHECK(out.mean_power() == doctest::Approx(w.mean_power()).epsilon(1e-3));
}

TEST_CASE("multi-span link equals sequential single spans with derived sub-seeds") {
    BitStream bits = prbs_generate(4, 4 * 256);
    SymbolFrame fr = qam16_map(bits);
    const ComplexWaveform w = shape_pulse(fr, fr, PulseShape{}, 10e9, 1e-3);
    LinkConfig link;
    link.span = fiber_from_engineering(FiberEngineering{});
    link.n_spans = 2;
    link.amplifier.gain_db = 16.0;
    link.ssfm_step = 2e3;
    const uint64_t seed = 42;
    const ComplexWaveform full = link_propagate(w, link, seed);

    ComplexWaveform manual = ssfm_propagate(w, link.span, link.ssfm_step, link.polarization_model);
    manual = edfa_amplify(manual, link.amplifier, link_span_seed(seed, 0));
    manual = ssfm_propagate(manual, link.span, link.ssfm_step, link.polarization_model);
    manual = edfa_amplify(manual, link.amplifier, link_span_seed(seed, 1));
    for (int p = 0; p < 2; ++p)
        for (size_t k = 0; k < w.size(); ++k) REQUIRE(full.pol[p][k] == manual.pol[p][k]);
}

TEST_CASE("received OSNR follows the textbook multi-span accumulation") {
    BitStream bx = prbs_generate(8, 4 * 2048), by = prbs_generate(9, 4 * 2048);
    const double p_w = 1e-3;  // 0 dBm
    const ComplexWaveform tx = shape_pulse(qam16_map(bx), qam16_map(by), PulseShape{}, 10e9, p_w);
    LinkConfig link;
    link.span = fiber_from_engineering(FiberEngineering{});
    link.span.gamma = 0.0;  // linear link so signal and noise superpose
    link.n_spans = 8;
    link.amplifier.gain_db = 16.0;
    link.amplifier.noise_figure_db = 4.5;
    link.ssfm_step = 8e3;
    const ComplexWaveform noisy = link_propagate(tx, link, 7);
    LinkConfig quiet = link;
    quiet.amplifier.ase_enabled = false;
    const ComplexWaveform clean = link_propagate(tx, quiet, 7);

    double p_sig = clean.mean_power();
    double p_noise = 0.0;
    for (int p = 0; p < 2; ++p)
        for (size_t k = 0; k < tx.size(); ++k) p_noise += std::norm(noisy.pol[p][k] - clean.pol[p][k]);
    p_noise /= static_cast<double>(tx.size());

    const double b_ref = 12.5e9;  // 0.1 nm at 1550 nm
    const double osnr_db = 10 * std::log10(p_sig / (p_noise * b_ref / tx.sample_rate));
    // textbook: OSNR = 58 + P(dBm) - span_loss - NF - 10 log10(spans)
    const double expected = 57.95 + 0.0 - 16.0 - 4.5 - 10 * std::log10(8.0);
    CHECK(std::fabs(osnr_db - expected) < 1.0);
}
