// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "cohlab/channel.hpp"
#include "cohlab/dsp.hpp"
#include "cohlab/rng.hpp"
#include "cohlab/txrx.hpp"
#include "doctest.h"

using namespace cohlab;

namespace {

ComplexWaveform random_waveform(uint64_t seed, size_t n, double fs = 80e9) {
    GaussianSampler g(seed);
    ComplexWaveform w;
    w.sample_rate = fs;
    for (int p = 0; p < 2; ++p) {
        w.pol[p].resize(n);
        for (auto& v : w.pol[p]) v = 0.01 * cdouble(g.normal(), g.normal());
    }
    return w;
}

double max_diff(const ComplexWaveform& a, const ComplexWaveform& b) {
    double m = 0.0;
    for (int p = 0; p < 2; ++p)
        for (size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.pol[p][k] - b.pol[p][k]));
    return m;
}

SymbolFrame random_qam(uint64_t seed, size_t n) {
    return qam16_map(prbs_generate(seed, 4 * n));
}

}  // namespace

TEST_CASE("cdc: zero length is the identity, opposite lengths cancel") {
    const ComplexWaveform w = random_waveform(1, 2048);
    const FiberParams f = fiber_from_engineering(FiberEngineering{});
    const ComplexWaveform same = cdc(w, f, 0.0);
    CHECK(max_diff(same, w) < 1e-15);
    const ComplexWaveform back = cdc(cdc(w, f, 320e3), f, -320e3);
    CHECK(max_diff(back, w) < 1e-12);
}

TEST_CASE("cdc preserves energy") {
    const ComplexWaveform w = random_waveform(2, 4096);
    const FiberParams f = fiber_from_engineering(FiberEngineering{});
    const ComplexWaveform out = cdc(w, f, 320e3);
    CHECK(std::fabs(out.mean_power() / w.mean_power() - 1.0) < 1e-10);
}

TEST_CASE("cdc inverts a lossless dispersion-only span") {
    const ComplexWaveform w = random_waveform(3, 2048);
    FiberParams f = fiber_from_engineering(FiberEngineering{});
    f.alpha = 0.0;
    f.gamma = 0.0;
    f.beta3 = 1e-40;  // exercise the third-order term too
    const ComplexWaveform prop = ssfm_propagate(w, f, 4e3, PolarizationModel::IndependentScalar);
    const ComplexWaveform back = cdc(prop, f, f.length);
    CHECK(max_diff(back, w) < 1e-10);
}

TEST_CASE("dbp with zero nonlinear scaling reduces to cdc on a transparent link") {
    const ComplexWaveform w = random_waveform(4, 4096);
    LinkConfig link;
    link.span = fiber_from_engineering(FiberEngineering{});
    link.n_spans = 3;
    link.amplifier.gain_db = 0.2 * 80.0;  // exactly transparent
    link.ssfm_step = 8e3;
    const ComplexWaveform a = dbp(w, link, 10, 0.0);
    const ComplexWaveform b = cdc(w, link.span, link.span.length * link.n_spans);
    CHECK(max_diff(a, b) < 1e-9);
}

TEST_CASE("dbp rejects a bad step count") {
    const ComplexWaveform w = random_waveform(5, 256);
    LinkConfig link;
    link.span = fiber_from_engineering(FiberEngineering{});
    CHECK_THROWS(dbp(w, link, 0, 1.0));
}

TEST_CASE("dbp exactly inverts a noiseless nonlinear link with matched steps") {
    const size_t n_sym = 1 << 12;
    BitStream bits = prbs_generate(17, 4 * n_sym);
    const SymbolFrame tx = qam16_map(bits);
    const PulseShape ps;
    const double launch_w = std::pow(10.0, (2.0 - 30.0) / 10.0);  // 2 dBm
    const ComplexWaveform w = shape_pulse(tx, SymbolFrame{}, ps, 10e9, launch_w);

    LinkConfig link;
    link.span = fiber_from_engineering(FiberEngineering{});
    link.n_spans = 2;
    link.amplifier.gain_db = 16.0;
    link.amplifier.ase_enabled = false;
    link.ssfm_step = 2e3;  // 40 uniform steps per span
    link.polarization_model = PolarizationModel::IndependentScalar;
    const ComplexWaveform rxw = link_propagate(w, link, 0);
    const ComplexWaveform undone = dbp(rxw, link, 40, 1.0);

    const ReceivedSymbols rs = matched_filter_downsample(undone, ps);
    const size_t lo = static_cast<size_t>(rs.guard);
    SymbolFrame ref;
    ref.symbols.assign(tx.symbols.begin() + lo, tx.symbols.end() - lo);
    const AlignResult ar = align_constellation(rs.x, ref);
    CHECK(ar.delay == 0);
    CHECK_FALSE(ar.conjugated);
    double err = 0.0, p_ref = 0.0;
    for (size_t k = 0; k < ref.size(); ++k) {
        err += std::norm(ar.frame.symbols[k] - ref.symbols[k]);
        p_ref += std::norm(ref.symbols[k]);
    }
    CHECK(100.0 * std::sqrt(err / p_ref) < 1.0);  // EVM under 1%
}

TEST_CASE("matched filter: guard, unit output power, offset validation") {
    const PulseShape ps;
    const SymbolFrame tx = random_qam(23, 512), ty = random_qam(24, 512);
    const ComplexWaveform w = shape_pulse(tx, ty, ps, 10e9, 2e-3);
    const ReceivedSymbols rs = matched_filter_downsample(w, ps);
    CHECK(rs.guard == ps.span_symbols);
    CHECK(rs.x.size() == 512 - 2 * static_cast<size_t>(ps.span_symbols));
    double px = 0.0;
    for (const auto& s : rs.x.symbols) px += std::norm(s);
    CHECK(px / static_cast<double>(rs.x.size()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rs.scale_x > 0.0);
    CHECK_THROWS(matched_filter_downsample(w, ps, -1));
    CHECK_THROWS(matched_filter_downsample(w, ps, ps.sps));
}

TEST_CASE("bps leaves a clean frame untouched and reports a zero track") {
    const SymbolFrame f = random_qam(31, 256);
    const CprResult r = cpr_bps(f, 64, 32);
    REQUIRE(r.frame.size() == f.size());
    for (size_t k = 0; k < f.size(); ++k) {
        CHECK(std::abs(r.frame.symbols[k] - f.symbols[k]) < 1e-12);
        CHECK(r.phase[k] == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("bps recovers a constant offset to within the grid spacing") {
    const SymbolFrame f = random_qam(32, 512);
    const double offset = 0.1;
    SymbolFrame rot = f;
    for (auto& s : rot.symbols) s *= std::polar(1.0, offset);
    const int b = 64;
    const CprResult r = cpr_bps(rot, b, 32);
    const double half_grid = 0.5 * (M_PI / 2) / b;
    for (size_t k = 0; k < f.size(); ++k) {
        CHECK(std::fabs(r.phase[k] - offset) <= half_grid + 1e-12);
        CHECK(r.raw_phase[k] >= -M_PI / 4);
        CHECK(r.raw_phase[k] < M_PI / 4);
        CHECK(std::abs(r.frame.symbols[k] - f.symbols[k]) < 2 * half_grid);
    }
}

TEST_CASE("bps tracks a slow phase walk without cycle slips") {
    const SymbolFrame f = random_qam(33, 2048);
    GaussianSampler g(8);
    SymbolFrame drifted = f;
    std::vector<double> truth(f.size());
    double phi = 0.0;
    for (size_t k = 0; k < f.size(); ++k) {
        phi += 0.01 * g.normal();
        truth[k] = phi;
        drifted.symbols[k] *= std::polar(1.0, phi);
    }
    const CprResult r = cpr_bps(drifted, 64, 32);
    double worst = 0.0;
    for (size_t k = 0; k < f.size(); ++k) {
        worst = std::max(worst, std::fabs(r.phase[k] - truth[k]));
        CHECK(r.raw_phase[k] >= -M_PI / 4);
        CHECK(r.raw_phase[k] < M_PI / 4);
    }
    CHECK(worst < 0.2);  // no pi/2 slips; tracking error stays small
}

TEST_CASE("bps clamps the averaging window near the frame edges") {
    const SymbolFrame f = random_qam(34, 10);
    const CprResult r = cpr_bps(f, 16, 64);  // window longer than the frame
    CHECK(r.frame.size() == 10);
}

TEST_CASE("alignment resolves rotations, conjugation and cyclic delays") {
    const size_t n = 256;
    const SymbolFrame ref = random_qam(41, n);

    for (int r = 0; r < 4; ++r) {
        SymbolFrame f = ref;
        const cdouble rot = std::pow(cdouble(0, 1), r);
        for (auto& s : f.symbols) s *= rot;
        const AlignResult a = align_constellation(f, ref);
        CHECK(a.rotation_quarter == (4 - r) % 4);
        CHECK_FALSE(a.conjugated);
        CHECK(a.delay == 0);
        CHECK_FALSE(a.ambiguous);
        double err = 0.0;
        for (size_t k = 0; k < n; ++k) err = std::max(err, std::abs(a.frame.symbols[k] - ref.symbols[k]));
        CHECK(err < 1e-12);
    }

    SymbolFrame cj = ref;
    for (auto& s : cj.symbols) s = std::conj(s);
    const AlignResult ac = align_constellation(cj, ref);
    CHECK(ac.conjugated);
    CHECK(ac.delay == 0);
    double errc = 0.0;
    for (size_t k = 0; k < n; ++k) errc = std::max(errc, std::abs(ac.frame.symbols[k] - ref.symbols[k]));
    CHECK(errc < 1e-12);

    // frame lags the reference by 3 symbols (cyclically)
    SymbolFrame lag;
    lag.symbols.resize(n);
    for (size_t k = 0; k < n; ++k) lag.symbols[k] = ref.symbols[(k + n - 3) % n];
    const AlignResult al = align_constellation(lag, ref);
    CHECK(al.delay == 3);
    // and leads by 5: reported as a signed negative delay
    SymbolFrame lead;
    lead.symbols.resize(n);
    for (size_t k = 0; k < n; ++k) lead.symbols[k] = ref.symbols[(k + 5) % n];
    const AlignResult ald = align_constellation(lead, ref);
    CHECK(ald.delay == -5);

    // everything at once
    SymbolFrame all;
    all.symbols.resize(n);
    for (size_t k = 0; k < n; ++k)
        all.symbols[k] = std::conj(cdouble(0, 1) * ref.symbols[(k + n - 7) % n]);
    const AlignResult aa = align_constellation(all, ref);
    CHECK(aa.conjugated);
    CHECK(aa.delay == 7);
    double erra = 0.0;
    for (size_t k = 0; k < n; ++k) erra = std::max(erra, std::abs(aa.frame.symbols[k] - ref.symbols[k]));
    CHECK(erra < 1e-12);
}

TEST_CASE("alignment flags a conjugation-blind (real-valued) frame as ambiguous") {
    SymbolFrame ref;
    GaussianSampler g(6);
    ref.symbols.resize(128);
    for (auto& s : ref.symbols) s = cdouble(g.normal() > 0 ? 1.0 : -1.0, 0.0);
    const AlignResult a = align_constellation(ref, ref);
    CHECK(a.ambiguous);  // conjugation cannot be distinguished
}

TEST_CASE("fft-peak frequency offset estimate is exact on a bin") {
    const size_t n = 512;
    const double rs = 10e9;
    const SymbolFrame ref = random_qam(51, n);
    SymbolFrame rx = ref;
    const double f0 = 20.0 / static_cast<double>(n) * rs;  // exactly bin 20
    for (size_t k = 0; k < n; ++k)
        rx.symbols[k] *= std::polar(1.0, 2 * M_PI * f0 * static_cast<double>(k) / rs);
    CHECK(estimate_frequency_offset(rx, ref, rs) == doctest::Approx(f0).epsilon(1e-12));
    CHECK(estimate_frequency_offset(ref, ref, rs) == 0.0);
}
