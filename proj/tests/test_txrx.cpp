// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "cohlab/dsp.hpp"
#include "cohlab/fft.hpp"
#include "cohlab/txrx.hpp"
#include "doctest.h"

using namespace cohlab;

TEST_CASE("prbs is deterministic per seed") {
    const BitStream a = prbs_generate(7, 16);
    const BitStream b = prbs_generate(7, 16);
    REQUIRE(a.bits.size() == 16);
    CHECK(a.bits == b.bits);
    CHECK(a.seed == 7);
    for (uint8_t v : a.bits) CHECK((v == 0 || v == 1));
}

TEST_CASE("prbs rejects an empty request") {
    CHECK_THROWS(prbs_generate(7, 0));
}

TEST_CASE("distinct seeds give near-independent streams") {
    const size_t n = 1 << 16;
    const BitStream a = prbs_generate(7, n);
    const BitStream b = prbs_generate(8, n);
    size_t dist = 0;
    for (size_t i = 0; i < n; ++i) dist += a.bits[i] != b.bits[i];
    // binomial: mean n/2, sd sqrt(n)/2 = 128; allow 3 sigma
    CHECK(std::llabs(static_cast<long long>(dist) - (1 << 15)) <= 3 * 128);
}

TEST_CASE("ones fraction obeys the law of large numbers") {
    const size_t n = 1 << 20;
    const BitStream a = prbs_generate(11, n);
    size_t ones = 0;
    for (uint8_t v : a.bits) ones += v;
    CHECK(std::fabs(static_cast<double>(ones) / n - 0.5) < 0.002);
}

TEST_CASE("documented Gray mapping: 0000 -> (-3-3j)/sqrt(10)") {
    BitStream b;
    b.bits = {0, 0, 0, 0};
    const SymbolFrame f = qam16_map(b);
    REQUIRE(f.size() == 1);
    CHECK(std::abs(f.symbols[0] - cdouble(-3, -3) / std::sqrt(10.0)) < 1e-15);
}

TEST_CASE("all 16 labels: distinct points, unit mean power, map/demap identity") {
    BitStream b;
    for (int v = 0; v < 16; ++v)
        for (int k = 3; k >= 0; --k) b.bits.push_back(static_cast<uint8_t>((v >> k) & 1));
    const SymbolFrame f = qam16_map(b);
    REQUIRE(f.size() == 16);
    double power = 0.0;
    for (size_t i = 0; i < 16; ++i) {
        power += std::norm(f.symbols[i]);
        for (size_t j = i + 1; j < 16; ++j)
            CHECK(std::abs(f.symbols[i] - f.symbols[j]) > 0.1);
    }
    CHECK(power / 16.0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(qam16_demap(f).bits == b.bits);
}

TEST_CASE("Gray property: minimum-distance neighbors differ in exactly one bit") {
    BitStream b;
    for (int v = 0; v < 16; ++v)
        for (int k = 3; k >= 0; --k) b.bits.push_back(static_cast<uint8_t>((v >> k) & 1));
    const SymbolFrame f = qam16_map(b);
    const double dmin = 2.0 / std::sqrt(10.0);
    int pairs = 0;
    for (int i = 0; i < 16; ++i)
        for (int j = i + 1; j < 16; ++j) {
            if (std::abs(f.symbols[i] - f.symbols[j]) > dmin * 1.01) continue;
            ++pairs;
            int diff = 0;
            for (int k = 0; k < 4; ++k) diff += b.bits[4 * i + k] != b.bits[4 * j + k];
            CHECK(diff == 1);
        }
    CHECK(pairs == 24);  // 16QAM grid has 24 nearest-neighbor edges
}

TEST_CASE("demap decision regions and tie rule") {
    // a perturbation smaller than half the minimum distance never flips
    BitStream b = prbs_generate(21, 64);
    const SymbolFrame clean = qam16_map(b);
    SymbolFrame noisy = clean;
    GaussianSampler g(2);
    for (auto& s : noisy.symbols) {
        const double ang = 2 * M_PI * g.uniform();
        s += 0.99 / std::sqrt(10.0) * cdouble(std::cos(ang), std::sin(ang));
    }
    CHECK(qam16_demap(noisy).bits == b.bits);

    // the origin is equidistant from the four inner points; the documented
    // tie rule picks the smallest real part, then the smallest imaginary part
    SymbolFrame origin;
    origin.symbols = {cdouble(0, 0)};
    const BitStream lab = qam16_demap(origin);
    const SymbolFrame back = qam16_map(lab);
    CHECK(std::abs(back.symbols[0] - cdouble(-1, -1) / std::sqrt(10.0)) < 1e-15);
}

TEST_CASE("RRC taps: symmetric, unit energy, correct support") {
    PulseShape ps;
    const std::vector<double> taps = rrc_taps(ps);
    REQUIRE(taps.size() == static_cast<size_t>(2 * ps.span_symbols * ps.sps + 1));
    double energy = 0.0;
    for (size_t k = 0; k < taps.size(); ++k) {
        energy += taps[k] * taps[k];
        CHECK(taps[k] == doctest::Approx(taps[taps.size() - 1 - k]).epsilon(1e-12));
    }
    CHECK(energy == doctest::Approx(1.0).epsilon(1e-12));
    PulseShape bad = ps;
    bad.rolloff = 1.5;
    CHECK_THROWS(rrc_taps(bad));
    bad.rolloff = -0.1;
    CHECK_THROWS(rrc_taps(bad));
}

TEST_CASE("a single symbol produces the RRC impulse response") {
    PulseShape ps;
    SymbolFrame x;
    x.symbols.assign(64, cdouble(0, 0));
    x.symbols[32] = cdouble(1, 0);
    const ComplexWaveform w = shape_pulse(x, SymbolFrame{}, ps, 10e9, 1e-3);
    const std::vector<double> taps = rrc_taps(ps);
    // output is proportional to the taps centered on sample 32*sps
    const size_t c = 32 * ps.sps;
    const double scale = w.pol[0][c].real() / taps[taps.size() / 2];
    double err = 0.0;
    for (size_t k = 0; k < taps.size(); ++k) {
        const size_t i = c - taps.size() / 2 + k;
        err = std::max(err, std::abs(w.pol[0][i] - scale * taps[k]));
    }
    CHECK(err < 1e-12 * scale);
}

TEST_CASE("power calibration hits the requested launch power") {
    const double p_dbm = 1.0;
    const double p_w = std::pow(10.0, (p_dbm - 30.0) / 10.0);
    BitStream bx = prbs_generate(5, 4 * 512), by = prbs_generate(6, 4 * 512);
    const ComplexWaveform w =
        shape_pulse(qam16_map(bx), qam16_map(by), PulseShape{}, 10e9, p_w);
    CHECK(w.mean_power() == doctest::Approx(p_w).epsilon(1e-3));
}

TEST_CASE("noiseless loopback recovers every bit with tiny ISI") {
    PulseShape ps;
    BitStream bx = prbs_generate(31, 4 * 1024), by = prbs_generate(32, 4 * 1024);
    const SymbolFrame tx = qam16_map(bx), ty = qam16_map(by);
    const ComplexWaveform w = shape_pulse(tx, ty, ps, 10e9, 1e-3);
    const ReceivedSymbols rs = matched_filter_downsample(w, ps);
    REQUIRE(rs.guard == ps.span_symbols);
    const size_t lo = static_cast<size_t>(rs.guard);
    double worst = 0.0;
    for (size_t k = 0; k < rs.x.size(); ++k) {
        worst = std::max(worst, std::abs(rs.x.symbols[k] - tx.symbols[k + lo]));
        worst = std::max(worst, std::abs(rs.y.symbols[k] - ty.symbols[k + lo]));
    }
    CHECK(worst < 1e-3);  // RRC pair is Nyquist: residual ISI only
    BitStream rx_bits = qam16_demap(rs.x);
    for (size_t k = 0; k < rx_bits.bits.size(); ++k)
        REQUIRE(rx_bits.bits[k] == bx.bits[4 * lo + k]);
}

TEST_CASE("laser phase noise: magnitudes preserved, zero linewidth inert") {
    ComplexWaveform w;
    w.sample_rate = 1e9;
    w.pol[0].assign(4096, cdouble(1, 0));
    w.pol[1].assign(4096, cdouble(0.5, -0.25));
    const ComplexWaveform same = apply_laser_phase_noise(w, 0.0, 9);
    for (size_t i = 0; i < w.size(); ++i) CHECK(same.pol[0][i] == w.pol[0][i]);
    const ComplexWaveform out = apply_laser_phase_noise(w, 1e5, 9);
    for (size_t i = 0; i < w.size(); ++i) {
        CHECK(std::abs(out.pol[0][i]) == doctest::Approx(1.0).epsilon(1e-12));
        // one laser: both polarizations rotate by the same angle
        const cdouble r0 = out.pol[0][i] / w.pol[0][i];
        const cdouble r1 = out.pol[1][i] / w.pol[1][i];
        CHECK(std::abs(r0 - r1) < 1e-12);
    }
}

TEST_CASE("phase increment variance matches 2 pi linewidth dt") {
    ComplexWaveform w;
    w.sample_rate = 1e9;
    const size_t n = 1 << 20;
    w.pol[0].assign(n, cdouble(1, 0));
    w.pol[1].assign(n, cdouble(0, 0));
    const double lw = 1e5;
    const ComplexWaveform out = apply_laser_phase_noise(w, lw, 77);
    double sum2 = 0.0;
    for (size_t i = 1; i < n; ++i) {
        const double d = std::arg(out.pol[0][i] / out.pol[0][i - 1]);
        sum2 += d * d;
    }
    const double var = sum2 / static_cast<double>(n - 1);
    CHECK(var == doctest::Approx(2 * M_PI * lw / 1e9).epsilon(0.05));
}

TEST_CASE("frequency offset: identity at zero, exact inverse, FFT peak shift") {
    ComplexWaveform w;
    w.sample_rate = 8e9;
    const size_t n = 1024;
    w.pol[0].resize(n);
    w.pol[1].assign(n, cdouble(0, 0));
    const double df = w.sample_rate / static_cast<double>(n);
    for (size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / w.sample_rate;
        w.pol[0][k] = std::polar(1.0, 2 * M_PI * (40 * df) * t);  // tone in bin 40
    }
    const ComplexWaveform id = apply_frequency_offset(w, 0.0);
    for (size_t i = 0; i < n; ++i) CHECK(id.pol[0][i] == w.pol[0][i]);

    const ComplexWaveform round =
        apply_frequency_offset(apply_frequency_offset(w, 1.7e8), -1.7e8);
    double err = 0.0;
    for (size_t i = 0; i < n; ++i) err = std::max(err, std::abs(round.pol[0][i] - w.pol[0][i]));
    CHECK(err < 1e-12);

    const ComplexWaveform shifted = apply_frequency_offset(w, 3 * df);
    std::vector<cdouble> spec(shifted.pol[0].begin(), shifted.pol[0].end());
    fft_forward(spec);
    size_t peak = 0;
    for (size_t k = 1; k < n; ++k)
        if (std::abs(spec[k]) > std::abs(spec[peak])) peak = k;
    CHECK(peak == 43);
}
