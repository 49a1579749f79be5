// SPDX-License-Identifier: Apache-2.0

#include "cohlab/txrx.hpp"

#include <cmath>
#include <stdexcept>

#include "cohlab/rng.hpp"

namespace cohlab {

double ComplexWaveform::mean_power() const {
    if (pol[0].empty()) return 0.0;
    double acc = 0.0;
    for (const auto& p : pol)
        for (const auto& v : p) acc += std::norm(v);
    return acc / static_cast<double>(pol[0].size());
}

BitStream prbs_generate(uint64_t seed, size_t n_bits) {
    if (n_bits == 0) throw std::invalid_argument("prbs_generate: n_bits must be > 0");
    BitStream out;
    out.seed = seed;
    out.bits.resize(n_bits);
    std::mt19937_64 eng(seed);
    uint64_t word = 0;
    int avail = 0;
    for (size_t i = 0; i < n_bits; ++i) {
        if (avail == 0) {
            word = eng();
            avail = 64;
        }
        out.bits[i] = static_cast<uint8_t>(word & 1u);
        word >>= 1;
        --avail;
    }
    return out;
}

namespace {

// Per-axis Gray code on the two bits selecting each coordinate.
constexpr double kGrayLevel[4] = {-3.0, -1.0, +1.0, +3.0};  // indexed by 00,01,11,10 below

int gray2_to_index(int b_hi, int b_lo) {
    // 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
    if (b_hi == 0) return b_lo == 0 ? 0 : 1;
    return b_lo == 1 ? 2 : 3;
}

void index_to_gray2(int idx, int& b_hi, int& b_lo) {
    switch (idx) {
        case 0: b_hi = 0; b_lo = 0; break;
        case 1: b_hi = 0; b_lo = 1; break;
        case 2: b_hi = 1; b_lo = 1; break;
        default: b_hi = 1; b_lo = 0; break;
    }
}

const double kQamScale = 1.0 / std::sqrt(10.0);

int level_index(double u) {
    // u in units of the unscaled grid; ties toward the smaller coordinate
    if (u <= -2.0) return 0;
    if (u <= 0.0) return 1;
    if (u <= 2.0) return 2;
    return 3;
}

}  // namespace

const std::array<cdouble, 16>& qam16_constellation() {
    static const std::array<cdouble, 16> table = [] {
        std::array<cdouble, 16> t;
        for (int label = 0; label < 16; ++label) {
            const int b0 = (label >> 3) & 1, b1 = (label >> 2) & 1;
            const int b2 = (label >> 1) & 1, b3 = label & 1;
            const double i = kGrayLevel[gray2_to_index(b0, b1)];
            const double q = kGrayLevel[gray2_to_index(b2, b3)];
            t[label] = cdouble(i, q) * kQamScale;
        }
        return t;
    }();
    return table;
}

SymbolFrame qam16_map(const BitStream& bits) {
    if (bits.bits.size() % 4 != 0)
        throw std::invalid_argument("qam16_map: bit count must be a multiple of 4");
    const auto& table = qam16_constellation();
    SymbolFrame frame;
    frame.modulation = Modulation::Qam16;
    frame.symbols.resize(bits.bits.size() / 4);
    for (size_t s = 0; s < frame.symbols.size(); ++s) {
        const int label = (bits.bits[4 * s] << 3) | (bits.bits[4 * s + 1] << 2) |
                          (bits.bits[4 * s + 2] << 1) | bits.bits[4 * s + 3];
        frame.symbols[s] = table[label];
    }
    return frame;
}

cdouble qam16_nearest(cdouble v) {
    const double i = kGrayLevel[level_index(v.real() / kQamScale)];
    const double q = kGrayLevel[level_index(v.imag() / kQamScale)];
    return cdouble(i, q) * kQamScale;
}

BitStream qam16_demap(const SymbolFrame& frame) {
    BitStream out;
    out.bits.resize(frame.symbols.size() * 4);
    for (size_t s = 0; s < frame.symbols.size(); ++s) {
        const cdouble v = frame.symbols[s];
        int b0, b1, b2, b3;
        index_to_gray2(level_index(v.real() / kQamScale), b0, b1);
        index_to_gray2(level_index(v.imag() / kQamScale), b2, b3);
        out.bits[4 * s] = static_cast<uint8_t>(b0);
        out.bits[4 * s + 1] = static_cast<uint8_t>(b1);
        out.bits[4 * s + 2] = static_cast<uint8_t>(b2);
        out.bits[4 * s + 3] = static_cast<uint8_t>(b3);
    }
    return out;
}

std::vector<double> rrc_taps(const PulseShape& shape) {
    if (shape.rolloff < 0.0 || shape.rolloff > 1.0)
        throw std::invalid_argument("rrc_taps: rolloff must be in [0, 1]");
    if (shape.sps < 2) throw std::invalid_argument("rrc_taps: sps must be >= 2");
    if (shape.span_symbols < 1) throw std::invalid_argument("rrc_taps: span_symbols must be >= 1");

    const double beta = shape.rolloff;
    const int half = shape.span_symbols * shape.sps;
    std::vector<double> taps(2 * half + 1);
    for (int k = -half; k <= half; ++k) {
        const double tau = static_cast<double>(k) / shape.sps;  // time in symbols
        double h;
        if (k == 0) {
            h = 1.0 + beta * (4.0 / M_PI - 1.0);
        } else if (beta > 0.0 && std::abs(1.0 - std::pow(4.0 * beta * tau, 2)) < 1e-7) {
            // limit at |tau| = 1/(4 beta)
            h = (beta / std::sqrt(2.0)) *
                ((1.0 + 2.0 / M_PI) * std::sin(M_PI / (4.0 * beta)) +
                 (1.0 - 2.0 / M_PI) * std::cos(M_PI / (4.0 * beta)));
        } else {
            const double num = std::sin(M_PI * tau * (1.0 - beta)) +
                               4.0 * beta * tau * std::cos(M_PI * tau * (1.0 + beta));
            const double den = M_PI * tau * (1.0 - std::pow(4.0 * beta * tau, 2));
            h = num / den;
        }
        taps[k + half] = h;
    }
    double energy = 0.0;
    for (double h : taps) energy += h * h;
    const double scale = 1.0 / std::sqrt(energy);
    for (double& h : taps) h *= scale;
    return taps;
}

namespace {

// Linear convolution of the zero-stuffed symbol train with the taps,
// cropped to the "same" region so sample k*sps corresponds to symbol k.
std::vector<cdouble> shape_one_pol(const std::vector<cdouble>& syms,
                                   const std::vector<double>& taps, int sps) {
    const int n_sym = static_cast<int>(syms.size());
    const int n_out = n_sym * sps;
    const int len = static_cast<int>(taps.size());
    const int delay = (len - 1) / 2;
    std::vector<cdouble> out(n_out, cdouble(0.0, 0.0));
    for (int i = 0; i < n_out; ++i) {
        // contributing symbols k satisfy 0 <= i - k*sps + delay < len;
        // bounds below are a safe superset, the inner check is exact
        int k_lo = (i + delay - len) / sps - 1;
        int k_hi = (i + delay) / sps + 1;
        if (k_lo < 0) k_lo = 0;
        if (k_hi >= n_sym) k_hi = n_sym - 1;
        cdouble acc(0.0, 0.0);
        for (int k = k_lo; k <= k_hi; ++k) {
            const int m = i - k * sps + delay;
            if (m >= 0 && m < len) acc += syms[k] * taps[m];
        }
        out[i] = acc;
    }
    return out;
}

}  // namespace

ComplexWaveform shape_pulse(const SymbolFrame& x, const SymbolFrame& y,
                            const PulseShape& shape, double symbol_rate,
                            double launch_power_w, double center_wavelength) {
    if (x.symbols.empty()) throw std::invalid_argument("shape_pulse: empty frame");
    if (!y.symbols.empty() && y.symbols.size() != x.symbols.size())
        throw std::invalid_argument("shape_pulse: polarization frames must have equal length");
    if (launch_power_w <= 0.0)
        throw std::invalid_argument("shape_pulse: launch power must be > 0");

    const std::vector<double> taps = rrc_taps(shape);
    ComplexWaveform w;
    w.sample_rate = symbol_rate * shape.sps;
    w.center_wavelength = center_wavelength;
    w.pol[0] = shape_one_pol(x.symbols, taps, shape.sps);
    if (y.symbols.empty())
        w.pol[1].assign(w.pol[0].size(), cdouble(0.0, 0.0));
    else
        w.pol[1] = shape_one_pol(y.symbols, taps, shape.sps);

    const double p_actual = w.mean_power();
    const double scale = std::sqrt(launch_power_w / p_actual);
    for (auto& p : w.pol)
        for (auto& v : p) v *= scale;
    return w;
}

ComplexWaveform apply_laser_phase_noise(const ComplexWaveform& w, double linewidth_hz,
                                        uint64_t rng_seed) {
    if (linewidth_hz < 0.0)
        throw std::invalid_argument("apply_laser_phase_noise: linewidth must be >= 0");
    if (linewidth_hz == 0.0) return w;
    ComplexWaveform out = w;
    const double sigma = std::sqrt(2.0 * M_PI * linewidth_hz * w.dt());
    GaussianSampler rng(rng_seed);
    double theta = 0.0;
    for (size_t k = 0; k < out.size(); ++k) {
        if (k > 0) theta += sigma * rng.normal();
        const cdouble rot = std::polar(1.0, theta);
        out.pol[0][k] *= rot;
        out.pol[1][k] *= rot;
    }
    return out;
}

ComplexWaveform apply_frequency_offset(const ComplexWaveform& w, double offset_hz) {
    if (offset_hz == 0.0) return w;
    ComplexWaveform out = w;
    const double dt = w.dt();
    for (size_t k = 0; k < out.size(); ++k) {
        const cdouble rot = std::polar(1.0, 2.0 * M_PI * offset_hz * dt * static_cast<double>(k));
        out.pol[0][k] *= rot;
        out.pol[1][k] *= rot;
    }
    return out;
}

}  // namespace cohlab
