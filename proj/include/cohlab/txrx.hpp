// SPDX-License-Identifier: Apache-2.0
//
// Transmitter side of the coherent link: seeded bit generation, Gray-coded
// 16QAM mapping, root-raised-cosine pulse shaping and laser impairments.
//
// Unit conventions (SI throughout the core): time s, power W, frequency Hz,
// wavelength m. Engineering units (km, dBm, GBaud) exist only at the config
// boundary.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace cohlab {

using cdouble = std::complex<double>;

// Ordered bit sequence. Regenerating from the same seed is bit-identical.
struct BitStream {
    std::vector<uint8_t> bits;  // values 0/1
    uint64_t seed = 0;
};

enum class Modulation { Qam16 };

// Complex symbols at unit average power.
struct SymbolFrame {
    std::vector<cdouble> symbols;
    Modulation modulation = Modulation::Qam16;
    size_t size() const { return symbols.size(); }
};

// Sampled complex baseband field, one buffer per polarization (x, y).
// Amplitudes are in sqrt(W); single-polarization signals keep pol[1] at zero
// with matching length.
struct ComplexWaveform {
    std::array<std::vector<cdouble>, 2> pol;
    double sample_rate = 0.0;            // Hz
    double center_wavelength = 1550e-9;  // m
    size_t size() const { return pol[0].size(); }
    double dt() const { return 1.0 / sample_rate; }
    // mean of |sample|^2 summed over both polarizations, W
    double mean_power() const;
};

// Root-raised-cosine shaping parameters. Taps are real, even-symmetric and
// unit-energy normalized; full support is 2*span_symbols*sps + 1 samples.
struct PulseShape {
    double rolloff = 0.18;
    int sps = 8;            // samples per symbol
    int span_symbols = 16;  // filter half-support in symbols
};

// Deterministic bit source: bits are drawn LSB-first from successive
// std::mt19937_64 outputs, which makes the stream portable across platforms.
// n_bits must be > 0.
BitStream prbs_generate(uint64_t seed, size_t n_bits);

// Gray-coded 16QAM. Four bits (b0 b1 b2 b3) map as I <- (b0 b1), Q <- (b2 b3)
// with the per-axis Gray code 00->-3, 01->-1, 11->+1, 10->+3, then scaled by
// 1/sqrt(10) for unit average power. Bit count must be a multiple of 4.
SymbolFrame qam16_map(const BitStream& bits);

// Minimum-distance decision to the nearest constellation point, then the
// inverse Gray table. Ties go to the smaller real part, then smaller
// imaginary part.
BitStream qam16_demap(const SymbolFrame& frame);

// The 16 ideal constellation points (unit average power), indexed by the
// 4-bit Gray label.
const std::array<cdouble, 16>& qam16_constellation();

// Nearest ideal point under the documented tie rule.
cdouble qam16_nearest(cdouble v);

// Closed-form RRC impulse response sampled at sps points per symbol,
// normalized to unit energy. Throws if rolloff is outside [0, 1].
std::vector<double> rrc_taps(const PulseShape& shape);

// Zero-stuffed upsampling followed by RRC filtering (linear convolution,
// center-cropped so sample k*sps lines up with symbol k). Both polarizations
// are shaped independently and then scaled together so the total mean power
// equals launch_power_w. Pass an empty y frame for single-polarization use.
ComplexWaveform shape_pulse(const SymbolFrame& x, const SymbolFrame& y,
                            const PulseShape& shape, double symbol_rate,
                            double launch_power_w,
                            double center_wavelength = 1550e-9);

// Multiplies both polarizations by e^{j theta_k} where theta is a Wiener
// process with increment variance 2*pi*linewidth*dt (one laser, one phase).
ComplexWaveform apply_laser_phase_noise(const ComplexWaveform& w, double linewidth_hz,
                                        uint64_t rng_seed);

// Multiplies by e^{j 2 pi offset t_k}.
ComplexWaveform apply_frequency_offset(const ComplexWaveform& w, double offset_hz);

}  // namespace cohlab
