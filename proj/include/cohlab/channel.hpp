// SPDX-License-Identifier: Apache-2.0
//
// Fiber channel model: symmetric split-step Fourier propagation of the
// scalar/Manakov field equation over a multi-span amplified link.
//
// Conventions, fixed here and relied on by the receiver DSP:
//  - alpha is the POWER attenuation coefficient in 1/m; the field envelope
//    decays as exp(-alpha z / 2).
//  - The linear step multiplies the spectrum by
//      exp( i (beta2/2) w^2 h + i (beta3/6) w^3 h - (alpha/2) h ),
//    w being angular baseband frequency on the FFT grid.
//  - The nonlinear step rotates the field by exp(i g |psi|^2 h); under the
//    Manakov model g = (8/9) gamma and |psi|^2 = |psi_x|^2 + |psi_y|^2.
//  - EDFA ASE is circular complex Gaussian, added per polarization with PSD
//      S_ase = (G - 1) h nu NF / 2   [W/Hz, both quadratures together]
//    over the full simulation bandwidth (= sample rate).

#pragma once

#include <cstdint>

#include "cohlab/txrx.hpp"

namespace cohlab {

// Physical constants (SI)
inline constexpr double kSpeedOfLight = 299792458.0;        // m/s
inline constexpr double kPlanck = 6.62607015e-34;           // J s

struct FiberParams {
    double alpha = 0.0;   // power attenuation, 1/m
    double beta2 = 0.0;   // group velocity dispersion, s^2/m
    double beta3 = 0.0;   // third-order dispersion, s^3/m
    double gamma = 0.0;   // Kerr coefficient, 1/(W m)
    double length = 0.0;  // m
};

struct AmplifierParams {
    double gain_db = 0.0;
    double noise_figure_db = 4.5;
    double center_frequency = 0.0;  // Hz; 0 means take it from the waveform
    bool ase_enabled = true;        // test hook: false gives pure gain
};

enum class PolarizationModel { IndependentScalar, Manakov };

struct LinkConfig {
    FiberParams span;
    int n_spans = 1;
    AmplifierParams amplifier;
    double ssfm_step = 100.0;  // m
    PolarizationModel polarization_model = PolarizationModel::Manakov;
};

// gamma = 2 pi n2 / (lambda A_eff); all arguments must be > 0.
double derive_gamma(double n2_m2_per_w, double a_eff_m2, double wavelength_m);

// 0.2 dB/km -> 0.2 ln(10)/10 per km, returned per meter.
double attenuation_to_alpha(double db_per_km);

// beta2 = -D lambda^2 / (2 pi c); D in ps/(nm km), result in s^2/m.
double dispersion_to_beta2(double d_ps_nm_km, double wavelength_m);

// Engineering-unit bundle for the config boundary.
struct FiberEngineering {
    double span_km = 80.0;
    double attenuation_db_km = 0.2;
    double dispersion_ps_nm_km = 17.0;
    double beta3_ps3_km = 0.0;
    double n2_m2_per_w = 2.6e-20;
    double core_area_um2 = 80.0;
    double wavelength_nm = 1550.0;
};
FiberParams fiber_from_engineering(const FiberEngineering& e);

// Symmetric split-step solution over f.length. The step is the target step
// size; the actual step is f.length / ceil(f.length / step) so the span is
// covered by uniform steps. Waveform length must be a power of two.
// Throws if the field turns non-finite, reporting the distance reached.
ComplexWaveform ssfm_propagate(const ComplexWaveform& w, const FiberParams& f,
                               double step, PolarizationModel pol_model);

// Same solver with the uniform step count given directly (used by digital
// backpropagation, where the count must match the forward run exactly).
ComplexWaveform ssfm_propagate_steps(const ComplexWaveform& w, const FiberParams& f,
                                     int n_steps, PolarizationModel pol_model);

// Flat gain plus seeded ASE (independent streams per polarization).
ComplexWaveform edfa_amplify(const ComplexWaveform& w, const AmplifierParams& a,
                             uint64_t rng_seed);

// Per-span sub-seed used by link_propagate; exposed so span-by-span
// composition can be reproduced exactly.
uint64_t link_span_seed(uint64_t link_seed, int span_index);

// n_spans times (ssfm_propagate, edfa_amplify) with per-span sub-seeds.
ComplexWaveform link_propagate(const ComplexWaveform& w, const LinkConfig& link,
                               uint64_t rng_seed);

}  // namespace cohlab
