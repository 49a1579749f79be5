// SPDX-License-Identifier: Apache-2.0
//
// Receiver DSP chain: chromatic dispersion compensation, digital
// backpropagation, matched filtering, blind-phase-search carrier recovery
// and data-aided constellation alignment. All stages are pure functions.

#pragma once

#include <cstdint>
#include <vector>

#include "cohlab/channel.hpp"
#include "cohlab/txrx.hpp"

namespace cohlab {

struct DspChainConfig {
    enum class Mode { LinearEq, Dbp };
    Mode mode = Mode::LinearEq;
    int dbp_steps_per_span = 10;
    double dbp_nl_scaling = 1.0;  // xi, scales the inverted Kerr coefficient
    int cpr_test_phases = 64;
    int cpr_window = 32;
};

// Frequency-domain inversion of the lossless linear operator over
// total_length: multiplies the spectrum by
// exp(-i (beta2/2) w^2 L - i (beta3/6) w^3 L). Negative L re-applies the
// forward operator, so cdc(L) and cdc(-L) are exact inverses.
ComplexWaveform cdc(const ComplexWaveform& w, const FiberParams& f, double total_length);

// Digital backpropagation: spans in reverse order, amplifier gain divided
// out, then split-step propagation through the inverted fiber (beta2, beta3
// negated, gamma -> -xi*gamma, loss turned into gain) with steps_per_span
// uniform symmetric steps. With steps matched to the forward simulation this
// inverts a noiseless link exactly.
ComplexWaveform dbp(const ComplexWaveform& w, const LinkConfig& link, int steps_per_span,
                    double xi);

// Matched filter output, one frame per polarization. guard symbols at each
// edge (the filter half-support) are dropped from both frames.
struct ReceivedSymbols {
    SymbolFrame x;
    SymbolFrame y;
    int guard = 0;       // symbols removed at each edge
    double scale_x = 1;  // divisor applied to reach unit average power
    double scale_y = 1;
};

// Convolves with the RRC taps, samples at symbol instants offset by
// timing_offset samples, trims shape.span_symbols symbols at each edge and
// normalizes each polarization to unit average power. timing_offset must
// keep every sampled index inside the waveform.
ReceivedSymbols matched_filter_downsample(const ComplexWaveform& w, const PulseShape& shape,
                                          int timing_offset = 0);

struct CprResult {
    SymbolFrame frame;
    std::vector<double> phase;      // applied (unwrapped) estimate per symbol
    std::vector<double> raw_phase;  // winning test phase, in [-pi/4, pi/4)
};

// Blind phase search over n_test_phases candidates spanning [-pi/4, pi/4).
// Per symbol, the candidate minimizing the distance to the nearest 16QAM
// point summed over a centered window wins; the track is unwrapped modulo
// pi/2 before being applied. The residual quadrant ambiguity is left to
// align_constellation.
CprResult cpr_bps(const SymbolFrame& frame, int n_test_phases, int window);

struct AlignResult {
    SymbolFrame frame;
    int rotation_quarter = 0;  // applied rotation, multiples of pi/2
    bool conjugated = false;
    long delay = 0;  // symbols the input lags the reference
    bool ambiguous = false;
};

// Data-aided ambiguity resolution: tries the four pi/2 rotations with and
// without conjugation, scores each candidate by the peak real part of its
// cyclic cross-correlation with the reference, applies the winner and the
// corresponding cyclic delay. ambiguous is set when the runner-up candidate
// scores within 1% of the winner.
AlignResult align_constellation(const SymbolFrame& frame, const SymbolFrame& reference);

// Data-aided FFT-peak frequency offset estimate in Hz: locates the spectral
// peak of rx * conj(ref) sampled at symbol_rate. Resolution is
// symbol_rate / frame length.
double estimate_frequency_offset(const SymbolFrame& rx, const SymbolFrame& ref,
                                 double symbol_rate);

}  // namespace cohlab
