// SPDX-License-Identifier: Apache-2.0

#include "cohlab/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cohlab/fft.hpp"

namespace cohlab {

ComplexWaveform cdc(const ComplexWaveform& w, const FiberParams& f, double total_length) {
    if (!is_power_of_two(w.size()))
        throw std::invalid_argument("cdc: waveform length must be a power of two");
    const size_t n = w.size();
    const std::vector<double> freq = fft_freq(n);
    std::vector<cdouble> factor(n);
    for (size_t k = 0; k < n; ++k) {
        const double omega = 2.0 * M_PI * freq[k] * w.sample_rate;
        const double phase = -(f.beta2 / 2.0) * omega * omega * total_length -
                             (f.beta3 / 6.0) * omega * omega * omega * total_length;
        factor[k] = std::polar(1.0, phase);
    }
    ComplexWaveform out = w;
    for (auto& p : out.pol) {
        fft_forward(p);
        for (size_t k = 0; k < n; ++k) p[k] *= factor[k];
        fft_inverse(p);
    }
    return out;
}

ComplexWaveform dbp(const ComplexWaveform& w, const LinkConfig& link, int steps_per_span,
                    double xi) {
    if (steps_per_span < 1)
        throw std::invalid_argument("dbp: steps_per_span must be >= 1");
    if (link.n_spans < 1) throw std::invalid_argument("dbp: n_spans must be >= 1");
    const double gain = std::pow(10.0, link.amplifier.gain_db / 10.0);
    const double inv_field_gain = 1.0 / std::sqrt(gain);

    FiberParams inv = link.span;
    inv.alpha = -inv.alpha;
    inv.beta2 = -inv.beta2;
    inv.beta3 = -inv.beta3;
    inv.gamma = -xi * link.span.gamma;

    ComplexWaveform out = w;
    for (int s = link.n_spans - 1; s >= 0; --s) {
        for (auto& p : out.pol)
            for (auto& v : p) v *= inv_field_gain;
        try {
            out = ssfm_propagate_steps(out, inv, steps_per_span, link.polarization_model);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("dbp: span " + std::to_string(s) + ": " + e.what());
        }
    }
    return out;
}

ReceivedSymbols matched_filter_downsample(const ComplexWaveform& w, const PulseShape& shape,
                                          int timing_offset) {
    const std::vector<double> taps = rrc_taps(shape);
    const long len = static_cast<long>(taps.size());
    const long delay = (len - 1) / 2;
    const long n = static_cast<long>(w.size());
    if (n == 0) throw std::invalid_argument("matched_filter_downsample: empty waveform");
    if (n % shape.sps != 0)
        throw std::invalid_argument("matched_filter_downsample: length not a multiple of sps");
    if (timing_offset < 0 || timing_offset >= shape.sps)
        throw std::invalid_argument("matched_filter_downsample: timing offset out of range");
    const long n_sym = n / shape.sps;
    const int guard = shape.span_symbols;
    const long n_out = n_sym - 2L * guard;
    if (n_out <= 0)
        throw std::invalid_argument("matched_filter_downsample: waveform shorter than filter guard");

    ReceivedSymbols rx;
    rx.guard = guard;
    double* scales[2] = {&rx.scale_x, &rx.scale_y};
    SymbolFrame* frames[2] = {&rx.x, &rx.y};
    for (int p = 0; p < 2; ++p) {
        const std::vector<cdouble>& src = w.pol[p];
        std::vector<cdouble>& dst = frames[p]->symbols;
        dst.resize(n_out);
        double power = 0.0;
        for (long k = 0; k < n_out; ++k) {
            // sampled "same"-aligned convolution; the guard keeps every tap
            // index inside the buffer, so no boundary handling is needed
            const long center = (k + guard) * shape.sps + timing_offset + delay;
            cdouble acc = 0.0;
            for (long m = 0; m < len; ++m) acc += taps[m] * src[center - m];
            dst[k] = acc;
            power += std::norm(acc);
        }
        power /= static_cast<double>(n_out);
        const double scale = power > 0.0 ? std::sqrt(power) : 1.0;
        *scales[p] = scale;
        if (power > 0.0)
            for (auto& v : dst) v /= scale;
    }
    return rx;
}

CprResult cpr_bps(const SymbolFrame& frame, int n_test_phases, int window) {
    if (n_test_phases < 4)
        throw std::invalid_argument("cpr_bps: need at least 4 test phases");
    if (window < 1) throw std::invalid_argument("cpr_bps: window must be >= 1");
    const size_t n = frame.size();
    CprResult r;
    r.frame.modulation = frame.modulation;
    if (n == 0) return r;

    const int b_count = n_test_phases;
    const double quad = M_PI / 2.0;
    std::vector<double> phases(b_count);
    std::vector<cdouble> rotors(b_count);
    for (int b = 0; b < b_count; ++b) {
        phases[b] = -M_PI / 4.0 + quad * b / b_count;
        rotors[b] = std::polar(1.0, -phases[b]);
    }

    // prefix[b][k+1]-prefix[b][lo]: windowed decision distance per test phase
    std::vector<std::vector<double>> prefix(b_count, std::vector<double>(n + 1, 0.0));
    for (size_t k = 0; k < n; ++k) {
        const cdouble x = frame.symbols[k];
        for (int b = 0; b < b_count; ++b) {
            const cdouble z = x * rotors[b];
            const double d = std::norm(z - qam16_nearest(z));
            prefix[b][k + 1] = prefix[b][k] + d;
        }
    }

    r.raw_phase.resize(n);
    r.phase.resize(n);
    r.frame.symbols.resize(n);
    const long hw = window / 2;
    for (size_t k = 0; k < n; ++k) {
        const size_t lo = (static_cast<long>(k) > hw) ? k - hw : 0;
        const size_t hi = std::min(n - 1, k + static_cast<size_t>(hw));
        int best_b = 0;
        double best_d = prefix[0][hi + 1] - prefix[0][lo];
        for (int b = 1; b < b_count; ++b) {
            const double d = prefix[b][hi + 1] - prefix[b][lo];
            if (d < best_d) {
                best_d = d;
                best_b = b;
            }
        }
        r.raw_phase[k] = phases[best_b];
        double theta = phases[best_b];
        if (k > 0) theta += quad * std::round((r.phase[k - 1] - theta) / quad);
        r.phase[k] = theta;
        r.frame.symbols[k] = frame.symbols[k] * std::polar(1.0, -theta);
    }
    return r;
}

AlignResult align_constellation(const SymbolFrame& frame, const SymbolFrame& reference) {
    const size_t n = frame.size();
    if (n == 0) throw std::invalid_argument("align_constellation: empty frame");
    if (n != reference.size())
        throw std::invalid_argument("align_constellation: frame and reference lengths differ");

    std::vector<cdouble> ref_spec = reference.symbols;
    fft_forward(ref_spec);

    // corr[c][d] = sum_k conj_c(frame[k+d]) * conj(ref[k]), cyclic in d
    std::vector<cdouble> corr[2];
    for (int c = 0; c < 2; ++c) {
        std::vector<cdouble> f = frame.symbols;
        if (c)
            for (auto& v : f) v = std::conj(v);
        fft_forward(f);
        for (size_t k = 0; k < n; ++k) f[k] *= std::conj(ref_spec[k]);
        fft_inverse(f);
        corr[c] = std::move(f);
    }

    double best = -1e300, second = -1e300;
    int best_rot = 0, best_conj = 0;
    size_t best_d = 0;
    for (int c = 0; c < 2; ++c) {
        for (size_t d = 0; d < n; ++d) {
            const cdouble v = corr[c][d];
            // Re(i^rot * v) for rot = 0..3
            const double score[4] = {v.real(), -v.imag(), -v.real(), v.imag()};
            for (int rot = 0; rot < 4; ++rot) {
                if (score[rot] > best) {
                    second = best;
                    best = score[rot];
                    best_rot = rot;
                    best_conj = c;
                    best_d = d;
                } else if (score[rot] > second) {
                    second = score[rot];
                }
            }
        }
    }

    AlignResult res;
    res.rotation_quarter = best_rot;
    res.conjugated = best_conj != 0;
    res.delay = static_cast<long>(best_d);
    if (res.delay > static_cast<long>(n / 2)) res.delay -= static_cast<long>(n);
    res.ambiguous = (best - second) <= 0.01 * std::abs(best);

    const cdouble rotor = std::polar(1.0, M_PI / 2.0 * best_rot);
    res.frame.modulation = frame.modulation;
    res.frame.symbols.resize(n);
    for (size_t k = 0; k < n; ++k) {
        cdouble v = frame.symbols[(k + best_d) % n];
        if (best_conj) v = std::conj(v);
        res.frame.symbols[k] = rotor * v;
    }
    return res;
}

double estimate_frequency_offset(const SymbolFrame& rx, const SymbolFrame& ref,
                                 double symbol_rate) {
    const size_t n = rx.size();
    if (n == 0 || n != ref.size())
        throw std::invalid_argument("estimate_frequency_offset: lengths differ or empty");
    std::vector<cdouble> z(n);
    for (size_t k = 0; k < n; ++k) z[k] = rx.symbols[k] * std::conj(ref.symbols[k]);
    fft_forward(z);
    size_t peak = 0;
    double peak_mag = -1.0;
    for (size_t k = 0; k < n; ++k) {
        const double m = std::norm(z[k]);
        if (m > peak_mag) {
            peak_mag = m;
            peak = k;
        }
    }
    return fft_freq(n)[peak] * symbol_rate;
}

}  // namespace cohlab
