// SPDX-License-Identifier: Apache-2.0

#include "cohlab/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cohlab/fft.hpp"
#include "cohlab/rng.hpp"

namespace cohlab {

double derive_gamma(double n2_m2_per_w, double a_eff_m2, double wavelength_m) {
    if (n2_m2_per_w < 0.0 || a_eff_m2 <= 0.0 || wavelength_m <= 0.0)
        throw std::invalid_argument("derive_gamma: inputs must be positive");
    return 2.0 * M_PI * n2_m2_per_w / (wavelength_m * a_eff_m2);
}

double attenuation_to_alpha(double db_per_km) {
    return db_per_km * std::log(10.0) / 10.0 / 1000.0;
}

double dispersion_to_beta2(double d_ps_nm_km, double wavelength_m) {
    // ps/(nm km) = 1e-12 s / (1e-9 m * 1e3 m) = 1e-6 s/m^2
    const double d_si = d_ps_nm_km * 1e-6;
    return -d_si * wavelength_m * wavelength_m / (2.0 * M_PI * kSpeedOfLight);
}

FiberParams fiber_from_engineering(const FiberEngineering& e) {
    FiberParams f;
    const double lambda = e.wavelength_nm * 1e-9;
    f.alpha = attenuation_to_alpha(e.attenuation_db_km);
    f.beta2 = dispersion_to_beta2(e.dispersion_ps_nm_km, lambda);
    f.beta3 = e.beta3_ps3_km * 1e-39;  // ps^3/km -> s^3/m
    f.gamma = derive_gamma(e.n2_m2_per_w, e.core_area_um2 * 1e-12, lambda);
    f.length = e.span_km * 1e3;
    return f;
}

namespace {

// Frequency-domain factor for a linear step of length h.
std::vector<cdouble> linear_step_factor(size_t n, double sample_rate,
                                        const FiberParams& f, double h) {
    std::vector<cdouble> factor(n);
    const std::vector<double> freq = fft_freq(n);
    for (size_t k = 0; k < n; ++k) {
        const double w = 2.0 * M_PI * freq[k] * sample_rate;
        const double phase = (f.beta2 / 2.0) * w * w * h + (f.beta3 / 6.0) * w * w * w * h;
        const double amp = std::exp(-f.alpha / 2.0 * h);
        factor[k] = std::polar(amp, phase);
    }
    return factor;
}

void apply_spectrum_factor(std::vector<cdouble>& x, const std::vector<cdouble>& factor) {
    fft_forward(x);
    for (size_t k = 0; k < x.size(); ++k) x[k] *= factor[k];
    fft_inverse(x);
}

}  // namespace

ComplexWaveform ssfm_propagate(const ComplexWaveform& w, const FiberParams& f,
                               double step, PolarizationModel pol_model) {
    if (step <= 0.0) throw std::invalid_argument("ssfm_propagate: step must be > 0");
    if (f.length <= 0.0) throw std::invalid_argument("ssfm_propagate: length must be > 0");
    return ssfm_propagate_steps(w, f, static_cast<int>(std::ceil(f.length / step)), pol_model);
}

ComplexWaveform ssfm_propagate_steps(const ComplexWaveform& w, const FiberParams& f,
                                     int n_steps, PolarizationModel pol_model) {
    if (n_steps < 1) throw std::invalid_argument("ssfm_propagate: need at least one step");
    if (f.length <= 0.0) throw std::invalid_argument("ssfm_propagate: length must be > 0");
    if (!is_power_of_two(w.size()))
        throw std::invalid_argument("ssfm_propagate: waveform length must be a power of two");
    if (w.pol[0].size() != w.pol[1].size())
        throw std::invalid_argument("ssfm_propagate: polarization buffers differ in length");

    const double h = f.length / n_steps;
    const size_t n = w.size();

    const std::vector<cdouble> half = linear_step_factor(n, w.sample_rate, f, h / 2.0);
    const std::vector<cdouble> full = linear_step_factor(n, w.sample_rate, f, h);

    const double g = (pol_model == PolarizationModel::Manakov) ? (8.0 / 9.0) * f.gamma : f.gamma;

    ComplexWaveform out = w;
    auto& px = out.pol[0];
    auto& py = out.pol[1];

    apply_spectrum_factor(px, half);
    apply_spectrum_factor(py, half);

    for (int s = 0; s < n_steps; ++s) {
        double probe = 0.0;
        if (g != 0.0) {
            if (pol_model == PolarizationModel::Manakov) {
                for (size_t k = 0; k < n; ++k) {
                    const double intensity = std::norm(px[k]) + std::norm(py[k]);
                    const cdouble rot = std::polar(1.0, g * intensity * h);
                    px[k] *= rot;
                    py[k] *= rot;
                    probe += intensity;
                }
            } else {
                for (size_t k = 0; k < n; ++k) {
                    const double ix = std::norm(px[k]);
                    const double iy = std::norm(py[k]);
                    px[k] *= std::polar(1.0, g * ix * h);
                    py[k] *= std::polar(1.0, g * iy * h);
                    probe += ix + iy;
                }
            }
        } else {
            for (size_t k = 0; k < n; ++k) probe += std::norm(px[k]) + std::norm(py[k]);
        }
        if (!std::isfinite(probe))
            throw std::runtime_error("ssfm_propagate: field non-finite after " +
                                     std::to_string((s + 0.5) * h) + " m");
        const bool last = (s == n_steps - 1);
        apply_spectrum_factor(px, last ? half : full);
        apply_spectrum_factor(py, last ? half : full);
    }
    return out;
}

ComplexWaveform edfa_amplify(const ComplexWaveform& w, const AmplifierParams& a,
                             uint64_t rng_seed) {
    if (a.gain_db < 0.0) throw std::invalid_argument("edfa_amplify: gain must be >= 0 dB");
    const double gain = std::pow(10.0, a.gain_db / 10.0);
    const double field_gain = std::sqrt(gain);

    ComplexWaveform out = w;
    for (auto& p : out.pol)
        for (auto& v : p) v *= field_gain;

    if (!a.ase_enabled) return out;

    const double nu =
        (a.center_frequency > 0.0) ? a.center_frequency : kSpeedOfLight / w.center_wavelength;
    const double nf = std::pow(10.0, a.noise_figure_db / 10.0);
    const double s_ase = (gain - 1.0) * kPlanck * nu * nf / 2.0;  // W/Hz per polarization
    const double sigma2 = s_ase * w.sample_rate;                  // total noise power per sample
    if (sigma2 <= 0.0) return out;
    const double sigma_q = std::sqrt(sigma2 / 2.0);  // per quadrature

    const char* labels[2] = {"ase.x", "ase.y"};
    for (int p = 0; p < 2; ++p) {
        GaussianSampler rng(derive_seed(rng_seed, labels[p]));
        for (auto& v : out.pol[p])
            v += cdouble(sigma_q * rng.normal(), sigma_q * rng.normal());
    }
    return out;
}

uint64_t link_span_seed(uint64_t link_seed, int span_index) {
    return derive_seed(link_seed, "span", static_cast<uint64_t>(span_index));
}

ComplexWaveform link_propagate(const ComplexWaveform& w, const LinkConfig& link,
                               uint64_t rng_seed) {
    if (link.n_spans < 1) throw std::invalid_argument("link_propagate: n_spans must be >= 1");
    if (link.ssfm_step > link.span.length)
        throw std::invalid_argument("link_propagate: ssfm_step exceeds span length");
    ComplexWaveform out = w;
    for (int s = 0; s < link.n_spans; ++s) {
        out = ssfm_propagate(out, link.span, link.ssfm_step, link.polarization_model);
        out = edfa_amplify(out, link.amplifier, link_span_seed(rng_seed, s));
    }
    return out;
}

}  // namespace cohlab
