// SPDX-License-Identifier: Apache-2.0
//
// Thin FFTW3 wrapper. Plans are cached per size and created with
// FFTW_ESTIMATE only, so the plan choice (and hence the transform's exact
// floating point result) does not depend on runtime measurements. Plan
// creation is serialized; fftw_execute on distinct plans is thread safe.

#pragma once

#include <complex>
#include <vector>

namespace cohlab {

// In-place forward DFT, sum_n x[n] e^{-i 2 pi k n / N}. Unnormalized.
void fft_forward(std::vector<std::complex<double>>& data);

// In-place inverse DFT, includes the 1/N factor.
void fft_inverse(std::vector<std::complex<double>>& data);

// FFT sample frequencies in cycles per sample: 0, 1/N, ..., -1/N.
std::vector<double> fft_freq(size_t n);

bool is_power_of_two(size_t n);

}  // namespace cohlab
