// SPDX-License-Identifier: Apache-2.0

#include "cohlab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace cohlab {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

std::mutex plan_mutex;
std::map<size_t, PlanPair>& plan_cache() {
    static std::map<size_t, PlanPair> cache;
    return cache;
}

// In-place plans on a scratch buffer; FFTW_ESTIMATE keeps planning
// deterministic and leaves the input buffer untouched during planning.
const PlanPair& plans_for(size_t n) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    fftw_complex* buf = fftw_alloc_complex(n);
    if (!buf) throw std::bad_alloc();
    PlanPair p;
    p.fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(buf);
    if (!p.fwd || !p.inv) throw std::runtime_error("fftw plan creation failed");
    return cache.emplace(n, p).first->second;
}

}  // namespace

void fft_forward(std::vector<std::complex<double>>& data) {
    if (data.empty()) return;
    const PlanPair& p = plans_for(data.size());
    fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
}

void fft_inverse(std::vector<std::complex<double>>& data) {
    if (data.empty()) return;
    const PlanPair& p = plans_for(data.size());
    fftw_execute_dft(p.inv, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

std::vector<double> fft_freq(size_t n) {
    std::vector<double> f(n);
    const double step = 1.0 / static_cast<double>(n);
    const size_t half = (n + 1) / 2;  // number of non-negative bins
    for (size_t k = 0; k < half; ++k) f[k] = static_cast<double>(k) * step;
    for (size_t k = half; k < n; ++k)
        f[k] = (static_cast<double>(k) - static_cast<double>(n)) * step;
    return f;
}

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace cohlab
