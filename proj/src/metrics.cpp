// SPDX-License-Identifier: Apache-2.0

#include "cohlab/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cohlab {

namespace {

// Rational approximation of the inverse standard normal CDF (relative error
// about 1e-9), used only to seed the Newton refinement below.
double norm_inv(double p) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double erfc_inv(double y) {
    if (!(y > 0.0 && y < 2.0)) throw std::invalid_argument("erfc_inv: argument outside (0, 2)");
    // erfc(t) = 2 Phi(-t sqrt(2))  =>  t = -Phi^-1(y/2) / sqrt(2)
    double t = -norm_inv(y / 2.0) / std::sqrt(2.0);
    for (int i = 0; i < 3; ++i) {
        const double deriv = -2.0 / std::sqrt(M_PI) * std::exp(-t * t);
        if (deriv == 0.0) break;
        t -= (std::erfc(t) - y) / deriv;
    }
    return t;
}

double q_factor_db(double ber) {
    if (!(ber > 0.0 && ber < 0.5))
        throw std::invalid_argument("q_factor_db: ber must be in (0, 0.5)");
    return 20.0 * std::log10(std::sqrt(2.0) * erfc_inv(2.0 * ber));
}

double evm_percent(const SymbolFrame& rx, const SymbolFrame& ref) {
    if (rx.size() != ref.size() || rx.size() == 0)
        throw std::invalid_argument("evm_percent: lengths differ or empty");
    double err = 0.0, pwr = 0.0;
    for (size_t k = 0; k < rx.size(); ++k) {
        err += std::norm(rx.symbols[k] - ref.symbols[k]);
        pwr += std::norm(ref.symbols[k]);
    }
    if (pwr <= 0.0) throw std::invalid_argument("evm_percent: reference has zero power");
    return std::sqrt(err / pwr) * 100.0;
}

MetricsReport count_errors(const BitStream& tx_bits, const BitStream& rx_bits,
                           const SymbolFrame& tx_syms, const SymbolFrame& rx_syms) {
    if (tx_bits.bits.size() != rx_bits.bits.size())
        throw std::invalid_argument("count_errors: bit stream lengths differ");
    if (tx_syms.size() != rx_syms.size())
        throw std::invalid_argument("count_errors: symbol frame lengths differ");
    if (tx_bits.bits.empty() || tx_syms.size() == 0)
        throw std::invalid_argument("count_errors: empty input");

    MetricsReport r;
    r.n_bits = tx_bits.bits.size();
    r.n_symbols = tx_syms.size();

    size_t bit_err = 0;
    for (size_t k = 0; k < r.n_bits; ++k)
        if (tx_bits.bits[k] != rx_bits.bits[k]) ++bit_err;
    size_t sym_err = 0;
    for (size_t k = 0; k < r.n_symbols; ++k)
        if (qam16_nearest(tx_syms.symbols[k]) != qam16_nearest(rx_syms.symbols[k])) ++sym_err;

    r.ber = static_cast<double>(bit_err) / static_cast<double>(r.n_bits);
    r.ser = static_cast<double>(sym_err) / static_cast<double>(r.n_symbols);
    r.evm_pct = evm_percent(rx_syms, tx_syms);

    if (bit_err == 0) {
        r.ber_is_floor = true;
        r.q_db = q_factor_db(1.0 / (2.0 * static_cast<double>(r.n_bits)));
    } else if (r.ber < 0.5) {
        r.q_db = q_factor_db(r.ber);
    } else {
        r.q_db = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

}  // namespace cohlab
