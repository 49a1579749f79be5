// SPDX-License-Identifier: Apache-2.0
//
// Error counting and quality metrics: BER, SER, EVM and the Q factor
// Q = 20 log10( sqrt(2) erfc^-1(2 BER) ).

#pragma once

#include "cohlab/txrx.hpp"

namespace cohlab {

struct MetricsReport {
    size_t n_symbols = 0;
    size_t n_bits = 0;
    double ser = 0.0;
    double ber = 0.0;
    double q_db = 0.0;
    double evm_pct = 0.0;
    // set when ber was 0 and q_db reports the floor value at ber = 1/(2 n_bits)
    bool ber_is_floor = false;
};

// Inverse of std::erfc on (0, 2): erfc(erfc_inv(y)) = y. Rational initial
// guess refined by Newton iterations on the forward erfc; relative error
// below 1e-10 over the full domain.
double erfc_inv(double y);

// Q factor in dB for a raw bit error rate in (0, 0.5). Outside that range the
// expression is undefined and the call throws.
double q_factor_db(double ber);

// sqrt( mean|rx - ref|^2 / mean|ref|^2 ) * 100. Lengths must match.
double evm_percent(const SymbolFrame& rx, const SymbolFrame& ref);

// Exact mismatch counts. Symbols are hard-decided to the nearest ideal
// 16QAM point before comparison, so rx_syms may be soft values; EVM uses the
// soft values directly. A zero-error run reports the floor Q at
// ber = 1/(2 n_bits) with ber_is_floor set; ber >= 0.5 leaves q_db as NaN.
MetricsReport count_errors(const BitStream& tx_bits, const BitStream& rx_bits,
                           const SymbolFrame& tx_syms, const SymbolFrame& rx_syms);

}  // namespace cohlab
