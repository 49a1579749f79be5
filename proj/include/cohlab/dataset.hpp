// SPDX-License-Identifier: Apache-2.0
//
// Equalizer training corpus: sliding symbol windows whose I/Q scalars are
// expanded into the 32 bits of their single-precision encoding. Each window
// of half-width n yields 2(2n+1) tokens (time-major, I before Q) and a
// two-value target, the transmitted symbol at the window center.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cohlab/txrx.hpp"

namespace cohlab {

struct TokenSequence {
    // one packed binary32 pattern per token, MSB = sign bit = feature 0
    std::vector<uint32_t> tokens;
    double target_i = 0.0;
    double target_q = 0.0;
};

struct TokenDataset {
    std::vector<TokenSequence> sequences;
    int n = 0;  // window half-width, tokens per sequence = 2(2n+1)
    uint64_t source_seed = 0;
    int polarization = 0;      // 0 = x, 1 = y
    double normalization = 1;  // divisor applied to rx symbols before encoding
};

// Bit pattern of the single-precision rounding of x. Throws on non-finite x.
uint32_t float_bits(double x);

// Expand a packed pattern into 32 features, MSB first, each 0.0 or 1.0.
std::array<double, 32> unpack_bits(uint32_t bits);

// The 32 features of float_bits(x), MSB first, each 0.0 or 1.0.
std::array<double, 32> float_to_bits(double x);

// Exact inverse: reassemble features (MSB first) and widen to double.
// Feature values are thresholded at 0.5.
double bits_to_float(const std::array<double, 32>& features);

// Windows over an aligned rx/tx frame pair of equal length L > 2n: one
// sequence per center position t in [n, L-n), so L - 2n sequences. rx
// symbols are scaled to unit average power before encoding and the divisor
// is recorded in the dataset; targets are the tx symbols as given.
TokenDataset build_windows(const SymbolFrame& rx, const SymbolFrame& tx, int n);

// Deterministic permutation (our own Fisher-Yates, portable across standard
// libraries) followed by a fraction / 1-fraction split. 0 < fraction < 1.
std::pair<TokenDataset, TokenDataset> split_shuffle(const TokenDataset& ds, uint64_t seed,
                                                    double fraction);

// FNV-1a over the packed tokens and targets; used to stamp checkpoints.
uint64_t dataset_hash(const TokenDataset& ds);

// Flat little-endian binary layout (documented in the header written to the
// file: magic, version, n, count, seed, polarization, normalization, then
// per sequence the packed tokens and the two targets).
void save_dataset(const TokenDataset& ds, const std::string& path);
TokenDataset load_dataset(const std::string& path);

// Human-readable table for debugging: one row per sequence, tokens in hex.
void export_dataset_text(const TokenDataset& ds, const std::string& path);

}  // namespace cohlab
