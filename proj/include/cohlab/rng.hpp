// SPDX-License-Identifier: Apache-2.0
//
// Seeded randomness for the whole simulator. Every stochastic stage takes an
// explicit 64-bit seed; sub-seeds are derived with derive_seed() so that
// concurrent stages never share generator state and a master seed pins every
// output byte.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cohlab {

// SplitMix64 finalizer. Used both as a mixer for seed derivation and to
// expand one seed into independent stream seeds.
uint64_t splitmix64(uint64_t x);

// Derive an independent sub-seed from (seed, label). Label goes through
// FNV-1a, then both are mixed with SplitMix64. Same inputs, same output.
uint64_t derive_seed(uint64_t seed, std::string_view label);
uint64_t derive_seed(uint64_t seed, std::string_view label, uint64_t index);

// Gaussian sampler on top of std::mt19937_64 (whose output sequence is
// specified by the standard, so streams are portable). The uniform-to-double
// conversion and the Box-Muller transform are written out here instead of
// using std::normal_distribution, which is implementation-defined.
class GaussianSampler {
  public:
    explicit GaussianSampler(uint64_t seed) : eng_(seed) {}

    // Uniform on (0, 1]: 53 random mantissa bits, never exactly 0.
    double uniform();

    // Standard normal via Box-Muller (two uniforms per pair, one cached).
    double normal();

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cohlab
