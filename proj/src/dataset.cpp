// SPDX-License-Identifier: Apache-2.0

#include "cohlab/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cohlab/rng.hpp"

namespace cohlab {

uint32_t float_bits(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("float_bits: non-finite input");
    return std::bit_cast<uint32_t>(static_cast<float>(x));
}

std::array<double, 32> unpack_bits(uint32_t bits) {
    std::array<double, 32> f;
    for (int i = 0; i < 32; ++i) f[i] = ((bits >> (31 - i)) & 1u) ? 1.0 : 0.0;
    return f;
}

std::array<double, 32> float_to_bits(double x) { return unpack_bits(float_bits(x)); }

double bits_to_float(const std::array<double, 32>& features) {
    uint32_t u = 0;
    for (int i = 0; i < 32; ++i)
        if (features[i] > 0.5) u |= 1u << (31 - i);
    return static_cast<double>(std::bit_cast<float>(u));
}

TokenDataset build_windows(const SymbolFrame& rx, const SymbolFrame& tx, int n) {
    if (n < 0) throw std::invalid_argument("build_windows: n must be >= 0");
    const size_t len = rx.size();
    if (len != tx.size()) throw std::invalid_argument("build_windows: rx and tx lengths differ");
    if (len <= 2 * static_cast<size_t>(n))
        throw std::invalid_argument("build_windows: frame shorter than window");

    TokenDataset ds;
    ds.n = n;
    double pwr = 0.0;
    for (const auto& v : rx.symbols) pwr += std::norm(v);
    pwr /= static_cast<double>(len);
    ds.normalization = pwr > 0.0 ? std::sqrt(pwr) : 1.0;

    const size_t count = len - 2 * static_cast<size_t>(n);
    ds.sequences.resize(count);
    for (size_t t = 0; t < count; ++t) {
        TokenSequence& s = ds.sequences[t];
        s.tokens.reserve(2 * (2 * n + 1));
        for (int d = -n; d <= n; ++d) {
            const cdouble v = rx.symbols[t + n + d] / ds.normalization;
            s.tokens.push_back(float_bits(v.real()));
            s.tokens.push_back(float_bits(v.imag()));
        }
        s.target_i = tx.symbols[t + n].real();
        s.target_q = tx.symbols[t + n].imag();
    }
    return ds;
}

std::pair<TokenDataset, TokenDataset> split_shuffle(const TokenDataset& ds, uint64_t seed,
                                                    double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split_shuffle: fraction must be in (0, 1)");
    const size_t count = ds.sequences.size();
    std::vector<size_t> order(count);
    for (size_t i = 0; i < count; ++i) order[i] = i;
    std::mt19937_64 eng(derive_seed(seed, "split"));
    for (size_t i = count; i > 1; --i) {
        const size_t j = static_cast<size_t>(eng() % i);
        std::swap(order[i - 1], order[j]);
    }
    const size_t n_first = static_cast<size_t>(std::llround(fraction * static_cast<double>(count)));

    TokenDataset a, b;
    a.n = b.n = ds.n;
    a.source_seed = b.source_seed = ds.source_seed;
    a.polarization = b.polarization = ds.polarization;
    a.normalization = b.normalization = ds.normalization;
    for (size_t i = 0; i < count; ++i)
        (i < n_first ? a : b).sequences.push_back(ds.sequences[order[i]]);
    return {std::move(a), std::move(b)};
}

uint64_t dataset_hash(const TokenDataset& ds) {
    uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* p, size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix(&ds.n, sizeof(ds.n));
    for (const auto& s : ds.sequences) {
        mix(s.tokens.data(), s.tokens.size() * sizeof(uint32_t));
        mix(&s.target_i, sizeof(double));
        mix(&s.target_q, sizeof(double));
    }
    return h;
}

namespace {
constexpr char kMagic[8] = {'C', 'O', 'H', 'L', 'D', 'S', 'E', 'T'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("load_dataset: truncated file");
    return v;
}
}  // namespace

void save_dataset(const TokenDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    put(out, kVersion);
    put(out, static_cast<int32_t>(ds.n));
    put(out, static_cast<uint64_t>(ds.sequences.size()));
    put(out, ds.source_seed);
    put(out, static_cast<int32_t>(ds.polarization));
    put(out, ds.normalization);
    for (const auto& s : ds.sequences) {
        out.write(reinterpret_cast<const char*>(s.tokens.data()),
                  static_cast<std::streamsize>(s.tokens.size() * sizeof(uint32_t)));
        put(out, s.target_i);
        put(out, s.target_q);
    }
    if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

TokenDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_dataset: bad magic in " + path);
    if (get<uint32_t>(in) != kVersion)
        throw std::runtime_error("load_dataset: unsupported version in " + path);
    TokenDataset ds;
    ds.n = get<int32_t>(in);
    const uint64_t count = get<uint64_t>(in);
    ds.source_seed = get<uint64_t>(in);
    ds.polarization = get<int32_t>(in);
    ds.normalization = get<double>(in);
    const size_t n_tokens = 2 * (2 * static_cast<size_t>(ds.n) + 1);
    ds.sequences.resize(count);
    for (auto& s : ds.sequences) {
        s.tokens.resize(n_tokens);
        in.read(reinterpret_cast<char*>(s.tokens.data()),
                static_cast<std::streamsize>(n_tokens * sizeof(uint32_t)));
        if (!in) throw std::runtime_error("load_dataset: truncated file");
        s.target_i = get<double>(in);
        s.target_q = get<double>(in);
    }
    return ds;
}

void export_dataset_text(const TokenDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_dataset_text: cannot open " + path);
    out << "# n=" << ds.n << " count=" << ds.sequences.size() << " seed=" << ds.source_seed
        << " pol=" << ds.polarization << " normalization=" << ds.normalization << "\n";
    out << "# tokens (hex, time-major, I before Q) | target_i target_q\n";
    char buf[16];
    for (const auto& s : ds.sequences) {
        for (size_t i = 0; i < s.tokens.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%08x", s.tokens[i]);
            out << (i ? " " : "") << buf;
        }
        out << " | " << s.target_i << " " << s.target_q << "\n";
    }
}

}  // namespace cohlab
