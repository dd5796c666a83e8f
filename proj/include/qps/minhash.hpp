#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "qps/encoding.hpp"

namespace qps {

// Counter-based randomness: every (seed, i, j) gets its own splitmix64
// stream, so hash variables are identical no matter which entries of a
// vector happen to be populated.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in (0, 1]
    double next_unit() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }
};

inline uint64_t mix_key(uint64_t seed, uint64_t a, uint64_t b) {
    SplitMix64 g(seed ^ (a * 0x9e3779b97f4a7c15ull) ^ (b * 0xc2b2ae3d27d4eb4full));
    return g.next();
}

struct HashSketch {
    uint32_t n_hash = 0;
    uint64_t seed = 0;
    std::vector<std::pair<uint32_t, int64_t>> samples;  // (term index, t)

    bool operator==(const HashSketch&) const = default;
};

// Consistent weighted sampling (Ioffe).  Per hash i and positive entry j:
// t = floor(log x / r + beta), y = exp(r (t - beta)), z = y exp(r),
// a = c / z; the sample is the (j, t) attaining the minimum a.
inline HashSketch weighted_minhash(const TermVector& v, uint32_t n_hash, uint64_t seed) {
    std::vector<uint32_t> support;
    for (uint32_t j = 0; j < v.values.size(); ++j)
        if (v.values[j] > 0.0) support.push_back(j);
    if (support.empty()) throw DataError("weighted_minhash requires a nonzero vector");

    HashSketch sk;
    sk.n_hash = n_hash;
    sk.seed = seed;
    sk.samples.resize(n_hash);
    for (uint32_t i = 0; i < n_hash; ++i) {
        double best_a = std::numeric_limits<double>::infinity();
        uint32_t best_j = 0;
        int64_t best_t = 0;
        for (uint32_t j : support) {
            SplitMix64 g(mix_key(seed, i, j));
            double r = -std::log(g.next_unit()) - std::log(g.next_unit());  // Gamma(2,1)
            double c = -std::log(g.next_unit()) - std::log(g.next_unit());
            double beta = g.next_unit();
            double t = std::floor(std::log(v.values[j]) / r + beta);
            double y = std::exp(r * (t - beta));
            double z = y * std::exp(r);
            double a = c / z;
            if (a < best_a) {
                best_a = a;
                best_j = j;
                best_t = static_cast<int64_t>(t);
            }
        }
        sk.samples[i] = {best_j, best_t};
    }
    return sk;
}

// Plain MinHash over the support of a binary vector; the permutation is
// simulated by hashing the term index.
inline HashSketch minhash_unweighted(const TermVector& v, uint32_t n_hash, uint64_t seed) {
    std::vector<uint32_t> support;
    for (uint32_t j = 0; j < v.values.size(); ++j)
        if (v.values[j] > 0.0) support.push_back(j);
    if (support.empty()) throw DataError("minhash_unweighted requires a nonempty support");

    HashSketch sk;
    sk.n_hash = n_hash;
    sk.seed = seed;
    sk.samples.resize(n_hash);
    for (uint32_t i = 0; i < n_hash; ++i) {
        uint64_t best_h = ~0ull;
        uint32_t best_j = 0;
        for (uint32_t j : support) {
            uint64_t h = mix_key(seed, i, j);
            if (h < best_h) {
                best_h = h;
                best_j = j;
            }
        }
        sk.samples[i] = {best_j, static_cast<int64_t>(best_h >> 1)};
    }
    return sk;
}

// Fraction of positions whose (index, t) pairs differ.
inline double sketch_distance(const HashSketch& a, const HashSketch& b) {
    if (a.n_hash != b.n_hash || a.seed != b.seed)
        throw DataError("sketch parameters mismatch");
    uint32_t diff = 0;
    for (uint32_t i = 0; i < a.n_hash; ++i)
        if (a.samples[i] != b.samples[i]) ++diff;
    return static_cast<double>(diff) / static_cast<double>(a.n_hash);
}

// Same comparison with an early exit once `limit` differing positions are
// exceeded; returns n_hash+1 sentinel in that case.
inline uint32_t sketch_diff_bounded(const HashSketch& a, const HashSketch& b,
                                    uint32_t limit) {
    uint32_t diff = 0;
    for (uint32_t i = 0; i < a.n_hash; ++i) {
        if (a.samples[i] != b.samples[i]) {
            if (++diff > limit) return a.n_hash + 1;
        }
    }
    return diff;
}

// --- sketch store (little-endian binary) -----------------------------------

inline constexpr uint32_t kSketchMagic = 0x51505348;  // "QPSH"

inline void save_sketches(const std::string& path, const std::vector<HashSketch>& sketches,
                          uint32_t n_hash, uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write sketch store: " + path);
    uint64_t count = sketches.size();
    out.write(reinterpret_cast<const char*>(&kSketchMagic), 4);
    out.write(reinterpret_cast<const char*>(&n_hash), 4);
    out.write(reinterpret_cast<const char*>(&seed), 8);
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& sk : sketches) {
        for (auto [idx, t] : sk.samples) {
            out.write(reinterpret_cast<const char*>(&idx), 4);
            out.write(reinterpret_cast<const char*>(&t), 8);
        }
    }
}

inline std::vector<HashSketch> load_sketches(const std::string& path, uint32_t* n_hash_out,
                                             uint64_t* seed_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open sketch store: " + path);
    uint32_t magic = 0, n_hash = 0;
    uint64_t seed = 0, count = 0;
    in.read(reinterpret_cast<char*>(&magic), 4);
    in.read(reinterpret_cast<char*>(&n_hash), 4);
    in.read(reinterpret_cast<char*>(&seed), 8);
    in.read(reinterpret_cast<char*>(&count), 8);
    if (!in || magic != kSketchMagic) throw DataError("bad sketch store header: " + path);
    std::vector<HashSketch> sketches(count);
    for (auto& sk : sketches) {
        sk.n_hash = n_hash;
        sk.seed = seed;
        sk.samples.resize(n_hash);
        for (auto& [idx, t] : sk.samples) {
            in.read(reinterpret_cast<char*>(&idx), 4);
            in.read(reinterpret_cast<char*>(&t), 8);
        }
    }
    if (!in) throw DataError("truncated sketch store: " + path);
    if (n_hash_out) *n_hash_out = n_hash;
    if (seed_out) *seed_out = seed;
    return sketches;
}

}  // namespace qps
