#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "qps/signature.hpp"

namespace qps {

enum class Component : uint8_t { types = 0, ro = 1, ra = 2 };
enum class Representation : uint8_t { tc, tf, ta, btc };

inline const char* to_string(Representation r) {
    switch (r) {
        case Representation::tc: return "tc";
        case Representation::tf: return "tf";
        case Representation::ta: return "ta";
        case Representation::btc: return "btc";
    }
    return "?";
}

// Fixed layout of the concatenated k-mer universe: for each component and
// each k (ascending) one block of |alphabet|^k slots, k-mers enumerated in
// base-|alphabet| order.
struct TermUniverse {
    std::vector<int> k_set = {1, 2};
    std::string types_alphabet = "ABCDEFGHIJ";
    std::string ro_alphabet = "135";
    std::string ra_alphabet = "01";

    struct Block {
        Component component;
        int k;
        size_t offset;
        size_t size;
    };
    std::vector<Block> blocks;
    size_t total = 0;

    TermUniverse() { rebuild(); }
    TermUniverse(std::vector<int> ks, std::string types_ab)
        : k_set(std::move(ks)), types_alphabet(std::move(types_ab)) {
        rebuild();
    }

    void rebuild() {
        std::sort(k_set.begin(), k_set.end());
        blocks.clear();
        total = 0;
        for (Component c : {Component::types, Component::ro, Component::ra})
            for (int k : k_set) {
                size_t sz = 1;
                for (int i = 0; i < k; ++i) sz *= alphabet(c).size();
                blocks.push_back({c, k, total, sz});
                total += sz;
            }
    }

    const std::string& alphabet(Component c) const {
        switch (c) {
            case Component::types: return types_alphabet;
            case Component::ro: return ro_alphabet;
            default: return ra_alphabet;
        }
    }

    // index of a k-mer inside its block
    size_t kmer_rank(Component c, const std::string& kmer) const {
        const std::string& ab = alphabet(c);
        size_t rank = 0;
        for (char ch : kmer) {
            size_t pos = ab.find(ch);
            if (pos == std::string::npos)
                throw DataError(std::string("symbol '") + ch + "' not in alphabet");
            rank = rank * ab.size() + pos;
        }
        return rank;
    }

    std::string kmer_of_rank(Component c, int k, size_t rank) const {
        const std::string& ab = alphabet(c);
        std::string s(static_cast<size_t>(k), ab[0]);
        for (int i = k - 1; i >= 0; --i) {
            s[static_cast<size_t>(i)] = ab[rank % ab.size()];
            rank /= ab.size();
        }
        return s;
    }

    // term index -> (component, k, k-mer); the bijection is stable
    std::tuple<Component, int, std::string> term_of_index(size_t index) const {
        for (const auto& b : blocks)
            if (index < b.offset + b.size)
                return {b.component, b.k, kmer_of_rank(b.component, b.k, index - b.offset)};
        throw DataError("term index out of range");
    }
};

struct TermVector {
    Representation representation = Representation::tc;
    std::vector<double> values;

    double sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

// Counts of contiguous length-k substrings; sequences shorter than k give a
// zero vector.
inline std::vector<double> kmer_counts(const std::string& seq, int k,
                                       const std::string& alphabet) {
    size_t universe = 1;
    for (int i = 0; i < k; ++i) universe *= alphabet.size();
    std::vector<double> counts(universe, 0.0);
    if (seq.size() < static_cast<size_t>(k)) return counts;
    for (size_t i = 0; i + k <= seq.size(); ++i) {
        size_t rank = 0;
        for (int j = 0; j < k; ++j) {
            size_t pos = alphabet.find(seq[i + j]);
            if (pos == std::string::npos)
                throw DataError(std::string("symbol '") + seq[i + j] + "' not in alphabet");
            rank = rank * alphabet.size() + pos;
        }
        counts[rank] += 1.0;
    }
    return counts;
}

// Per-block transforms of raw counts.  tf normalizes by the block total; ta
// marks appearance; btc keeps slots at or above the block's mean count over
// all slots (which reproduces the published example rows).
inline std::vector<double> to_representation(const std::vector<double>& counts,
                                             Representation rep) {
    std::vector<double> out(counts.size(), 0.0);
    double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    switch (rep) {
        case Representation::tc:
            out = counts;
            break;
        case Representation::tf:
            if (total > 0.0)
                for (size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / total;
            break;
        case Representation::ta:
            for (size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] > 0.0 ? 1.0 : 0.0;
            break;
        case Representation::btc: {
            if (total <= 0.0) break;
            double mean = total / static_cast<double>(counts.size());
            for (size_t i = 0; i < counts.size(); ++i)
                out[i] = counts[i] >= mean ? 1.0 : 0.0;
            break;
        }
    }
    return out;
}

inline std::string component_sequence(const PlaceSignature& ps, Component c) {
    switch (c) {
        case Component::types: return ps.types;
        case Component::ro: {
            std::string s;
            for (uint8_t v : ps.ro) s += static_cast<char>('0' + v);
            return s;
        }
        default: {
            std::string s;
            for (uint8_t v : ps.ra) s += static_cast<char>('0' + v);
            return s;
        }
    }
}

// Concatenated [types | ro | ra] vector over the universe layout.
inline TermVector encode_signature(const PlaceSignature& ps, const TermUniverse& universe,
                                   Representation rep = Representation::tc) {
    if (ps.form != SignatureForm::simplified)
        throw DataError("encode_signature requires the simplified form");
    TermVector v;
    v.representation = rep;
    v.values.assign(universe.total, 0.0);
    for (const auto& block : universe.blocks) {
        std::string seq = component_sequence(ps, block.component);
        auto counts = kmer_counts(seq, block.k, universe.alphabet(block.component));
        auto rep_values = to_representation(counts, rep);
        std::copy(rep_values.begin(), rep_values.end(), v.values.begin() + block.offset);
    }
    return v;
}

// Debug dump: one "term,kind,count" row per nonzero slot.
inline std::string dump_vector_csv(const TermVector& v, const TermUniverse& universe) {
    static const char* kind_names[3] = {"types", "ro", "ra"};
    std::ostringstream os;
    os << "term,kind,count\n";
    for (size_t i = 0; i < v.values.size(); ++i) {
        if (v.values[i] == 0.0) continue;
        auto [c, k, term] = universe.term_of_index(i);
        os << term << ',' << kind_names[static_cast<int>(c)] << ',' << v.values[i] << '\n';
    }
    return os.str();
}

}  // namespace qps
