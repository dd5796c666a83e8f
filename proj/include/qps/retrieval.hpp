#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qps/minhash.hpp"

namespace qps {

// --- distances --------------------------------------------------------------

// Jaccard distance of bags: 1 - sum(min) / sum(a + b).  Note the identity
// bag distance is 1/2, not 0; both-empty is 0 by convention.
inline double jaccard_bags(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DataError("jaccard_bags requires equal K");
    double mn = 0.0, tot = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        mn += std::min(a[i], b[i]);
        tot += a[i] + b[i];
    }
    if (tot == 0.0) return 0.0;
    return 1.0 - mn / tot;
}

// Generalized Jaccard similarity sum(min)/sum(max); this is what weighted
// MinHash collisions estimate.
inline double generalized_jaccard(const std::vector<double>& a, const std::vector<double>& b) {
    double mn = 0.0, mx = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        mn += std::min(a[i], b[i]);
        mx += std::max(a[i], b[i]);
    }
    if (mx == 0.0) return 1.0;
    return mn / mx;
}

enum class BaselineKind {
    cosine_tf,
    cosine_tfidf,
    cosine_tc,
    hamming_ta,
    hamming_btc,
    jaccard_ta,
};

inline double baseline_distance(const std::vector<double>& a, const std::vector<double>& b,
                                BaselineKind kind) {
    if (a.size() != b.size()) throw DataError("baseline distance requires equal K");
    size_t K = a.size();
    switch (kind) {
        case BaselineKind::cosine_tf:
        case BaselineKind::cosine_tfidf:
        case BaselineKind::cosine_tc: {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (size_t i = 0; i < K; ++i) {
                dot += a[i] * b[i];
                na += a[i] * a[i];
                nb += b[i] * b[i];
            }
            if (na == 0.0 || nb == 0.0) return 1.0;
            return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
        }
        case BaselineKind::hamming_ta:
        case BaselineKind::hamming_btc: {
            double x = 0.0;
            for (size_t i = 0; i < K; ++i)
                x += ((a[i] != 0.0) != (b[i] != 0.0)) ? 1.0 : 0.0;
            return x / static_cast<double>(K);
        }
        case BaselineKind::jaccard_ta: {
            double x = 0.0, o = 0.0;
            for (size_t i = 0; i < K; ++i) {
                bool ba = a[i] != 0.0, bb = b[i] != 0.0;
                x += (ba != bb) ? 1.0 : 0.0;
                o += (ba || bb) ? 1.0 : 0.0;
            }
            if (o == 0.0) return 0.0;
            return x / o;
        }
    }
    return 1.0;
}

// idf(t) = 1 + log10(N / (n_t + 1)) over a reference corpus of vectors.
inline std::vector<double> compute_idf(const std::vector<const std::vector<double>*>& corpus,
                                       size_t K) {
    std::vector<double> df(K, 0.0);
    for (const auto* v : corpus)
        for (size_t i = 0; i < K; ++i)
            if ((*v)[i] != 0.0) df[i] += 1.0;
    std::vector<double> idf(K);
    double N = static_cast<double>(corpus.size());
    for (size_t i = 0; i < K; ++i) idf[i] = 1.0 + std::log10(N / (df[i] + 1.0));
    return idf;
}

// min(t1, l-th smallest distance); fewer than l distances fall back to t1.
inline double adaptive_threshold(const std::vector<double>& sorted_distances, double t1,
                                 size_t l) {
    if (sorted_distances.size() < l || l == 0) return t1;
    return std::min(t1, sorted_distances[l - 1]);
}

// --- perception-weighted edit distance --------------------------------------

struct CostModel {
    double c_del = 1.0;
    double c_ins = 5.0;
    double c_subs = 5.0;
    std::map<char, double> w1;            // per-type node weight, default 1
    std::array<double, 3> w2 = {0.6, 0.3, 0.1};
    double w_types = 1.0 / 3.0;
    double w_ro = 1.0 / 3.0;
    double w_ra = 1.0 / 3.0;
    std::map<char, TypeTriple> triples;   // optional sub-type data per symbol

    double node_weight(char c) const {
        auto it = w1.find(c);
        return it == w1.end() ? 1.0 : it->second;
    }
    void validate() const {
        if (!(c_subs >= c_ins && c_ins >= 3.0 * c_del))
            throw DataError("cost model must satisfy C_subs >= C_ins >= 3*C_del");
        double s = w2[0] + w2[1] + w2[2];
        if (std::fabs(s - 1.0) > 1e-9) throw DataError("w2 levels must sum to 1");
    }
};

// Weighted fraction of mismatched semantic levels (Eq-B.1 style); a level
// present on one side only counts as a mismatch.
inline double level_mismatch_fraction(const TypeTriple& a, const TypeTriple& b,
                                      const std::array<double, 3>& w2) {
    auto differs = [](const std::string& x, const std::string& y) {
        if (x.empty() && y.empty()) return false;
        return x != y;
    };
    return w2[0] * (differs(a.type, b.type) ? 1.0 : 0.0) +
           w2[1] * (differs(a.sub_type, b.sub_type) ? 1.0 : 0.0) +
           w2[2] * (differs(a.name, b.name) ? 1.0 : 0.0);
}

namespace detail {

// DP transforming the reference into the query: deleting a reference element
// models a missed landmark, inserting models a hallucinated one.
template <typename Seq, typename DelCost, typename InsCost, typename SubCost>
double edit_dp(const Seq& query, const Seq& ref, DelCost del, InsCost ins, SubCost sub) {
    size_t nq = query.size(), nr = ref.size();
    std::vector<double> prev(nr + 1), cur(nr + 1);
    prev[0] = 0.0;
    for (size_t j = 1; j <= nr; ++j) prev[j] = prev[j - 1] + del(j - 1);
    for (size_t i = 1; i <= nq; ++i) {
        cur[0] = prev[0] + ins(i - 1);
        for (size_t j = 1; j <= nr; ++j) {
            double best = prev[j] + ins(i - 1);
            best = std::min(best, cur[j - 1] + del(j - 1));
            best = std::min(best, prev[j - 1] + sub(i - 1, j - 1));
            cur[j] = best;
        }
        std::swap(prev, cur);
    }
    return prev[nr];
}

}  // namespace detail

// Edit distance of the type sequences under the perception cost model.
inline double edit_distance_types(const std::string& query, const std::string& ref,
                                  const CostModel& cm) {
    return detail::edit_dp(
        query, ref,
        [&](size_t j) { return cm.node_weight(ref[j]) * cm.c_del; },
        [&](size_t) { return cm.c_ins; },
        [&](size_t i, size_t j) {
            if (query[i] == ref[j]) return 0.0;
            auto qa = cm.triples.find(query[i]);
            auto rb = cm.triples.find(ref[j]);
            if (qa != cm.triples.end() && rb != cm.triples.end())
                return cm.node_weight(ref[j]) * cm.c_subs *
                       level_mismatch_fraction(qa->second, rb->second, cm.w2);
            return cm.node_weight(ref[j]) * cm.c_subs;
        });
}

// Relation-sequence edit distance: unit costs, optionally scaled per
// reference element by location-conditioned weights.
inline double edit_distance_relations(const std::vector<uint8_t>& query,
                                      const std::vector<uint8_t>& ref,
                                      const std::vector<double>* ref_weights = nullptr) {
    auto w = [&](size_t j) { return ref_weights ? (*ref_weights)[j] : 1.0; };
    return detail::edit_dp(
        query, ref,
        [&](size_t j) { return w(j); },
        [&](size_t) { return 1.0; },
        [&](size_t i, size_t j) { return query[i] == ref[j] ? 0.0 : w(j); });
}

// Per-reference relation weights for the uncertainty-aware mode.
struct RelationWeights {
    std::vector<double> ro;
    std::vector<double> ra;
};

inline double weighted_edit_distance(const PlaceSignature& q, const PlaceSignature& r,
                                     const CostModel& cm,
                                     const RelationWeights* rw = nullptr) {
    if (q.form != r.form || q.form != SignatureForm::simplified)
        throw DataError("weighted_edit_distance requires simplified signatures");
    double d_types = edit_distance_types(q.types, r.types, cm);
    double d_ro = edit_distance_relations(q.ro, r.ro, rw ? &rw->ro : nullptr);
    double d_ra = edit_distance_relations(q.ra, r.ra, rw ? &rw->ra : nullptr);
    return cm.w_types * d_types + cm.w_ro * d_ro + cm.w_ra * d_ra;
}

// --- candidate sets and pipeline --------------------------------------------

enum class Stage : uint8_t { screened, jaccard, edit };

struct CandidateSet {
    Stage stage = Stage::screened;
    std::vector<std::pair<int64_t, double>> entries;  // (signature id, distance)

    void sort_entries() {
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;
            return a.first < b.first;
        });
    }
};

struct LocationEstimate {
    // (cell id, probability density); densities integrate to 1 over the
    // union of the candidate cells
    std::vector<std::pair<int64_t, double>> cells;
};

// Retrieval-facing view of the reference database.
struct SignatureIndex {
    TermUniverse universe;
    uint32_t n_hash = 50;
    uint64_t seed = 1;
    std::vector<int64_t> ids;
    std::vector<PlaceSignature> signatures;
    std::vector<TermVector> tc;
    std::vector<HashSketch> sketches;
    // references pre-grouped by identical sketch
    std::vector<std::vector<uint32_t>> sketch_groups;

    size_t size() const { return ids.size(); }

    void build_vectors_and_sketches() {
        tc.clear();
        sketches.clear();
        tc.reserve(ids.size());
        sketches.reserve(ids.size());
        for (const auto& s : signatures) {
            tc.push_back(encode_signature(s, universe, Representation::tc));
            sketches.push_back(weighted_minhash(tc.back(), n_hash, seed));
        }
        group_sketches();
    }

    void group_sketches() {
        sketch_groups.clear();
        std::map<std::vector<std::pair<uint32_t, int64_t>>, size_t> seen;
        for (uint32_t row = 0; row < sketches.size(); ++row) {
            auto [it, fresh] = seen.try_emplace(sketches[row].samples, sketch_groups.size());
            if (fresh) sketch_groups.emplace_back();
            sketch_groups[it->second].push_back(row);
        }
    }

    std::optional<uint32_t> row_of(int64_t id) const {
        for (uint32_t i = 0; i < ids.size(); ++i)
            if (ids[i] == id) return i;
        return std::nullopt;
    }
};

// Step 1: keep references whose sketch differs from the query's in at most
// a proportion t of the positions.
inline CandidateSet screen(const HashSketch& query, const SignatureIndex& index, double t) {
    if (t < 0.0 || t > 1.0) throw DataError("screen threshold must be in [0,1]");
    if (query.n_hash != index.n_hash || query.seed != index.seed)
        throw DataError("sketch parameters mismatch");
    uint32_t limit = static_cast<uint32_t>(std::floor(t * query.n_hash + 1e-9));
    CandidateSet out;
    out.stage = Stage::screened;
    for (const auto& group : index.sketch_groups) {
        uint32_t diff = sketch_diff_bounded(query, index.sketches[group.front()], limit);
        if (diff > limit) continue;
        double d = static_cast<double>(diff) / query.n_hash;
        for (uint32_t row : group) out.entries.emplace_back(index.ids[row], d);
    }
    out.sort_entries();
    return out;
}

struct QueryParams {
    double t = 0.5;        // screening proportion
    double t1 = 0.59;      // fixed Jaccard-bags threshold
    size_t l = 110;        // rank for the adaptive threshold
    std::optional<double> b;  // edit threshold factor t_e = b * len(query types)
    std::optional<size_t> k;  // or keep the k smallest
    CostModel cost;
};

struct StageTiming {
    double screen_ms = 0.0;
    double jaccard_ms = 0.0;
    double edit_ms = 0.0;
};

struct QueryResult {
    CandidateSet screened;
    CandidateSet jaccard;
    CandidateSet edit;
    LocationEstimate estimate;
    StageTiming timing;
};

// Step 2 on a candidate list: Jaccard bags with the adaptive threshold.
inline CandidateSet refine_by_jaccard(const TermVector& query_tc, const SignatureIndex& index,
                                      const CandidateSet& screened, double t1, size_t l) {
    std::unordered_map<int64_t, uint32_t> row_by_id;
    row_by_id.reserve(index.ids.size());
    for (uint32_t i = 0; i < index.ids.size(); ++i) row_by_id.emplace(index.ids[i], i);

    CandidateSet out;
    out.stage = Stage::jaccard;
    std::vector<double> dists;
    dists.reserve(screened.entries.size());
    for (const auto& [id, _] : screened.entries) {
        uint32_t row = row_by_id.at(id);
        double d = jaccard_bags(query_tc.values, index.tc[row].values);
        out.entries.emplace_back(id, d);
        dists.push_back(d);
    }
    std::sort(dists.begin(), dists.end());
    double thr = adaptive_threshold(dists, t1, l);
    std::erase_if(out.entries, [&](const auto& e) { return e.second > thr; });
    out.sort_entries();
    return out;
}

// Step 3: edit-distance refinement, keeping the k smallest or those within
// b * len(query type sequence).
inline CandidateSet refine_by_edit(const PlaceSignature& query, const SignatureIndex& index,
                                   const CandidateSet& candidates, const CostModel& cm,
                                   std::optional<double> b, std::optional<size_t> k) {
    std::unordered_map<int64_t, uint32_t> row_by_id;
    row_by_id.reserve(index.ids.size());
    for (uint32_t i = 0; i < index.ids.size(); ++i) row_by_id.emplace(index.ids[i], i);

    CandidateSet out;
    out.stage = Stage::edit;
    for (const auto& [id, _] : candidates.entries) {
        uint32_t row = row_by_id.at(id);
        out.entries.emplace_back(id, weighted_edit_distance(query, index.signatures[row], cm));
    }
    out.sort_entries();
    if (b) {
        double te = *b * static_cast<double>(query.types.size());
        std::erase_if(out.entries, [&](const auto& e) { return e.second > te; });
    }
    if (k && out.entries.size() > *k) out.entries.resize(*k);
    return out;
}

// Cell lookup used for the final location estimate.
struct CellRef {
    int64_t cell_id = 0;
    double area = 0.0;
};

// Uniform density per candidate signature, split over its cells by area:
// every candidate signature gets equal mass, each of its cells density
// mass / coverage.
inline LocationEstimate estimate_locations(
    const CandidateSet& final_set,
    const std::unordered_map<int64_t, std::vector<CellRef>>& cells_by_signature) {
    LocationEstimate est;
    std::vector<std::pair<const std::vector<CellRef>*, double>> groups;
    for (const auto& [sig_id, _] : final_set.entries) {
        auto it = cells_by_signature.find(sig_id);
        if (it == cells_by_signature.end() || it->second.empty()) continue;
        double coverage = 0.0;
        for (const auto& c : it->second) coverage += c.area;
        if (coverage > 0.0) groups.emplace_back(&it->second, coverage);
    }
    if (groups.empty()) return est;
    double mass = 1.0 / static_cast<double>(groups.size());
    for (const auto& [cells, coverage] : groups)
        for (const auto& c : *cells) est.cells.emplace_back(c.cell_id, mass / coverage);
    return est;
}

inline QueryResult query_pipeline(const PlaceSignature& observation, const SignatureIndex& index,
                                  const QueryParams& params,
                                  const std::unordered_map<int64_t, std::vector<CellRef>>*
                                      cells_by_signature = nullptr) {
    if (observation.types.empty()) throw DataError("empty observation");
    using clock = std::chrono::steady_clock;
    QueryResult res;

    auto t0 = clock::now();
    TermVector qtc = encode_signature(observation, index.universe, Representation::tc);
    HashSketch qsk = weighted_minhash(qtc, index.n_hash, index.seed);
    res.screened = screen(qsk, index, params.t);
    auto t1 = clock::now();
    res.jaccard = refine_by_jaccard(qtc, index, res.screened, params.t1, params.l);
    auto t2 = clock::now();
    res.edit = refine_by_edit(observation, index, res.jaccard, params.cost, params.b, params.k);
    auto t3 = clock::now();

    res.timing.screen_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    res.timing.jaccard_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
    res.timing.edit_ms = std::chrono::duration<double, std::milli>(t3 - t2).count();
    if (cells_by_signature)
        res.estimate = estimate_locations(res.edit, *cells_by_signature);
    return res;
}

}  // namespace qps
