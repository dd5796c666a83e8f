#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qps/landmark.hpp"
#include "qps/relations.hpp"

namespace qps {

enum class SignatureForm : uint8_t { simplified, full };

// The four-component qualitative place descriptor.  In simplified form the
// relation sequences hold the N-1 consecutive pairs of the sweep; in full
// form all N(N-1)/2 pairs in the order 1-2, 1-3, ..., 1-N, 2-3, ...
struct PlaceSignature {
    std::string types;
    std::vector<uint8_t> ro;  // orientation indices, regions are 1/3/5
    std::vector<uint8_t> ra;  // qualitative angles, 0 acute / 1 obtuse
    uint8_t enclosed = 0;
    SignatureForm form = SignatureForm::simplified;

    size_t size() const { return types.size(); }
    bool operator==(const PlaceSignature&) const = default;

    size_t expected_relation_count() const {
        size_t n = types.size();
        if (n < 2) return 0;
        return form == SignatureForm::simplified ? n - 1 : n * (n - 1) / 2;
    }
    void validate() const {
        if (types.empty()) throw DataError("signature requires at least one landmark");
        if (ro.size() != ra.size() || ro.size() != expected_relation_count())
            throw DataError("signature relation sequences have wrong length");
        if (enclosed > 1) throw DataError("enclosed flag must be 0 or 1");
    }
};

// Text form "types|ro|ra|enclosed"; full form carries a leading "F:".
inline std::string to_text(const PlaceSignature& s) {
    std::ostringstream os;
    if (s.form == SignatureForm::full) os << "F:";
    os << s.types << '|';
    for (size_t i = 0; i < s.ro.size(); ++i) os << (i ? " " : "") << int(s.ro[i]);
    os << '|';
    for (size_t i = 0; i < s.ra.size(); ++i) os << (i ? " " : "") << int(s.ra[i]);
    os << '|' << int(s.enclosed);
    return os.str();
}

inline PlaceSignature signature_from_text(const std::string& text) {
    PlaceSignature s;
    std::string body = text;
    if (body.rfind("F:", 0) == 0) {
        s.form = SignatureForm::full;
        body = body.substr(2);
    }
    std::vector<std::string> parts;
    std::string cur;
    for (char c : body) {
        if (c == '|') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 4) throw ParseError("signature text needs 4 '|' fields: " + text);
    s.types = detail::trim(parts[0]);
    auto parse_seq = [&](const std::string& field, const char* allowed) {
        std::vector<uint8_t> seq;
        std::istringstream is(field);
        std::string tok;
        while (is >> tok) {
            if (tok.size() != 1 || std::string(allowed).find(tok[0]) == std::string::npos)
                throw ParseError("bad relation element '" + tok + "' in: " + text);
            seq.push_back(static_cast<uint8_t>(tok[0] - '0'));
        }
        return seq;
    };
    s.ro = parse_seq(parts[1], "12345678");
    s.ra = parse_seq(parts[2], "01");
    std::string e = detail::trim(parts[3]);
    if (e != "0" && e != "1") throw ParseError("bad enclosed flag in: " + text);
    s.enclosed = static_cast<uint8_t>(e[0] - '0');
    try {
        s.validate();
    } catch (const DataError& err) {
        throw ParseError(std::string(err.what()) + ": " + text);
    }
    return s;
}

namespace detail {

struct SweepEntry {
    size_t index;  // into the visible list
    double bearing;
    double dist;
};

// Clockwise sweep order: ascending compass bearing, nearer first on ties.
inline std::vector<SweepEntry> sweep_order(Vec2 viewer, const std::vector<Landmark>& visible) {
    std::vector<SweepEntry> entries;
    entries.reserve(visible.size());
    for (size_t i = 0; i < visible.size(); ++i) {
        double d = distance(viewer, visible[i].centre);
        if (d <= 0.0) throw DataError("viewer coincides with landmark " +
                                      std::to_string(visible[i].id));
        entries.push_back({i, bearing_deg(viewer, visible[i].centre), d});
    }
    std::sort(entries.begin(), entries.end(), [&](const SweepEntry& a, const SweepEntry& b) {
        if (a.bearing != b.bearing) return a.bearing < b.bearing;
        if (a.dist != b.dist) return a.dist < b.dist;
        return visible[a.index].id < visible[b.index].id;
    });
    return entries;
}

// Position (in the sorted cyclic order) of the entry that follows the
// largest clockwise gap, and whether the landmarks enclose the viewer.
inline std::pair<size_t, int> start_and_enclosed(const std::vector<SweepEntry>& sorted) {
    size_t n = sorted.size();
    if (n == 1) return {0, 0};
    double max_gap = -1.0;
    size_t start = 0;
    for (size_t i = 0; i < n; ++i) {
        double gap = sorted[(i + 1) % n].bearing - sorted[i].bearing;
        if (i + 1 == n) gap += 360.0;
        if (gap > max_gap) {
            max_gap = gap;
            start = (i + 1) % n;
        }
    }
    int enclosed = (360.0 - max_gap) > 180.0 ? 1 : 0;
    return {start, enclosed};
}

}  // namespace detail

// Observes the place signature at `viewer` for the given co-visible,
// point-abstracted landmarks.  Landmarks are swept clockwise; the start is
// the leftmost landmark of the optimal field of view, or for enclosed
// viewers the rotation with the lexicographically least (types, ro, ra).
inline PlaceSignature observe_signature(Vec2 viewer, const std::vector<Landmark>& visible,
                                        SignatureForm form = SignatureForm::simplified) {
    if (visible.empty()) throw DataError("observe_signature requires landmarks");
    auto sorted = detail::sweep_order(viewer, visible);
    auto [start, enclosed] = detail::start_and_enclosed(sorted);
    size_t n = sorted.size();

    auto centre_at = [&](size_t cyclic_pos) {
        return visible[sorted[cyclic_pos % n].index].centre;
    };
    auto type_at = [&](size_t cyclic_pos) {
        return visible[sorted[cyclic_pos % n].index].type_id;
    };
    auto build = [&](size_t rot) {
        PlaceSignature s;
        s.form = form;
        s.enclosed = static_cast<uint8_t>(enclosed);
        for (size_t i = 0; i < n; ++i) s.types += type_at(rot + i);
        if (n >= 2) {
            if (form == SignatureForm::simplified) {
                for (size_t i = 0; i + 1 < n; ++i) {
                    Vec2 a = centre_at(rot + i), b = centre_at(rot + i + 1);
                    s.ro.push_back(static_cast<uint8_t>(relative_orientation(viewer, a, b)));
                    s.ra.push_back(static_cast<uint8_t>(
                        to_digit(qualitative_angle(viewer, a, b)) - '0'));
                }
            } else {
                for (size_t i = 0; i + 1 < n; ++i)
                    for (size_t j = i + 1; j < n; ++j) {
                        Vec2 a = centre_at(rot + i), b = centre_at(rot + j);
                        s.ro.push_back(static_cast<uint8_t>(relative_orientation(viewer, a, b)));
                        s.ra.push_back(static_cast<uint8_t>(
                            to_digit(qualitative_angle(viewer, a, b)) - '0'));
                    }
            }
        }
        return s;
    };

    if (!enclosed || n == 1) return build(start);

    // enclosed: deterministic representative of the cyclic class
    auto key = [](const PlaceSignature& s) {
        return std::make_tuple(s.types, s.ro, s.ra);
    };
    PlaceSignature best = build(0);
    for (size_t rot = 1; rot < n; ++rot) {
        PlaceSignature cand = build(rot);
        if (key(cand) < key(best)) best = std::move(cand);
    }
    return best;
}

// Rotation offset k such that s2 equals s1 rotated by k, with the relation
// sequences shifted consistently.  Simplified sequences carry N-1 of the N
// cyclic pair relations, so each side has one pair the other lacks; those
// are unconstrained.  Only enclosed signatures may match at k != 0.
inline std::optional<int> cyclically_equal(const PlaceSignature& s1,
                                           const PlaceSignature& s2) {
    if (s1.form != s2.form) throw DataError("cyclically_equal requires the same form");
    if (s1.types.size() != s2.types.size()) return std::nullopt;
    if (s1.enclosed != s2.enclosed) return std::nullopt;
    if (s1 == s2) return 0;
    if (!s1.enclosed) return std::nullopt;

    size_t n = s1.types.size();
    if (n < 2) return std::nullopt;

    for (size_t k = 1; k < n; ++k) {
        bool ok = true;
        for (size_t i = 0; i < n && ok; ++i)
            if (s2.types[i] != s1.types[(i + k) % n]) ok = false;
        if (!ok) continue;

        if (s1.form == SignatureForm::simplified) {
            // cyclic pair e = (e, e+1 mod n); s1 stores e in 0..n-2,
            // s2's element j is cyclic pair (k + j) mod n
            for (size_t j = 0; j + 1 < n && ok; ++j) {
                size_t e = (k + j) % n;
                if (e == n - 1) continue;  // the wrap pair, absent from s1
                if (s2.ro[j] != s1.ro[e] || s2.ra[j] != s1.ra[e]) ok = false;
            }
        } else {
            // full form: map s2's pair (i,j) into s1 positions, mirroring
            // the orientation when the rotation reverses the pair order
            auto pos = [n](size_t i, size_t j) {  // i<j, 0-based position
                return i * (2 * n - i - 1) / 2 + (j - i) - 1;
            };
            size_t idx = 0;
            for (size_t i = 0; i + 1 < n && ok; ++i)
                for (size_t j = i + 1; j < n && ok; ++j, ++idx) {
                    size_t a = (i + k) % n, b = (j + k) % n;
                    bool swapped = a > b;
                    if (swapped) std::swap(a, b);
                    size_t p = pos(a, b);
                    uint8_t ro1 = s1.ro[p];
                    if (swapped) ro1 = static_cast<uint8_t>(mirror_orientation(ro1));
                    if (s2.ro[idx] != ro1 || s2.ra[idx] != s1.ra[p]) ok = false;
                }
        }
        if (ok) return static_cast<int>(k);
    }
    return std::nullopt;
}

// Reduces a full signature to the consecutive-pair form by extracting the
// positions k = 1 - i(i-1)/2 + (i-1)N, i = 1..N-1 (1-based).
inline PlaceSignature adjacent_from_full(const PlaceSignature& full) {
    if (full.form != SignatureForm::full)
        throw DataError("adjacent_from_full requires a full-form signature");
    full.validate();
    PlaceSignature s;
    s.types = full.types;
    s.enclosed = full.enclosed;
    s.form = SignatureForm::simplified;
    long long n = static_cast<long long>(full.types.size());
    for (long long i = 1; i + 1 <= n; ++i) {
        long long k = 1 - i * (i - 1) / 2 + (i - 1) * n;  // 1-based position
        s.ro.push_back(full.ro[static_cast<size_t>(k - 1)]);
        s.ra.push_back(full.ra[static_cast<size_t>(k - 1)]);
    }
    return s;
}

}  // namespace qps
