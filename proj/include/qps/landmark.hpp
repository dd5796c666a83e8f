#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qps/geometry.hpp"

namespace qps {

struct TypeAlphabet {
    std::string symbols = "ABCDEFGHIJ";

    bool contains(char c) const { return symbols.find(c) != std::string::npos; }
    int index_of(char c) const {
        auto p = symbols.find(c);
        if (p == std::string::npos) throw DataError(std::string("unknown type_id '") + c + "'");
        return static_cast<int>(p);
    }
    size_t size() const { return symbols.size(); }
};

// Levelled landmark semantics: general type, sub-type, name.  Feeds the
// substitution cost; missing levels compare equal only when missing on
// both sides.
struct TypeTriple {
    std::string type;
    std::string sub_type;
    std::string name;
};

struct Landmark {
    int64_t id = 0;
    Vec2 centre;
    std::string type_name;
    char type_id = '?';
    double max_range = 0.0;
    std::optional<double> facing_deg;  // empty means omnidirectional
    double sigma_x = 0.0;
    double sigma_y = 0.0;

    Vec2 facing_vector() const {
        double rad = *facing_deg * M_PI / 180.0;
        return {std::sin(rad), std::cos(rad)};  // compass convention
    }
};

struct VisibilityZone {
    int64_t landmark_id = 0;
    MultiPolygon polygon;
};

struct BuildingSet {
    std::vector<Polygon> polygons;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

inline const char* kLandmarkCsvHeader =
    "id,x,y,type_name,type_id,max_range,facing_deg,sigma_x,sigma_y";

inline std::vector<Landmark> parse_landmarks_csv(std::istream& in,
                                                 const TypeAlphabet& alphabet) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("landmark CSV is empty");
    if (detail::trim(line) != kLandmarkCsvHeader)
        throw ParseError("landmark CSV header must be \"" +
                         std::string(kLandmarkCsvHeader) + "\"");
    std::vector<Landmark> out;
    std::set<int64_t> seen;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 9)
            throw ParseError("line " + std::to_string(lineno) + ": expected 9 fields, got " +
                             std::to_string(fields.size()));
        auto fail = [&](const std::string& what) -> ParseError {
            return ParseError("line " + std::to_string(lineno) + ": " + what);
        };
        Landmark lm;
        try {
            lm.id = std::stoll(detail::trim(fields[0]));
            lm.centre.x = std::stod(detail::trim(fields[1]));
            lm.centre.y = std::stod(detail::trim(fields[2]));
        } catch (const std::exception&) {
            throw fail("bad numeric field");
        }
        lm.type_name = detail::trim(fields[3]);
        std::string tid = detail::trim(fields[4]);
        if (tid.size() != 1) throw fail("type_id must be a single character");
        lm.type_id = tid[0];
        if (!alphabet.contains(lm.type_id))
            throw fail(std::string("type_id '") + lm.type_id + "' not in alphabet");
        try {
            lm.max_range = std::stod(detail::trim(fields[5]));
            std::string facing = detail::trim(fields[6]);
            if (!facing.empty()) lm.facing_deg = std::stod(facing);
            lm.sigma_x = std::stod(detail::trim(fields[7]));
            lm.sigma_y = std::stod(detail::trim(fields[8]));
        } catch (const std::exception&) {
            throw fail("bad numeric field");
        }
        if (lm.max_range <= 0.0) throw fail("max_range must be > 0");
        if (lm.sigma_x < 0.0 || lm.sigma_y < 0.0) throw fail("sigma must be >= 0");
        if (!seen.insert(lm.id).second)
            throw fail("duplicate landmark id " + std::to_string(lm.id));
        out.push_back(std::move(lm));
    }
    return out;
}

inline std::vector<Landmark> load_landmarks(const std::string& path,
                                            const TypeAlphabet& alphabet = {}) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open landmark file: " + path);
    return parse_landmarks_csv(in, alphabet);
}

// One POLYGON or MULTIPOLYGON per line; rings are repaired via correction
// and rejected when still invalid.
inline BuildingSet parse_buildings_wkt(std::istream& in) {
    BuildingSet bs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(line);
        if (line.empty()) continue;
        MultiPolygon m = multipolygon_from_wkt(line);
        for (auto& p : m) {
            bg::correct(p);
            std::string reason;
            if (!bg::is_valid(p, reason))
                throw DataError("building on line " + std::to_string(lineno) +
                                " invalid after repair: " + reason);
            bs.polygons.push_back(std::move(p));
        }
    }
    return bs;
}

inline BuildingSet load_buildings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open building file: " + path);
    return parse_buildings_wkt(in);
}

inline void reject_landmarks_inside_buildings(const std::vector<Landmark>& lms,
                                              const BuildingSet& buildings) {
    for (const auto& lm : lms)
        for (const auto& b : buildings.polygons)
            if (contains_point(b, lm.centre))
                throw DataError("landmark " + std::to_string(lm.id) +
                                " lies inside a building");
}

// Default zone: a discretized disk of radius max_range, or the half-disk on
// the facing side for landmarks with an intrinsic front.
inline VisibilityZone default_zone(const Landmark& lm) {
    if (lm.max_range <= 0.0) throw DataError("max_range must be positive");
    VisibilityZone z;
    z.landmark_id = lm.id;
    if (lm.facing_deg)
        z.polygon = to_multi(half_disk_polygon(lm.centre, lm.max_range, lm.facing_vector()));
    else
        z.polygon = to_multi(circle_polygon(lm.centre, lm.max_range));
    return z;
}

// Shadow removal per boundary edge of each building: the edge endpoints are
// pushed away from the centre by factor 2*rMax/dist and the resulting
// quadrilateral is subtracted, along with the footprint itself.
inline VisibilityZone clip_by_buildings(const VisibilityZone& zone,
                                        const BuildingSet& buildings, Vec2 centre) {
    double r_max = 0.0;
    for (const auto& poly : zone.polygon)
        for (const auto& pt : poly.outer())
            r_max = std::max(r_max, distance(centre, to_vec(pt)));

    MultiPolygon geom = zone.polygon;
    auto subtract = [&](const Polygon& cutter) {
        MultiPolygon next;
        bg::difference(geom, cutter, next);
        geom = std::move(next);
    };
    for (const auto& b : buildings.polygons) {
        if (contains_point(b, centre) ||
            bg::distance(to_bpoint(centre), b) <= kEps)
            throw DataError("landmark centre lies inside or on a building");
        subtract(b);
        auto shadow_edges = [&](const Polygon::ring_type& ring) {
            for (size_t k = 0; k + 1 < ring.size(); ++k) {
                Vec2 p = to_vec(ring[k]), q = to_vec(ring[k + 1]);
                double dp = distance(centre, p), dq = distance(centre, q);
                if (dp <= kEps || dq <= kEps) continue;
                Vec2 p2 = p + (p - centre) * (2.0 * r_max / dp);
                Vec2 q2 = q + (q - centre) * (2.0 * r_max / dq);
                Polygon occ;
                occ.outer().push_back(to_bpoint(p));
                occ.outer().push_back(to_bpoint(q));
                occ.outer().push_back(to_bpoint(q2));
                occ.outer().push_back(to_bpoint(p2));
                bg::correct(occ);
                subtract(occ);
            }
        };
        shadow_edges(b.outer());
        for (const auto& inner : b.inners()) shadow_edges(inner);
    }
    return VisibilityZone{zone.landmark_id, std::move(geom)};
}

struct CovisRegion {
    MultiPolygon polygon;
    std::vector<int64_t> landmark_ids;  // sorted
};

// Overlay of all zones: the output partitions their union, each piece
// labelled with exactly the landmarks visible there.
inline std::vector<CovisRegion> covisibility_regions(const std::vector<VisibilityZone>& zones) {
    struct Piece {
        MultiPolygon poly;
        std::vector<int64_t> ids;
    };
    std::vector<Piece> pieces;
    for (const auto& zone : zones) {
        if (bg::is_empty(zone.polygon)) continue;
        std::vector<Piece> next;
        MultiPolygon remaining = zone.polygon;
        for (auto& piece : pieces) {
            MultiPolygon inter, diff;
            bg::intersection(piece.poly, zone.polygon, inter);
            bg::difference(piece.poly, zone.polygon, diff);
            if (area_of(inter) > kEps * kEps) {
                auto ids = piece.ids;
                ids.push_back(zone.landmark_id);
                std::sort(ids.begin(), ids.end());
                next.push_back({std::move(inter), std::move(ids)});
            }
            if (area_of(diff) > kEps * kEps)
                next.push_back({std::move(diff), piece.ids});
            MultiPolygon rem_next;
            bg::difference(remaining, piece.poly, rem_next);
            remaining = std::move(rem_next);
        }
        if (area_of(remaining) > kEps * kEps)
            next.push_back({std::move(remaining), {zone.landmark_id}});
        pieces = std::move(next);
    }
    // merge pieces with the same landmark set into one (multi)polygon region
    std::map<std::vector<int64_t>, MultiPolygon> merged;
    for (auto& piece : pieces) {
        auto it = merged.find(piece.ids);
        if (it == merged.end()) {
            merged.emplace(piece.ids, std::move(piece.poly));
        } else {
            MultiPolygon u;
            bg::union_(it->second, piece.poly, u);
            it->second = std::move(u);
        }
    }
    std::vector<CovisRegion> out;
    for (auto& [ids, poly] : merged) out.push_back({std::move(poly), ids});
    return out;
}

}  // namespace qps
