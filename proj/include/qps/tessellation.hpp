#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "qps/signature.hpp"

namespace qps {

enum class LineKind : uint8_t { SL, PL, CL, BL };

inline const char* to_string(LineKind k) {
    switch (k) {
        case LineKind::SL: return "SL";
        case LineKind::PL: return "PL";
        case LineKind::CL: return "CL";
        case LineKind::BL: return "BL";
    }
    return "?";
}

// A dividing line: the locus across which exactly one qualitative relation
// flips.  SL and PL are infinite lines (point + unit direction), CL is the
// circle with diameter AB, BL is the visibility-zone boundary of a single
// landmark.
struct DividingLine {
    int64_t id = -1;
    LineKind kind = LineKind::SL;
    int64_t lm_a = -1;
    int64_t lm_b = -1;  // -1 for BL
    Vec2 point;         // SL/PL anchor
    Vec2 dir;           // SL/PL unit direction
    Vec2 centre;        // CL
    double radius = 0.0;

    double distance_to(Vec2 p) const {
        switch (kind) {
            case LineKind::SL:
            case LineKind::PL:
                return std::fabs((p - point).cross(dir));
            case LineKind::CL:
                return std::fabs(distance(p, centre) - radius);
            case LineKind::BL:
                return std::numeric_limits<double>::max();  // resolved via zones
        }
        return std::numeric_limits<double>::max();
    }
};

// SL through both landmarks, the two perpendiculars, and the circle with
// diameter AB.
inline std::vector<DividingLine> dividing_lines_for_pair(const Landmark& A,
                                                         const Landmark& B) {
    if (A.centre == B.centre) throw DataError("coincident landmarks have no dividing lines");
    Vec2 d = (B.centre - A.centre).normalized();
    std::vector<DividingLine> out(4);
    out[0] = {-1, LineKind::SL, A.id, B.id, A.centre, d, {}, 0.0};
    out[1] = {-1, LineKind::PL, A.id, B.id, A.centre, d.perp(), {}, 0.0};
    out[2] = {-1, LineKind::PL, A.id, B.id, B.centre, d.perp(), {}, 0.0};
    out[3] = {-1, LineKind::CL, A.id, B.id, {}, {}, (A.centre + B.centre) / 2.0,
              distance(A.centre, B.centre) / 2.0};
    return out;
}

struct PlaceCell {
    int64_t cell_id = -1;
    Polygon polygon;
    int64_t signature_id = -1;
    Vec2 representative;
    std::vector<int64_t> landmark_ids;
    bool degenerate = false;
};

struct CellAdjacency {
    int64_t cell_a = -1;
    int64_t cell_b = -1;
    int64_t line_id = -1;
};

struct SignatureRecord {
    int64_t signature_id = -1;
    PlaceSignature signature;
    std::string text;
    std::vector<int64_t> cell_ids;
};

struct SignatureStats {
    int64_t signature_id = -1;
    double spatial_coverage = 0.0;
    double spatial_deviation = 0.0;
};

enum class TessellationMode : uint8_t { adjacent, all_pairs };

inline const char* to_string(TessellationMode m) {
    return m == TessellationMode::adjacent ? "adjacent" : "all_pairs";
}

struct BuildParams {
    TessellationMode mode = TessellationMode::adjacent;
    double min_cell_area = kMinCellArea;
    int consistency_samples = 32;
};

namespace detail {

// Up to `want` stratified interior points: grid cell centres of the bbox
// that fall strictly inside.
inline std::vector<Vec2> stratified_interior_points(const Polygon& poly, int want) {
    Box bb = bounding_box(poly);
    Vec2 lo = to_vec(bb.min_corner()), hi = to_vec(bb.max_corner());
    std::vector<Vec2> out;
    int grid = 1;
    while (grid * grid < want * 3 && grid < 24) ++grid;
    for (int gy = 0; gy < grid && static_cast<int>(out.size()) < want; ++gy)
        for (int gx = 0; gx < grid && static_cast<int>(out.size()) < want; ++gx) {
            Vec2 p{lo.x + (hi.x - lo.x) * (gx + 0.5) / grid,
                   lo.y + (hi.y - lo.y) * (gy + 0.5) / grid};
            if (contains_point(poly, p)) out.push_back(p);
        }
    return out;
}

struct RawCell {
    Polygon polygon;
    PlaceSignature signature;
    Vec2 representative;
    bool degenerate = false;
};

struct ComponentBuilder {
    const std::vector<Landmark>& landmarks;  // visible set of this region
    const BuildParams& params;
    std::vector<RawCell> cells;

    SignatureForm form() const {
        return params.mode == TessellationMode::adjacent ? SignatureForm::simplified
                                                         : SignatureForm::full;
    }

    PlaceSignature observe_at(Vec2 p) const {
        return observe_signature(p, landmarks, form());
    }

    void emit(Polygon poly, int depth) {
        double area = area_of(poly);
        if (area < kEps * kEps) return;
        Vec2 rep = pole_of_inaccessibility(poly);
        if (!contains_point(poly, rep)) {
            BPoint c;
            bg::centroid(poly, c);
            rep = to_vec(c);
            if (!contains_point(poly, rep)) {
                auto pts = stratified_interior_points(poly, 1);
                if (pts.empty()) return;  // sliver below representability
                rep = pts[0];
            }
        }
        PlaceSignature sig = observe_at(rep);
        bool consistent = true;
        for (Vec2 p : stratified_interior_points(poly, params.consistency_samples)) {
            if (!(observe_at(p) == sig)) {
                consistent = false;
                break;
            }
        }
        if (!consistent && depth < 24 && area >= 2.0 * params.min_cell_area) {
            // bisect along the longer bbox axis and retry the halves
            Box bb = bounding_box(poly);
            Vec2 lo = to_vec(bb.min_corner()), hi = to_vec(bb.max_corner());
            Vec2 mid = (lo + hi) / 2.0;
            Vec2 dir = (hi.x - lo.x) >= (hi.y - lo.y) ? Vec2{0, 1} : Vec2{1, 0};
            auto halves = split_by_line(poly, mid, dir);
            if (halves.size() > 1) {
                for (auto& h : halves) emit(std::move(h), depth + 1);
                return;
            }
        }
        cells.push_back({std::move(poly), std::move(sig), rep, !consistent});
    }

    void run(const Polygon& component, const std::vector<DividingLine>& lines) {
        run_multi({component}, lines);
    }

    void run_multi(std::vector<Polygon> pieces, const std::vector<DividingLine>& lines) {
        for (const auto& line : lines) {
            std::vector<Polygon> next;
            for (auto& piece : pieces) {
                std::vector<Polygon> parts;
                if (line.kind == LineKind::CL)
                    parts = split_by_circle(piece, line.centre, line.radius);
                else
                    parts = split_by_line(piece, line.point, line.dir);
                if (parts.empty()) parts.push_back(std::move(piece));
                for (auto& part : parts) next.push_back(std::move(part));
            }
            pieces = std::move(next);
        }
        for (auto& piece : pieces) emit(std::move(piece), 0);
        merge_equal_neighbours();
    }

    // join edge-adjacent cells carrying the same signature until every cell
    // is a maximal connected region of constant signature
    void merge_equal_neighbours() {
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t i = 0; i < cells.size() && !changed; ++i)
                for (size_t j = i + 1; j < cells.size() && !changed; ++j) {
                    if (!(cells[i].signature == cells[j].signature)) continue;
                    if (bg::distance(cells[i].polygon, cells[j].polygon) > kEps) continue;
                    MultiPolygon u;
                    bg::union_(cells[i].polygon, cells[j].polygon, u);
                    if (u.size() != 1) continue;  // point contact only
                    RawCell merged;
                    merged.polygon = u.front();
                    merged.signature = cells[i].signature;
                    merged.degenerate = cells[i].degenerate && cells[j].degenerate;
                    merged.representative = pole_of_inaccessibility(merged.polygon);
                    if (!contains_point(merged.polygon, merged.representative))
                        merged.representative = cells[i].representative;
                    cells.erase(cells.begin() + static_cast<long>(j));
                    cells[i] = std::move(merged);
                    changed = true;
                }
        }
    }
};

}  // namespace detail

// Cells of one co-visibility region component, partitioned by the dividing
// lines of every landmark pair and deduplicated to maximal equal-signature
// regions.
inline std::vector<detail::RawCell> build_place_cells(const Polygon& region,
                                                      const std::vector<Landmark>& visible,
                                                      const BuildParams& params = {}) {
    detail::ComponentBuilder builder{visible, params, {}};
    std::vector<DividingLine> lines;
    for (size_t i = 0; i < visible.size(); ++i)
        for (size_t j = i + 1; j < visible.size(); ++j)
            for (auto& line : dividing_lines_for_pair(visible[i], visible[j]))
                lines.push_back(line);
    builder.run(region, lines);
    return builder.cells;
}

// The reference database: landmarks, clipped zones, dividing lines, place
// cells, deduplicated signatures and the adjacency graph.
struct Database {
    TypeAlphabet alphabet;
    BuildParams params;
    std::vector<Landmark> landmarks;
    std::vector<VisibilityZone> zones;  // clipped, aligned with landmarks
    BuildingSet buildings;
    std::vector<DividingLine> lines;
    std::vector<PlaceCell> cells;
    std::vector<SignatureRecord> signatures;
    std::vector<CellAdjacency> adjacency;

    const Landmark* landmark_by_id(int64_t id) const {
        for (const auto& lm : landmarks)
            if (lm.id == id) return &lm;
        return nullptr;
    }
    const VisibilityZone* zone_by_id(int64_t id) const {
        for (const auto& z : zones)
            if (z.landmark_id == id) return &z;
        return nullptr;
    }
    const SignatureRecord* signature_by_id(int64_t id) const {
        for (const auto& s : signatures)
            if (s.signature_id == id) return &s;
        return nullptr;
    }

    std::vector<Landmark> landmark_subset(const std::vector<int64_t>& ids) const {
        std::vector<Landmark> out;
        for (int64_t id : ids) {
            const Landmark* lm = landmark_by_id(id);
            if (!lm) throw DataError("unknown landmark id " + std::to_string(id));
            out.push_back(*lm);
        }
        return out;
    }
};

namespace detail {

// Signature ids via exact text match, with a cyclic-equality fallback for
// enclosed signatures: cyclically equal signatures share one id.
struct SignatureInterner {
    std::unordered_map<std::string, int64_t> by_text;
    std::vector<SignatureRecord>* table;

    explicit SignatureInterner(std::vector<SignatureRecord>* t) : table(t) {
        for (const auto& rec : *t) by_text.emplace(rec.text, rec.signature_id);
    }

    int64_t intern(const PlaceSignature& sig) {
        std::string text = to_text(sig);
        auto it = by_text.find(text);
        if (it != by_text.end()) return it->second;
        if (sig.enclosed) {
            for (auto& rec : *table)
                if (rec.signature.enclosed && cyclically_equal(rec.signature, sig))
                    return rec.signature_id;
        }
        int64_t id = static_cast<int64_t>(table->size()) + 1;
        table->push_back({id, sig, text, {}});
        by_text.emplace(std::move(text), id);
        return id;
    }
};

inline double shared_boundary_length(const Polygon& a, const Polygon& b, Vec2* where) {
    auto near_boundary = [&](Vec2 p) {
        return std::fabs(signed_boundary_distance(b, p)) < 1e-7;
    };
    double total = 0.0;
    double best_len = 0.0;
    auto scan_ring = [&](const Polygon::ring_type& ring) {
        for (size_t i = 0; i + 1 < ring.size(); ++i) {
            Vec2 p = to_vec(ring[i]), q = to_vec(ring[i + 1]);
            double len = distance(p, q);
            if (len < 1e-9) continue;
            Vec2 m = (p + q) / 2.0;
            if (near_boundary(m) && near_boundary(p) && near_boundary(q)) {
                total += len;
                if (len > best_len) {
                    best_len = len;
                    if (where) *where = m;
                }
            }
        }
    };
    scan_ring(a.outer());
    for (const auto& inner : a.inners()) scan_ring(inner);
    return total;
}

}  // namespace detail

// Deduplicates cell signatures into the record table and back-fills
// signature ids; cyclically-equal enclosed signatures share one id.
inline void dedupe_signatures(Database& db, std::vector<detail::RawCell>& raw,
                              std::vector<int64_t> landmark_ids, int64_t& next_cell_id) {
    detail::SignatureInterner interner(&db.signatures);
    for (auto& rc : raw) {
        PlaceCell cell;
        cell.cell_id = next_cell_id++;
        cell.polygon = std::move(rc.polygon);
        cell.representative = rc.representative;
        cell.landmark_ids = landmark_ids;
        cell.degenerate = rc.degenerate;
        cell.signature_id = interner.intern(rc.signature);
        db.signatures[static_cast<size_t>(cell.signature_id - 1)].cell_ids.push_back(
            cell.cell_id);
        db.cells.push_back(std::move(cell));
    }
}

// Adjacency edges between cells sharing a boundary arc, labelled with the
// dividing line the arc lies on.  Cells with equal landmark sets meet on
// SL/PL/CL lines; differing sets meet on the BL of the toggled landmark.
inline std::vector<CellAdjacency> adjacency_graph(const Database& db) {
    std::vector<CellAdjacency> edges;
    std::vector<Box> boxes;
    boxes.reserve(db.cells.size());
    for (const auto& c : db.cells) boxes.push_back(bounding_box(c.polygon));

    auto boxes_touch = [&](const Box& a, const Box& b) {
        return !(bg::get<bg::max_corner, 0>(a) + 1e-6 < bg::get<bg::min_corner, 0>(b) ||
                 bg::get<bg::max_corner, 0>(b) + 1e-6 < bg::get<bg::min_corner, 0>(a) ||
                 bg::get<bg::max_corner, 1>(a) + 1e-6 < bg::get<bg::min_corner, 1>(b) ||
                 bg::get<bg::max_corner, 1>(b) + 1e-6 < bg::get<bg::min_corner, 1>(a));
    };

    for (size_t i = 0; i < db.cells.size(); ++i)
        for (size_t j = i + 1; j < db.cells.size(); ++j) {
            if (!boxes_touch(boxes[i], boxes[j])) continue;
            Vec2 contact;
            double len =
                detail::shared_boundary_length(db.cells[i].polygon, db.cells[j].polygon,
                                               &contact);
            if (len < 1e-6) continue;
            CellAdjacency edge;
            edge.cell_a = db.cells[i].cell_id;
            edge.cell_b = db.cells[j].cell_id;

            const auto& set_a = db.cells[i].landmark_ids;
            const auto& set_b = db.cells[j].landmark_ids;
            if (set_a != set_b) {
                std::vector<int64_t> sym;
                std::set_symmetric_difference(set_a.begin(), set_a.end(), set_b.begin(),
                                              set_b.end(), std::back_inserter(sym));
                for (const auto& line : db.lines) {
                    if (line.kind != LineKind::BL) continue;
                    if (std::find(sym.begin(), sym.end(), line.lm_a) == sym.end()) continue;
                    edge.line_id = line.id;
                    break;
                }
            } else {
                double best = std::numeric_limits<double>::max();
                for (const auto& line : db.lines) {
                    if (line.kind == LineKind::BL) continue;
                    bool involved =
                        std::find(set_a.begin(), set_a.end(), line.lm_a) != set_a.end() &&
                        std::find(set_a.begin(), set_a.end(), line.lm_b) != set_a.end();
                    if (!involved) continue;
                    double tol = line.kind == LineKind::CL
                                     ? line.radius * 0.003 + 1e-5
                                     : 1e-5;
                    double d = line.distance_to(contact);
                    if (d < tol && d < best) {
                        best = d;
                        edge.line_id = line.id;
                    }
                }
            }
            edges.push_back(edge);
        }
    return edges;
}

inline std::vector<SignatureStats> signature_stats(const Database& db) {
    std::map<int64_t, std::vector<const PlaceCell*>> by_sig;
    for (const auto& c : db.cells) by_sig[c.signature_id].push_back(&c);
    std::vector<SignatureStats> out;
    for (const auto& [sig_id, cells] : by_sig) {
        SignatureStats st;
        st.signature_id = sig_id;
        double sum_x = 0.0, sum_y = 0.0;
        std::vector<Vec2> centroids;
        for (const auto* c : cells) {
            st.spatial_coverage += area_of(c->polygon);
            BPoint ctr;
            bg::centroid(c->polygon, ctr);
            centroids.push_back(to_vec(ctr));
            sum_x += centroids.back().x;
            sum_y += centroids.back().y;
        }
        double n = static_cast<double>(centroids.size());
        double mx = sum_x / n, my = sum_y / n;
        double var_x = 0.0, var_y = 0.0;
        for (Vec2 c : centroids) {
            var_x += (c.x - mx) * (c.x - mx);
            var_y += (c.y - my) * (c.y - my);
        }
        st.spatial_deviation = std::sqrt(var_x / n + var_y / n);  // population variance
        out.push_back(st);
    }
    return out;
}

namespace detail {

inline void register_pair_lines(Database& db, int64_t& next_line_id) {
    db.lines.clear();
    for (const auto& lm : db.landmarks) {
        DividingLine bl;
        bl.id = next_line_id++;
        bl.kind = LineKind::BL;
        bl.lm_a = lm.id;
        db.lines.push_back(bl);
    }
    // pair lines for every co-visible pair (pairs that share a cell)
    std::set<std::pair<int64_t, int64_t>> covis;
    for (const auto& cell : db.cells)
        for (size_t i = 0; i < cell.landmark_ids.size(); ++i)
            for (size_t j = i + 1; j < cell.landmark_ids.size(); ++j)
                covis.insert({cell.landmark_ids[i], cell.landmark_ids[j]});
    for (auto [a, b] : covis) {
        const Landmark* A = db.landmark_by_id(a);
        const Landmark* B = db.landmark_by_id(b);
        for (auto& line : dividing_lines_for_pair(*A, *B)) {
            line.id = next_line_id++;
            db.lines.push_back(line);
        }
    }
}

}  // namespace detail

// Full build: clip zones, overlay co-visibility regions, tessellate each
// component, dedupe signatures, then derive lines, adjacency and stats.
inline Database build_database(std::vector<Landmark> landmarks, BuildingSet buildings,
                               const TypeAlphabet& alphabet = {},
                               const BuildParams& params = {}) {
    Database db;
    db.alphabet = alphabet;
    db.params = params;
    db.buildings = std::move(buildings);
    reject_landmarks_inside_buildings(landmarks, db.buildings);
    db.landmarks = std::move(landmarks);
    std::sort(db.landmarks.begin(), db.landmarks.end(),
              [](const Landmark& a, const Landmark& b) { return a.id < b.id; });

    for (const auto& lm : db.landmarks)
        db.zones.push_back(clip_by_buildings(default_zone(lm), db.buildings, lm.centre));

    auto regions = covisibility_regions(db.zones);
    int64_t next_cell_id = 1;
    for (const auto& region : regions) {
        auto visible = db.landmark_subset(region.landmark_ids);
        for (const auto& component : components(region.polygon)) {
            auto raw = build_place_cells(component, visible, params);
            dedupe_signatures(db, raw, region.landmark_ids, next_cell_id);
        }
    }
    int64_t next_line_id = 1;
    detail::register_pair_lines(db, next_line_id);
    db.adjacency = adjacency_graph(db);
    return db;
}

// Incremental insertion: only cells intersecting the new landmark's zone
// are re-subdivided (by the new pair lines); everything else is untouched.
// The resulting signature multiset equals a full rebuild.
inline void add_landmark(Database& db, const Landmark& lm) {
    if (db.landmark_by_id(lm.id)) throw DataError("duplicate landmark id");
    VisibilityZone zone = clip_by_buildings(default_zone(lm), db.buildings, lm.centre);

    std::vector<PlaceCell> untouched;
    struct Patch {
        Polygon polygon;
        std::vector<int64_t> ids;  // landmark set of the piece
    };
    std::vector<Patch> patches;

    MultiPolygon covered;  // part of the new zone overlapping old cells
    for (auto& cell : db.cells) {
        MultiPolygon inter;
        bg::intersection(cell.polygon, zone.polygon, inter);
        if (area_of(inter) <= kEps * kEps) {
            untouched.push_back(std::move(cell));
            continue;
        }
        MultiPolygon diff;
        bg::difference(cell.polygon, zone.polygon, diff);
        for (auto& piece : inter) {
            auto ids = cell.landmark_ids;
            ids.push_back(lm.id);
            std::sort(ids.begin(), ids.end());
            patches.push_back({std::move(piece), std::move(ids)});
        }
        for (auto& piece : diff) patches.push_back({std::move(piece), cell.landmark_ids});
        MultiPolygon cov_next;
        bg::union_(covered, inter, cov_next);
        covered = std::move(cov_next);
    }
    // zone area nobody saw before: only the new landmark is visible there
    MultiPolygon fresh;
    bg::difference(zone.polygon, covered, fresh);
    for (auto& piece : fresh)
        if (area_of(piece) > kEps * kEps) patches.push_back({std::move(piece), {lm.id}});

    db.landmarks.push_back(lm);
    std::sort(db.landmarks.begin(), db.landmarks.end(),
              [](const Landmark& a, const Landmark& b) { return a.id < b.id; });
    db.zones.push_back(zone);
    std::sort(db.zones.begin(), db.zones.end(),
              [](const VisibilityZone& a, const VisibilityZone& b) {
                  return a.landmark_id < b.landmark_id;
              });

    // group patches by landmark set and re-tessellate with the new lines
    std::map<std::vector<int64_t>, std::vector<Polygon>> grouped;
    for (auto& p : patches) grouped[p.ids].push_back(std::move(p.polygon));

    db.cells.clear();
    db.signatures.clear();
    db.adjacency.clear();
    db.lines.clear();
    int64_t next_cell_id = 1;
    for (auto& cell : untouched) {
        cell.cell_id = next_cell_id++;
        db.cells.push_back(std::move(cell));
    }
    // reintern the untouched cells' signatures (table was renumbered)
    {
        detail::SignatureInterner interner(&db.signatures);
        for (auto& cell : db.cells) {
            auto visible = db.landmark_subset(cell.landmark_ids);
            SignatureForm form = db.params.mode == TessellationMode::adjacent
                                     ? SignatureForm::simplified
                                     : SignatureForm::full;
            PlaceSignature sig = observe_signature(cell.representative, visible, form);
            cell.signature_id = interner.intern(sig);
            db.signatures[static_cast<size_t>(cell.signature_id - 1)].cell_ids.push_back(
                cell.cell_id);
        }
    }
    for (auto& [ids, polys] : grouped) {
        auto visible = db.landmark_subset(ids);
        bool has_new = std::find(ids.begin(), ids.end(), lm.id) != ids.end();
        std::vector<DividingLine> lines;
        if (has_new)
            for (int64_t other : ids) {
                if (other == lm.id) continue;
                for (auto& line : dividing_lines_for_pair(*db.landmark_by_id(other), lm))
                    lines.push_back(line);
            }
        // one builder per landmark set, so pieces inherited from different
        // parent cells can merge back to maximal regions
        detail::ComponentBuilder builder{visible, db.params, {}};
        builder.run_multi(std::move(polys), lines);
        dedupe_signatures(db, builder.cells, ids, next_cell_id);
    }
    int64_t next_line_id = 1;
    detail::register_pair_lines(db, next_line_id);
    db.adjacency = adjacency_graph(db);
}

// Distance from a point to the nearest dividing line or zone boundary;
// used to keep audits outside the snap band.
inline double nearest_line_distance(const Database& db, Vec2 p) {
    double best = std::numeric_limits<double>::max();
    for (const auto& line : db.lines) {
        if (line.kind == LineKind::BL) {
            const VisibilityZone* z = db.zone_by_id(line.lm_a);
            if (!z) continue;
            for (const auto& poly : z->polygon)
                best = std::min(best, std::fabs(signed_boundary_distance(poly, p)));
        } else {
            best = std::min(best, line.distance_to(p));
        }
    }
    return best;
}

// Interior containment first; boundary points fall back to the covering
// cell with the lowest id.
inline const PlaceCell* cell_containing(const Database& db, Vec2 p) {
    for (const auto& cell : db.cells)
        if (contains_point(cell.polygon, p)) return &cell;
    const PlaceCell* best = nullptr;
    for (const auto& cell : db.cells)
        if (bg::covered_by(to_bpoint(p), cell.polygon))
            if (!best || cell.cell_id < best->cell_id) best = &cell;
    return best;
}

}  // namespace qps
