#include <catch2/catch_amalgamated.hpp>

#include "qps/minhash.hpp"
#include "qps/signature.hpp"

using namespace qps;

namespace {

Landmark lm(int64_t id, char type, Vec2 at) {
    Landmark l;
    l.id = id;
    l.type_id = type;
    l.type_name = std::string(1, type);
    l.centre = at;
    l.max_range = 30.0;
    return l;
}

}  // namespace

TEST_CASE("single landmark signature") {
    auto s = observe_signature({0, 0}, {lm(1, 'G', {3, 4})});
    CHECK(s.types == "G");
    CHECK(s.ro.empty());
    CHECK(s.ra.empty());
    CHECK(s.enclosed == 0);
    CHECK(to_text(s) == "G|||0");
}

TEST_CASE("three-landmark scene matches the hand-built configuration") {
    // constructed so the full form reads <ABC, 115, 000>: bearings 30/60/90,
    // r(A,B)=r(A,C)=1, r(B,C)=5, every angle acute
    Vec2 A{0.5, std::sqrt(3.0) / 2.0};
    Vec2 B{4.330127018922193, 2.5};
    Vec2 C{2.5, 0.0};
    std::vector<Landmark> lms = {lm(1, 'A', A), lm(2, 'B', B), lm(3, 'C', C)};

    auto full = observe_signature({0, 0}, lms, SignatureForm::full);
    CHECK(full.types == "ABC");
    CHECK(full.ro == std::vector<uint8_t>{1, 1, 5});
    CHECK(full.ra == std::vector<uint8_t>{0, 0, 0});
    CHECK(full.enclosed == 0);

    auto simplified = adjacent_from_full(full);
    CHECK(simplified.ro == std::vector<uint8_t>{1, 5});
    CHECK(simplified.ra == std::vector<uint8_t>{0, 0});
    CHECK(simplified == observe_signature({0, 0}, lms, SignatureForm::simplified));
}

TEST_CASE("observation agrees with an independent pairwise recomputation") {
    SplitMix64 rng(40);
    for (int trial = 0; trial < 200; ++trial) {
        Vec2 viewer{rng.next_unit() * 10 - 5, rng.next_unit() * 10 - 5};
        std::vector<Landmark> lms;
        for (int i = 0; i < 5; ++i) {
            Vec2 p{rng.next_unit() * 40 - 20, rng.next_unit() * 40 - 20};
            if (distance(p, viewer) < 0.5) p.x += 1.0;
            lms.push_back(lm(i + 1, static_cast<char>('A' + i), p));
        }
        auto s = observe_signature(viewer, lms, SignatureForm::simplified);

        // oracle: sort by bearing independently, recompute every relation
        std::vector<size_t> order(lms.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            double ba = bearing_deg(viewer, lms[a].centre);
            double bb = bearing_deg(viewer, lms[b].centre);
            if (ba != bb) return ba < bb;
            return distance(viewer, lms[a].centre) < distance(viewer, lms[b].centre);
        });
        // locate the observed rotation inside the oracle's cyclic order
        std::string cyc;
        for (size_t i : order) cyc += lms[i].type_id;
        std::string doubled = cyc + cyc;
        bool is_rotation = doubled.find(s.types) != std::string::npos;
        CHECK(is_rotation);

        size_t n = lms.size();
        bool reproduced = false;
        for (size_t rot = 0; rot < n && !reproduced; ++rot) {
            std::string cand;
            for (size_t i = 0; i < n; ++i) cand += lms[order[(rot + i) % n]].type_id;
            if (cand != s.types) continue;
            bool all_match = true;
            for (size_t i = 0; i + 1 < n; ++i) {
                Vec2 a = lms[order[(rot + i) % n]].centre;
                Vec2 b = lms[order[(rot + i + 1) % n]].centre;
                if (s.ro[i] != relative_orientation(viewer, a, b)) all_match = false;
                uint8_t ra = static_cast<uint8_t>(to_digit(qualitative_angle(viewer, a, b)) - '0');
                if (s.ra[i] != ra) all_match = false;
            }
            reproduced = all_match;
        }
        CHECK(reproduced);
    }
}

TEST_CASE("enclosed viewers get the lexicographically least rotation") {
    // viewer strictly inside a triangle of landmarks
    std::vector<Landmark> lms = {lm(1, 'C', {0, 5}), lm(2, 'A', {5, -3}), lm(3, 'B', {-5, -3})};
    auto s = observe_signature({0, 0}, lms);
    CHECK(s.enclosed == 1);
    CHECK(s.types.size() == 3);
    // lexicographic least rotation must start at 'A'
    CHECK(s.types[0] == 'A');
}

TEST_CASE("cyclic equality finds the rotation offset") {
    PlaceSignature s1;
    s1.types = "ABC";
    s1.ro = {1, 3};
    s1.ra = {0, 1};
    s1.enclosed = 1;

    PlaceSignature s2;  // rotation by 1: types BCA, shares cyclic pair (B,C)
    s2.types = "BCA";
    s2.ro = {3, 5};  // pair (B,C) keeps ro=3; pair (C,A) is the wrap, free
    s2.ra = {1, 0};
    s2.enclosed = 1;

    auto k = cyclically_equal(s1, s2);
    REQUIRE(k.has_value());
    CHECK(*k == 1);

    PlaceSignature not_rot = s1;
    not_rot.types = "ACB";
    CHECK_FALSE(cyclically_equal(s1, not_rot).has_value());

    PlaceSignature longer = s1;
    longer.types = "ABCD";
    longer.ro = {1, 3, 5};
    longer.ra = {0, 1, 0};
    CHECK_FALSE(cyclically_equal(s1, longer).has_value());

    // relation mismatch on a shared pair blocks the match
    PlaceSignature bad = s2;
    bad.ro[0] = 5;
    CHECK_FALSE(cyclically_equal(s1, bad).has_value());

    // non-enclosed signatures only match exactly
    PlaceSignature f1 = s1, f2 = s2;
    f1.enclosed = f2.enclosed = 0;
    CHECK_FALSE(cyclically_equal(f1, f2).has_value());
    CHECK(cyclically_equal(f1, f1) == 0);
}

TEST_CASE("cyclic equality is an equivalence on consistent rotations") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        size_t n = 3 + static_cast<size_t>(rng.next_unit() * 5);
        std::string types;
        std::vector<uint8_t> cyc_ro(n), cyc_ra(n);
        for (size_t i = 0; i < n; ++i) {
            types += static_cast<char>('A' + static_cast<int>(rng.next_unit() * 10));
            cyc_ro[i] = static_cast<uint8_t>("135"[static_cast<int>(rng.next_unit() * 3)] - '0');
            cyc_ra[i] = static_cast<uint8_t>(rng.next_unit() < 0.5 ? 0 : 1);
        }
        auto rotation = [&](size_t k) {
            PlaceSignature s;
            s.enclosed = 1;
            for (size_t i = 0; i < n; ++i) s.types += types[(k + i) % n];
            for (size_t i = 0; i + 1 < n; ++i) {
                s.ro.push_back(cyc_ro[(k + i) % n]);
                s.ra.push_back(cyc_ra[(k + i) % n]);
            }
            return s;
        };
        size_t ka = static_cast<size_t>(rng.next_unit() * n);
        size_t kb = static_cast<size_t>(rng.next_unit() * n);
        size_t kc = static_cast<size_t>(rng.next_unit() * n);
        PlaceSignature a = rotation(ka), b = rotation(kb), c = rotation(kc);
        CHECK(cyclically_equal(a, a) == 0);                      // reflexive
        auto ab = cyclically_equal(a, b);
        auto ba = cyclically_equal(b, a);
        CHECK(ab.has_value() == ba.has_value());                 // symmetric
        auto bc = cyclically_equal(b, c);
        auto ac = cyclically_equal(a, c);
        if (ab && bc) CHECK(ac.has_value());                     // transitive
    }
}

TEST_CASE("adjacent extraction from the full ordering") {
    PlaceSignature full;
    full.form = SignatureForm::full;
    full.types = "ABC";
    full.ro = {1, 3, 5};  // pairs 12, 13, 23
    full.ra = {0, 1, 0};
    auto s = adjacent_from_full(full);
    CHECK(s.ro == std::vector<uint8_t>{1, 5});  // positions 1 and 3
    CHECK(s.ra == std::vector<uint8_t>{0, 0});

    PlaceSignature full4;
    full4.form = SignatureForm::full;
    full4.types = "ABCD";
    full4.ro = {1, 3, 5, 1, 3, 5};  // 12,13,14,23,24,34
    full4.ra = {0, 0, 0, 1, 1, 1};
    auto s4 = adjacent_from_full(full4);
    CHECK(s4.ro == std::vector<uint8_t>{1, 1, 5});  // positions 1, 4, 6
    CHECK(s4.ra == std::vector<uint8_t>{0, 1, 1});

    PlaceSignature two;
    two.form = SignatureForm::full;
    two.types = "AB";
    two.ro = {3};
    two.ra = {1};
    auto s2 = adjacent_from_full(two);
    CHECK(s2.ro == two.ro);
    CHECK(s2.ra == two.ra);

    PlaceSignature wrong;
    wrong.types = "AB";
    wrong.ro = {3};
    wrong.ra = {1};
    CHECK_THROWS_AS(adjacent_from_full(wrong), DataError);
}

TEST_CASE("signature text round trip") {
    PlaceSignature s;
    s.types = "ABC";
    s.ro = {1, 5};
    s.ra = {0, 1};
    s.enclosed = 0;
    CHECK(to_text(s) == "ABC|1 5|0 1|0");
    CHECK(signature_from_text(to_text(s)) == s);

    PlaceSignature full;
    full.form = SignatureForm::full;
    full.types = "ABC";
    full.ro = {1, 1, 5};
    full.ra = {0, 0, 0};
    full.enclosed = 0;
    CHECK(to_text(full) == "F:ABC|1 1 5|0 0 0|0");
    CHECK(signature_from_text(to_text(full)) == full);

    CHECK_THROWS_AS(signature_from_text("ABC|1 5|0 1"), ParseError);
    CHECK_THROWS_AS(signature_from_text("ABC|1 9 5|0 1 0|0"), ParseError);
    CHECK_THROWS_AS(signature_from_text("ABC|1 5|0 1|2"), ParseError);
    CHECK_THROWS_AS(signature_from_text("ABC|1|0|0"), ParseError);
}
