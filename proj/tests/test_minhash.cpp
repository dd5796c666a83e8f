#include <catch2/catch_amalgamated.hpp>

#include "qps/minhash.hpp"
#include "qps/retrieval.hpp"

using namespace qps;

namespace {

TermVector random_tc(SplitMix64& rng, size_t K, double density = 0.25) {
    TermVector v;
    v.values.assign(K, 0.0);
    for (size_t i = 0; i < K; ++i)
        if (rng.next_unit() < density)
            v.values[i] = 1.0 + std::floor(rng.next_unit() * 6.0);
    if (v.sum() == 0.0) v.values[0] = 1.0;
    return v;
}

}  // namespace

TEST_CASE("weighted minhash is deterministic and self-similar") {
    SplitMix64 rng(1);
    TermVector v = random_tc(rng, 128);
    auto s1 = weighted_minhash(v, 64, 42);
    auto s2 = weighted_minhash(v, 64, 42);
    CHECK(s1 == s2);
    CHECK(sketch_distance(s1, s2) == 0.0);
    auto s3 = weighted_minhash(v, 64, 43);
    CHECK(s1.samples != s3.samples);

    TermVector zero;
    zero.values.assign(16, 0.0);
    CHECK_THROWS_AS(weighted_minhash(zero, 8, 1), DataError);
}

TEST_CASE("weighted minhash estimates generalized Jaccard") {
    SplitMix64 rng(77);
    double total_err = 0.0;
    const int pairs = 60;
    const uint32_t n_hash = 600;
    for (int p = 0; p < pairs; ++p) {
        TermVector a = random_tc(rng, 96);
        TermVector b = random_tc(rng, 96);
        // overlap some support so similarities spread over (0,1)
        for (size_t i = 0; i < 48; ++i) b.values[i] = a.values[i];
        double exact = generalized_jaccard(a.values, b.values);
        double est = 1.0 - sketch_distance(weighted_minhash(a, n_hash, 9),
                                           weighted_minhash(b, n_hash, 9));
        total_err += std::fabs(est - exact);
    }
    CHECK(total_err / pairs <= 0.03);
}

TEST_CASE("unweighted minhash estimates set Jaccard") {
    SplitMix64 rng(88);
    const uint32_t n_hash = 600;
    double total_err = 0.0;
    const int pairs = 60;
    for (int p = 0; p < pairs; ++p) {
        TermVector a = random_tc(rng, 96);
        TermVector b = random_tc(rng, 96);
        for (size_t i = 0; i < 48; ++i) b.values[i] = a.values[i];
        auto ta = to_representation(a.values, Representation::ta);
        auto tb = to_representation(b.values, Representation::ta);
        double inter = 0, uni = 0;
        for (size_t i = 0; i < ta.size(); ++i) {
            inter += (ta[i] != 0 && tb[i] != 0) ? 1 : 0;
            uni += (ta[i] != 0 || tb[i] != 0) ? 1 : 0;
        }
        double exact = uni == 0 ? 1.0 : inter / uni;
        TermVector va{Representation::ta, ta}, vb{Representation::ta, tb};
        double est = 1.0 - sketch_distance(minhash_unweighted(va, n_hash, 4),
                                           minhash_unweighted(vb, n_hash, 4));
        total_err += std::fabs(est - exact);
    }
    CHECK(total_err / pairs <= 0.03);

    // disjoint supports collide almost never
    TermVector a, b;
    a.values.assign(64, 0.0);
    b.values.assign(64, 0.0);
    for (size_t i = 0; i < 16; ++i) a.values[i] = 1.0;
    for (size_t i = 32; i < 48; ++i) b.values[i] = 1.0;
    double d = sketch_distance(minhash_unweighted(a, 1000, 5), minhash_unweighted(b, 1000, 5));
    CHECK(1.0 - d <= 0.01);
}

TEST_CASE("sketch store round trips") {
    SplitMix64 rng(3);
    std::vector<HashSketch> sketches;
    for (int i = 0; i < 5; ++i)
        sketches.push_back(weighted_minhash(random_tc(rng, 64), 16, 7));
    std::string path = "sketches_test.bin";
    save_sketches(path, sketches, 16, 7);
    uint32_t n_hash = 0;
    uint64_t seed = 0;
    auto loaded = load_sketches(path, &n_hash, &seed);
    CHECK(n_hash == 16);
    CHECK(seed == 7);
    REQUIRE(loaded.size() == sketches.size());
    for (size_t i = 0; i < loaded.size(); ++i) CHECK(loaded[i] == sketches[i]);
    std::remove(path.c_str());
}
