#include <doctest.h>

#include "devoc/error.hpp"
#include "devoc/features.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace devoc;

namespace {

Skeleton canvas() { return Skeleton{BinaryImage(100, 100)}; }

Skeleton plus_at(int r, int c) {
    Skeleton s = canvas();
    for (int k = -3; k <= 3; ++k) {
        s.image.set(r + k, c);
        s.image.set(r, c + k);
    }
    return s;
}

} // namespace

TEST_CASE("tile_of") {
    CHECK(tile_of(0, 0) == 0);
    CHECK(tile_of(99, 99) == 15);
    CHECK(tile_of(25, 24) == 4);
    CHECK(tile_of(24, 25) == 1);
    CHECK_THROWS_AS(tile_of(100, 0), Error);
    CHECK_THROWS_AS(tile_of(0, -1), Error);

    std::array<int, 16> area{};
    for (int r = 0; r < 100; ++r)
        for (int c = 0; c < 100; ++c) ++area[tile_of(r, c)];
    for (int a : area) CHECK(a == 625);
}

TEST_CASE("find_feature_points") {
    CHECK(find_feature_points(canvas()).empty());

    const Skeleton plus = plus_at(37, 37);
    const auto pts = find_feature_points(plus);
    int inter = 0, ends = 0;
    for (const FeaturePoint& p : pts) {
        if (p.kind == FeatureKind::Intersection) {
            ++inter;
            CHECK(p.position == Point{37, 37});
        } else {
            ++ends;
        }
        CHECK(oracle::neighbors(plus.image, p.position.row, p.position.col) ==
              (p.kind == FeatureKind::Intersection ? 4 : 1));
    }
    CHECK(inter == 1);
    CHECK(ends == 4);

    Skeleton tee = canvas();
    for (int c = 20; c < 30; ++c) tee.image.set(50, c);
    for (int r = 51; r < 60; ++r) tee.image.set(r, 25);
    const auto tp = find_feature_points(tee);
    REQUIRE(tp.size() == 4);
    CHECK(std::count_if(tp.begin(), tp.end(), [](const FeaturePoint& p) {
              return p.kind == FeatureKind::Intersection && p.position == Point{50, 25};
          }) == 1);

    Skeleton line = canvas();
    for (int c = 20; c < 30; ++c) line.image.set(50, c);
    const auto lp = find_feature_points(line);
    CHECK(lp.size() == 2);
    for (const auto& p : lp) CHECK(p.kind == FeatureKind::OpenEnd);
}

TEST_CASE("extract_features") {
    for (int v : extract_features(canvas())) CHECK(v == 0);

    const FeatureVector plus = extract_features(plus_at(37, 37));
    for (int i = 0; i < kFeatureCount; ++i) CHECK(plus[i] == (i == 10 ? 1 : i == 11 ? 4 : 0));
    CHECK(plus == oracle::naive_features(plus_at(37, 37).image));

    Skeleton line = canvas();
    for (int c = 0; c < 100; ++c) line.image.set(12, c);
    const FeatureVector lv = extract_features(line);
    for (int i = 0; i < kFeatureCount; ++i) CHECK(lv[i] == (i == 1 || i == 7 ? 1 : 0));

    CHECK_THROWS_AS(extract_features(Skeleton{BinaryImage(50, 100)}), Error);
}

TEST_CASE("scale_features") {
    FeatureVector v{};
    v[0] = 5;
    v[1] = 9;
    v[2] = 2;
    const auto s = scale_features(v);
    CHECK(s(0) == 1.0);
    CHECK(s(1) == 1.0);
    CHECK(s(2) == doctest::Approx(0.4));
    for (int i = 3; i < kFeatureCount; ++i) CHECK(s(i) == 0.0);
    CHECK(scale_features<float>(v)(2) == doctest::Approx(0.4f));
}

TEST_CASE("features match the naive oracle and partition the totals") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Skeleton s{oracle::random_skeleton(seed)};
        const FeatureVector v = extract_features(s);
        REQUIRE(v == oracle::naive_features(s.image));
        REQUIRE(extract_features(s) == v);
        int inter = 0, ends = 0;
        for (const FeaturePoint& p : find_feature_points(s)) (p.kind == FeatureKind::Intersection ? inter : ends)++;
        int vi = 0, ve = 0;
        for (int t = 0; t < 16; ++t) {
            vi += v[2 * t];
            ve += v[2 * t + 1];
            CHECK(v[2 * t] <= 625);
        }
        CHECK(vi == inter);
        CHECK(ve == ends);
        for (int r = 0; r < 100; ++r)
            for (int c = 0; c < 100; ++c)
                if (s.image(r, c)) CHECK(neighbor_count(s.image, r, c) < 8);
    }
}
