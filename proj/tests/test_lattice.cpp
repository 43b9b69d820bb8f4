#include "doctest.h"

#include <random>
#include <sstream>

#include "combagg/lattice.hpp"
#include "combagg/shape.hpp"

using namespace combagg;

namespace {

std::vector<Vertex> as_vector(const Neighbors& nb) { return {nb.begin(), nb.end()}; }

}  // namespace

TEST_CASE("neighbor order") {
    CHECK(as_vector(neighbors({0, 0}, GraphKind::Comb2)) ==
          std::vector<Vertex>{{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
    CHECK(as_vector(neighbors({2, 5}, GraphKind::Comb2)) == std::vector<Vertex>{{2, 6}, {2, 4}});
    CHECK(as_vector(neighbors({3, 0}, GraphKind::Line)) == std::vector<Vertex>{{4, 0}, {2, 0}});
}

TEST_CASE("degrees") {
    CHECK(degree({0, 0}, GraphKind::Comb2) == 4);
    CHECK(degree({7, -3}, GraphKind::Comb2) == 2);
    CHECK(degree({5, 0}, GraphKind::Line) == 2);
}

TEST_CASE("adjacency is symmetric and degree matches neighbor count") {
    std::mt19937_64 gen(12345);
    std::uniform_int_distribution<std::int64_t> coord(-1000, 1000);
    std::bernoulli_distribution on_backbone(0.3);
    for (int i = 0; i < 10000; ++i) {
        Vertex v{coord(gen), on_backbone(gen) ? 0 : coord(gen)};
        auto nb = neighbors(v, GraphKind::Comb2);
        REQUIRE(static_cast<int>(nb.size()) == degree(v, GraphKind::Comb2));
        for (Vertex w : nb) {
            auto back = neighbors(w, GraphKind::Comb2);
            CHECK(std::find(back.begin(), back.end(), v) != back.end());
        }
    }
}

TEST_CASE("comb distance matches breadth-first search in a box") {
    Region box(GraphKind::Comb2);
    for (std::int64_t x = -10; x <= 10; ++x)
        for (std::int64_t y = -10; y <= 10; ++y) box.insert({x, y});
    CHECK(comb_distance({1, 3}, {1, 5}) == 2);
    CHECK(comb_distance({-1, 2}, {3, 1}) == 7);
    for (Vertex a : box.sorted_vertices()) {
        Region src(GraphKind::Comb2);
        src.insert(a);
        auto dist = bfs_distances(src, [&](Vertex w) { return box.contains(w); }, GraphKind::Comb2);
        REQUIRE(dist.size() == box.size());
        for (const auto& [b, d] : dist) REQUIRE(comb_distance(a, b) == d);
    }
}

TEST_CASE("region boundary") {
    Region single(GraphKind::Comb2);
    single.insert(kOrigin);
    auto b1 = region_boundary(single);
    CHECK(b1.outer.size() == 4);
    CHECK(b1.inner.size() == 1);
    CHECK(b1.inner.contains(kOrigin));

    Region pair(GraphKind::Comb2);
    pair.insert({0, 0});
    pair.insert({1, 0});
    CHECK(region_boundary(pair).outer.size() == 6);

    Region ball = shape::ball_region(1000);
    auto b = region_boundary(ball);
    CHECK(b.inner.is_subset_of(ball));
    bool disjoint = true;
    b.outer.for_each([&](Vertex v) { disjoint = disjoint && !ball.contains(v); });
    CHECK(disjoint);
}

TEST_CASE("region CSV round trip") {
    Region ball = shape::ball_region(300);
    std::stringstream ss;
    write_region_csv(ss, ball);
    CHECK(ss.str().rfind("x,y\n", 0) == 0);
    Region back = read_region_csv(ss, GraphKind::Comb2);
    CHECK(back == ball);
    std::stringstream bad("x,y\n1,z\n");
    CHECK_THROWS_AS(read_region_csv(bad, GraphKind::Comb2), std::invalid_argument);
    std::stringstream line_bad("x,y\n1,2\n");
    CHECK_THROWS_AS(read_region_csv(line_bad, GraphKind::Line), std::invalid_argument);
}

TEST_CASE("connectivity") {
    CHECK(shape::ball_region(1000).is_connected());
    Region gap(GraphKind::Comb2);
    gap.insert({0, 0});
    gap.insert({2, 0});
    CHECK_FALSE(gap.is_connected());
}
