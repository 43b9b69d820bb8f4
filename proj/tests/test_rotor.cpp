#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "combagg/potential.hpp"
#include "combagg/rotor.hpp"
#include "combagg/sandpile.hpp"
#include "combagg/shape.hpp"

using namespace combagg;
using namespace combagg::rotor;

namespace {

bool same_run(const RotorRun& a, const RotorRun& b) {
    return a.cluster == b.cluster && a.odometer == b.odometer && a.rotors.same_rotors(b.rotors) &&
           a.steps == b.steps;
}

Region from_list(std::initializer_list<Vertex> vs, GraphKind kind = GraphKind::Comb2) {
    Region r(kind);
    for (Vertex v : vs) r.insert(v);
    return r;
}

std::vector<RotorState> presets(GraphKind kind) {
    return {RotorState::all_first(kind), RotorState::toward_origin(kind), RotorState::random(7, kind)};
}

}  // namespace

TEST_CASE("rotor step trace at the origin") {
    RotorState s = RotorState::all_first();
    CHECK(rotor_step(kOrigin, s) == Vertex{0, 1});
    CHECK(s.index(kOrigin) == 1);
    CHECK(rotor_step(kOrigin, s) == Vertex{-1, 0});
    CHECK(rotor_step(kOrigin, s) == Vertex{0, -1});
    CHECK(rotor_step(kOrigin, s) == Vertex{1, 0});
    CHECK(s.index(kOrigin) == 0);
}

TEST_CASE("rotor step on a tooth") {
    RotorState s = RotorState::all_first();
    CHECK(rotor_step({2, 5}, s) == Vertex{2, 4});
    CHECK(s.index({2, 5}) == 1);
    CHECK(rotor_step({2, 4}, s) == Vertex{2, 3});
    CHECK(rotor_step({2, 5}, s) == Vertex{2, 6});
    CHECK(s.index({2, 4}) == 1);
}

TEST_CASE("rotor presets") {
    RotorState t = RotorState::toward_origin();
    CHECK(t.initial_index({3, 0}) == 2);
    CHECK(t.initial_index({-3, 0}) == 0);
    CHECK(t.initial_index({4, 2}) == 1);
    CHECK(t.initial_index({4, -2}) == 0);
    RotorState tl = RotorState::toward_origin(GraphKind::Line);
    CHECK(tl.initial_index({3, 0}) == 1);
    CHECK(tl.initial_index({-3, 0}) == 0);

    RotorState r1 = RotorState::random(5), r2 = RotorState::random(5);
    for (std::int64_t x = -20; x <= 20; ++x)
        for (std::int64_t y = -20; y <= 20; ++y) {
            const int i = r1.initial_index({x, y});
            CHECK(i == r2.initial_index({x, y}));
            CHECK(i >= 0);
            CHECK(i < degree({x, y}, GraphKind::Comb2));
        }

    RotorState c = RotorState::custom({{Vertex{0, 0}, 6}, {Vertex{1, 3}, 3}});
    CHECK(c.initial_index(kOrigin) == 2);
    CHECK(c.initial_index({1, 3}) == 1);
    CHECK(c.initial_index({5, 5}) == 0);

    CHECK(RotorState::from_spec("all-first").preset() == RotorPreset::AllFirst);
    CHECK(RotorState::from_spec("toward-origin").preset() == RotorPreset::TowardOrigin);
    CHECK(RotorState::from_spec("random:11").name() == "random:11");
    CHECK_THROWS_AS(RotorState::from_spec("sideways"), std::invalid_argument);
    CHECK_THROWS_AS(RotorState::from_spec("random:x"), std::invalid_argument);
}

TEST_CASE("small rotor clusters") {
    const RotorState s = RotorState::all_first();
    CHECK(rotor_aggregate(1, s).cluster == from_list({kOrigin}));
    CHECK(rotor_aggregate(2, s).cluster == from_list({kOrigin, {0, 1}}));
    CHECK(rotor_aggregate(3, s).cluster == from_list({kOrigin, {0, 1}, {-1, 0}}));
    CHECK(rotor_aggregate(1, s).odometer.empty());
    CHECK_THROWS_AS(rotor_aggregate(0, s), std::invalid_argument);
}

TEST_CASE("rotor run invariants") {
    for (GraphKind kind : {GraphKind::Comb2, GraphKind::Line})
        for (const RotorState& s : presets(kind)) {
            const RotorRun run = rotor_aggregate(400, s);
            CHECK(run.cluster.size() == 400);
            CHECK(run.cluster.contains(kOrigin));
            CHECK(run.cluster.is_connected());
            std::uint64_t total = 0;
            for (const auto& [v, m] : run.odometer) {
                CHECK(m > 0);
                total += static_cast<std::uint64_t>(m);
                CHECK(run.rotors.index(v) == (s.initial_index(v) + m) % degree(v, kind));
            }
            CHECK(total == run.steps);
            run.rotors.for_each_touched([&](Vertex v, int) { CHECK(run.emitted(v) > 0); });
            CHECK(same_run(run, rotor_aggregate(400, s)));
        }
}

TEST_CASE("routing order does not change the outcome") {
    for (GraphKind kind : {GraphKind::Comb2, GraphKind::Line})
        for (const RotorState& s : presets(kind)) {
            for (std::int64_t n : {1, 2, 5, 60, 250}) {
                const RotorRun a = rotor_aggregate(n, s);
                CHECK(same_run(a, rotor_aggregate(n, s, Routing::RoundRobin)));
                CHECK(same_run(a, rotor_aggregate(n, s, Routing::Bulk)));
            }
            CHECK(same_run(rotor_aggregate(1500, s), rotor_aggregate(1500, s, Routing::Bulk)));
        }
}

TEST_CASE("line rotor cluster is an interval") {
    for (const RotorState& s : presets(GraphKind::Line)) {
        const RotorRun run = rotor_aggregate(777, s);
        std::int64_t lo = 0, hi = 0;
        run.cluster.for_each([&](Vertex v) {
            CHECK(v.y == 0);
            lo = std::min(lo, v.x);
            hi = std::max(hi, v.x);
        });
        CHECK(hi - lo + 1 == 777);
    }
}

TEST_CASE("weight audit") {
    const AuditReport flat = weight_audit(80, RotorState::all_first(), [](Vertex) { return 1.0; });
    CHECK(flat.max_drift == 0.0);
    CHECK(flat.checkpoints > 80);

    const Region ball = shape::ball_region(100);
    const potential::Field g = potential::stopped_green(ball, kOrigin);
    auto h_o = [&](Vertex v) { return g.at(v) / degree(v, GraphKind::Comb2); };
    for (const RotorState& s : presets(GraphKind::Comb2)) {
        const AuditReport rep = weight_audit(100, s, h_o);
        CHECK(rep.max_drift <= 1e-9 * rep.scale);
    }

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::unordered_map<Vertex, double, VertexHash> field;
    for (std::int64_t x = -6; x <= 6; ++x)
        for (std::int64_t y = -6; y <= 6; ++y)
            if (gen() % 3 == 0) field[{x, y}] = val(gen);
    auto h_r = [&](Vertex v) {
        auto it = field.find(v);
        return it == field.end() ? 0.0 : it->second;
    };
    const AuditReport rep = weight_audit(50, RotorState::random(9), h_r);
    CHECK(rep.max_drift <= 1e-9 * rep.scale);

    const AuditReport line = weight_audit(60, RotorState::toward_origin(GraphKind::Line),
                                          [](Vertex v) { return 0.5 * static_cast<double>(v.x * v.x); });
    CHECK(line.max_drift <= 1e-9 * line.scale);
}

TEST_CASE("wtilde") {
    const WeightSum single = wtilde(kOrigin, from_list({kOrigin}));
    CHECK(single.full == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(single.restricted == 0.0);

    const Region ball = shape::ball_region(100);
    for (Vertex y : {kOrigin, Vertex{2, 0}, Vertex{0, 4}, Vertex{-3, -1}}) {
        const WeightSum w = wtilde(y, ball);
        CHECK(w.full >= w.restricted);
        CHECK(std::abs(w.full - w.restricted - 1.0) <= 1e-9);
    }
    CHECK_THROWS_AS(wtilde({50, 0}, ball), std::invalid_argument);
}

TEST_CASE("expected exit distance") {
    CHECK(expected_exit_distance(kOrigin, from_list({kOrigin})) == doctest::Approx(1.0).epsilon(1e-14));
    {
        // from (0,1): exit at (0,2), distance 1, with p = 1/2 + p/8, else at distance 2
        const Region r = from_list({kOrigin, {0, 1}});
        const double p = 4.0 / 7.0;
        CHECK(expected_exit_distance({0, 1}, r) == doctest::Approx(p * 1 + (1 - p) * 2).epsilon(1e-12));
    }

    const double n = 1000;
    const Region ball = shape::ball_region(n);
    const potential::DirichletSystem sys(ball);
    const auto verts = ball.sorted_vertices();
    std::mt19937_64 gen(17);
    const double reach = shape::kToothRadius * std::cbrt(n) * std::cbrt(n);
    for (int k = 0; k < 20; ++k) {
        const Vertex y = verts[gen() % verts.size()];
        const double e = expected_exit_distance(y, sys);
        CHECK(e >= 1.0);
        CHECK(e <= static_cast<double>(std::abs(y.x) + std::abs(y.y)) + reach + 1.0);
    }
}

TEST_CASE("tree identity on the sandpile cluster") {
    const auto pile = sandpile::relax(sandpile::MassField::point(500));
    const potential::DirichletSystem sys(pile.cluster);
    const auto verts = pile.cluster.sorted_vertices();
    std::mt19937_64 gen(23);
    for (int k = 0; k < 20; ++k) {
        const Vertex y = verts[gen() % verts.size()];
        const WeightSum w = wtilde(y, sys);
        CHECK(std::abs(w.restricted - (2.0 * expected_exit_distance(y, sys) - 2.0)) <= 1e-8);
        CHECK(std::abs(w.full - w.restricted - 1.0) <= 1e-9);
    }
}

TEST_CASE("rotor odometer bound") {
    CHECK(check_rotor_bound(1, RotorState::all_first()).min_slack >= 0.0);
    const BoundReport rep = check_rotor_bound(500, RotorState::all_first());
    CHECK(rep.min_slack >= -1e-6);
    CHECK(rep.checked > 400);
}

TEST_CASE("rotor inner region") {
    CHECK(rotor_inner_region(10).empty());
    const Region inner = rotor_inner_region(1e4);
    CHECK(!inner.empty());
    CHECK(inner.is_subset_of(shape::ball_region(1e4)));
    inner.for_each([&](Vertex v) {
        CHECK(inner.contains({-v.x, v.y}));
        CHECK(inner.contains({v.x, -v.y}));
    });
}

TEST_CASE("line regular check") {
    CHECK(line_regular_check(3, RotorState::all_first(GraphKind::Line)));
    CHECK(line_regular_check(1, RotorState::all_first(GraphKind::Line)));
    CHECK(line_regular_check(999, RotorState::all_first(GraphKind::Line)));
    CHECK(line_regular_check(999, RotorState::toward_origin(GraphKind::Line)));
    CHECK_THROWS_AS(line_regular_check(10, RotorState::all_first()), std::invalid_argument);
}

TEST_CASE("rotor csv round trip") {
    const RotorRun run = rotor_aggregate(200, RotorState::random(4));
    std::stringstream ss;
    write_rotor_csv(ss, run.rotors);
    const RotorState back = RotorState::custom(read_rotor_csv(ss));
    run.rotors.for_each_touched([&](Vertex v, int i) { CHECK(back.initial_index(v) == i); });

    std::istringstream tiny("x,y,index\n0,0,2\n3,1,1\n");
    const auto map = read_rotor_csv(tiny);
    CHECK(map.size() == 2);
    CHECK(map.at(kOrigin) == 2);
    std::istringstream bad("x,y,index\n0,zero,2\n");
    CHECK_THROWS_AS(read_rotor_csv(bad), std::invalid_argument);
}
