#include "doctest.h"

#include <cmath>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "combagg/render.hpp"
#include "combagg/sandpile.hpp"
#include "combagg/shape.hpp"

using namespace combagg;

namespace {

std::string svg_of(const Region& r, render::SvgOptions opt = {}) {
    std::ostringstream os;
    render::write_svg(os, r, opt);
    return os.str();
}

struct Parsed {
    std::vector<render::Point> centers;  // pixel coordinates of the vertex squares
    std::vector<render::Point> path;
};

Parsed parse_svg(const std::string& svg) {
    Parsed p;
    static const std::regex rect(
        R"re(<rect x="([-0-9.]+)" y="([-0-9.]+)" width="([0-9.]+)" height="([0-9.]+)"/>)re");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), rect); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        p.centers.push_back({std::stod(m[1]) + std::stod(m[3]) / 2, std::stod(m[2]) + std::stod(m[4]) / 2});
    }
    auto d = svg.find(" d=\"");
    if (d != std::string::npos) {
        std::string body = svg.substr(d + 4, svg.find('"', d + 4) - d - 4);
        static const std::regex pt(R"re([ML]([-0-9.]+),([-0-9.]+))re");
        for (auto it = std::sregex_iterator(body.begin(), body.end(), pt); it != std::sregex_iterator(); ++it)
            p.path.push_back({std::stod((*it)[1]), std::stod((*it)[2])});
    }
    return p;
}

// Crossing-number test, written separately from the library's.
bool crosses_odd(const std::vector<render::Point>& poly, render::Point q) {
    int crossings = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        auto a = poly[i], b = poly[(i + 1) % poly.size()];
        if (a.y > b.y) std::swap(a, b);
        if (q.y < a.y || q.y >= b.y) continue;
        double t = (q.y - a.y) / (b.y - a.y);
        if (a.x + t * (b.x - a.x) > q.x) ++crossings;
    }
    return crossings % 2 == 1;
}

}  // namespace

TEST_CASE("overlay argument") {
    CHECK(render::parse_overlay("ball:1000") == 1000.0);
    CHECK(render::parse_overlay("ball:2.5e3") == 2500.0);
    CHECK_THROWS_AS(render::parse_overlay("disk:10"), std::invalid_argument);
    CHECK_THROWS_AS(render::parse_overlay("ball:"), std::invalid_argument);
    CHECK_THROWS_AS(render::parse_overlay("ball:-3"), std::invalid_argument);
    CHECK_THROWS_AS(render::parse_overlay("ball:10x"), std::invalid_argument);
}

TEST_CASE("outline lies on the ball boundary") {
    for (double n : {10.0, 1e3, 1e5}) {
        auto poly = render::ball_outline(n);
        REQUIRE(poly.size() > 8);
        for (const auto& p : poly) {
            double r = std::abs(p.x) / shape::kBackboneRadius + std::sqrt(std::abs(p.y) / shape::kToothRadius);
            CHECK(r == doctest::Approx(std::cbrt(n)).epsilon(1e-12));
        }
        // counter-clockwise: positive shoelace area, close to the ball's lattice count
        double area = 0.0;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const auto& a = poly[i];
            const auto& b = poly[(i + 1) % poly.size()];
            area += a.x * b.y - b.x * a.y;
        }
        area /= 2.0;
        CHECK(area > 0.0);
        // exact area: 2 * integral of l (c - |x|/k)^2 over |x| <= k c = (4/3) k l n
        double exact = 4.0 / 3.0 * shape::kBackboneRadius * shape::kToothRadius * n;
        CHECK(area == doctest::Approx(exact).epsilon(0.02));
    }
}

TEST_CASE("point in polygon") {
    std::vector<render::Point> sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    CHECK(render::inside_polygon(sq, {1, 1}));
    CHECK(render::inside_polygon(sq, {0, 1}));
    CHECK(render::inside_polygon(sq, {2, 2}));
    CHECK_FALSE(render::inside_polygon(sq, {3, 1}));
    CHECK_FALSE(render::inside_polygon(sq, {1, -0.001}));
}

TEST_CASE("single vertex") {
    Region r;
    r.insert(kOrigin);
    const std::string svg = svg_of(r);
    auto p = parse_svg(svg);
    REQUIRE(p.centers.size() == 1);
    CHECK(p.path.empty());
    CHECK(svg.find("viewBox=\"0 0 12.000 12.000\"") != std::string::npos);
    // the square is centered in a 3x3 box of lattice units
    CHECK(p.centers[0].x == doctest::Approx(6.0));
    CHECK(p.centers[0].y == doctest::Approx(6.0));
    CHECK(svg.find("<rect x=\"4.000\" y=\"4.000\" width=\"4.000\" height=\"4.000\"/>") != std::string::npos);
}

TEST_CASE("y axis points up") {
    Region r;
    r.insert({0, 0});
    r.insert({0, 3});
    auto p = parse_svg(svg_of(r, {.overlay_n = std::nullopt, .cell = 1.0}));
    REQUIRE(p.centers.size() == 2);
    // sorted order puts (0, 0) first; it must be drawn lower, at larger pixel y
    CHECK(p.centers[0].y - p.centers[1].y == doctest::Approx(3.0));
}

TEST_CASE("deterministic bytes") {
    Region a, b;
    for (int x = -5; x <= 5; ++x) a.insert({x, 0});
    for (int x = 5; x >= -5; --x) b.insert({x, 0});
    for (int y = 1; y < 4; ++y) {
        a.insert({0, y});
        b.insert({0, y});
    }
    render::SvgOptions opt{.overlay_n = 40.0};
    CHECK(svg_of(a, opt) == svg_of(a, opt));
    CHECK(svg_of(a, opt) == svg_of(b, opt));
}

TEST_CASE("overlay hugs the sandpile cluster") {
    auto res = sandpile::relax(sandpile::MassField::point(1000.0));
    auto p = parse_svg(svg_of(res.cluster, {.overlay_n = 1000.0}));
    REQUIRE(p.centers.size() == res.cluster.size());
    REQUIRE(p.path.size() > 100);
    std::size_t inside = 0;
    for (const auto& c : p.centers) inside += crosses_odd(p.path, c) ? 1 : 0;
    const double share = static_cast<double>(inside) / static_cast<double>(p.centers.size());
    MESSAGE("share inside outline: " << share);
    CHECK(share >= 0.95);
    // and not a loose outline around a much smaller cluster
    auto ball = shape::ball_region(1000.0);
    CHECK(static_cast<double>(res.cluster.size()) == doctest::Approx(static_cast<double>(ball.size())).epsilon(0.05));
}
