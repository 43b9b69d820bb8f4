#include "combagg/shape.hpp"

#include <limits>
#include <stdexcept>

namespace combagg::shape {

namespace {

double cubic(double t) { return 0.1875 * t * t * t + (5.0 / 12.0) * t; }
double cubic_slope(double t) { return 0.5625 * t * t + 5.0 / 12.0; }

}  // namespace

double solve_t(double n) {
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("solve_t: n must be positive");
    // Both (12/5) n and (16 n / 3)^{1/3} dominate the root since each cubic term is positive.
    double lo = 0.0;
    double hi = std::min(2.4 * n, std::cbrt(16.0 * n / 3.0));
    double t = hi;
    for (int iter = 0; iter < 200; ++iter) {
        double f = cubic(t) - n;
        if (f == 0.0) return t;
        if (f > 0.0) hi = t; else lo = t;
        double next = t - f / cubic_slope(t);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-16 * std::max(1.0, std::abs(t))) return next;
        t = next;
    }
    return t;
}

double solve_t_radical(double n) {
    if (!(n > 0.0)) throw std::invalid_argument("solve_t_radical: n must be positive");
    double T = std::cbrt(8.0 * std::sqrt(3.0) / 243.0 * std::sqrt(2187.0 * n * n + 125.0) +
                         8.0 / 3.0 * n);
    return T - (20.0 / 27.0) / T;
}

ShapeSpec ShapeSpec::for_mass(double n) { return {n, solve_t(n)}; }

ShapeSpec ShapeSpec::for_root(double t) { return {cubic(t), t}; }

double mass_profile_real(double x, double t) {
    x = std::abs(x);
    return (2.0 / 3.0) * x * x - t * x + (9.0 * t * t + 4.0) / 24.0;
}

double mass_profile(std::int64_t x, const ShapeSpec& spec) {
    return mass_profile_real(static_cast<double>(x), spec.t);
}

double gamma_line(double n, std::int64_t y) {
    double d = static_cast<double>(std::abs(y)) - 0.5 * n;
    return 0.5 * d * d;
}

double gamma(const ShapeSpec& spec, Vertex v) {
    return gamma_line(mass_profile(v.x, spec), v.y);
}

double gamma(double n, Vertex v) { return gamma(ShapeSpec::for_mass(n), v); }

double ball_radius(Vertex v) {
    return static_cast<double>(std::abs(v.x)) / kBackboneRadius +
           std::sqrt(static_cast<double>(std::abs(v.y)) / kToothRadius);
}

bool in_ball(double n, Vertex v) {
    if (!(n > 0.0)) throw std::invalid_argument("in_ball: n must be positive");
    return ball_radius(v) <= std::cbrt(n);
}

std::int64_t ball_tooth_height(double n, std::int64_t x) {
    if (!in_ball(n, {x, 0})) return -1;
    double rem = std::cbrt(n) - static_cast<double>(std::abs(x)) / kBackboneRadius;
    auto h = static_cast<std::int64_t>(std::floor(kToothRadius * rem * rem));
    // settle the floating-point edge against the membership test itself
    while (h > 0 && !in_ball(n, {x, h})) --h;
    while (in_ball(n, {x, h + 1})) ++h;
    return h;
}

Region ball_region(double n) {
    Region r(GraphKind::Comb2);
    auto reach = static_cast<std::int64_t>(std::floor(kBackboneRadius * std::cbrt(n))) + 1;
    for (std::int64_t x = -reach; x <= reach; ++x) {
        std::int64_t h = ball_tooth_height(n, x);
        for (std::int64_t y = -h; y <= h; ++y) r.insert({x, y});
    }
    return r;
}

Extents extents(double n) {
    double t = solve_t(n);
    return {0.75 * t, [t](double x) { return 0.5 * mass_profile_real(x, t); }};
}

}  // namespace combagg::shape
