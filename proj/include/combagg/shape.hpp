#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "combagg/lattice.hpp"

namespace combagg::shape {

// Radii of the limit shape |x|/k + sqrt(|y|/l) <= n^{1/3}.
inline const double kBackboneRadius = std::cbrt(1.5 * 1.5);  // (3/2)^{2/3}
inline const double kToothRadius = 0.5 * std::cbrt(1.5);     // (1/2)(3/2)^{1/3}

/// Total mass n together with the root t of n = (3/16) t^3 + (5/12) t.
struct ShapeSpec {
    double n = 0.0;
    double t = 0.0;

    static ShapeSpec for_mass(double n);
    static ShapeSpec for_root(double t);
};

/// Real root of n = (3/16) t^3 + (5/12) t, by bracketed Newton iteration.
double solve_t(double n);

/// Same root from the Cardano radical; loses digits for small n.
double solve_t_radical(double n);

// Mass that ends up on the tooth over (x, 0): (2/3)x^2 - t|x| + (9t^2 + 4)/24.
double mass_profile(std::int64_t x, const ShapeSpec& spec);
double mass_profile_real(double x, double t);

// One-dimensional odometer majorant (1/2)(|y| - n/2)^2.
double gamma_line(double n, std::int64_t y);

// Comb majorant gamma_n(x, y) = gamma_line(n_x, y).
double gamma(const ShapeSpec& spec, Vertex v);
double gamma(double n, Vertex v);

bool in_ball(double n, Vertex v);
Region ball_region(double n);

// Largest |y| of a ball vertex on the tooth over x, or -1 if (x, 0) is outside.
std::int64_t ball_tooth_height(double n, std::int64_t x);

struct Extents {
    double x_max;  // 3t/4, where gamma_n(., 0) is minimal
    std::function<double(double)> tooth_height;  // n_x / 2
};

Extents extents(double n);

// Radial coordinate |x|/k + sqrt(|y|/l); the ball of mass m is {r <= m^{1/3}}.
double ball_radius(Vertex v);

}  // namespace combagg::shape
