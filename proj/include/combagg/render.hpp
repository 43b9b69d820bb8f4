#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "combagg/lattice.hpp"

namespace combagg::render {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// "ball:N" -> N. Throws std::invalid_argument on anything else.
double parse_overlay(const std::string& spec);

/// Closed polygon tracing |x|/k + sqrt(|y|/l) = n^{1/3}, counter-clockwise,
/// in lattice coordinates (y up). `per_unit` samples per unit of x.
std::vector<Point> ball_outline(double n, int per_unit = 4);

// Even-odd rule; points on an edge count as inside.
bool inside_polygon(const std::vector<Point>& poly, Point p);

struct SvgOptions {
    std::optional<double> overlay_n;
    double cell = 4.0;  // pixels per lattice unit
};

// One unit square per vertex, y axis pointing up. Output bytes depend only
// on the region and the options.
void write_svg(std::ostream& out, const Region& region, const SvgOptions& options = {});
void write_svg(const std::string& path, const Region& region, const SvgOptions& options = {});

}  // namespace combagg::render
