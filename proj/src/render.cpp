#include "combagg/render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "combagg/shape.hpp"

namespace combagg::render {

double parse_overlay(const std::string& spec) {
    const std::string prefix = "ball:";
    if (spec.rfind(prefix, 0) != 0)
        throw std::invalid_argument("overlay must look like ball:N, got '" + spec + "'");
    const std::string rest = spec.substr(prefix.size());
    double n = 0.0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
    if (ec != std::errc{} || ptr != rest.data() + rest.size() || !(n > 0.0) || !std::isfinite(n))
        throw std::invalid_argument("overlay mass must be a positive number, got '" + rest + "'");
    return n;
}

std::vector<Point> ball_outline(double n, int per_unit) {
    if (!(n > 0.0)) throw std::invalid_argument("ball_outline: n must be positive");
    if (per_unit < 1) throw std::invalid_argument("ball_outline: per_unit must be >= 1");
    const double c = std::cbrt(n);
    const double reach = shape::kBackboneRadius * c;
    const auto m = std::max<long>(2, static_cast<long>(std::ceil(2.0 * reach * per_unit)));
    auto height = [&](double x) {
        double rem = std::max(0.0, c - std::abs(x) / shape::kBackboneRadius);
        return shape::kToothRadius * rem * rem;
    };
    std::vector<Point> poly;
    poly.reserve(2 * static_cast<std::size_t>(m));
    for (long i = m; i >= 0; --i) {
        double x = -reach + 2.0 * reach * static_cast<double>(i) / static_cast<double>(m);
        poly.push_back({x, height(x)});
    }
    for (long i = 1; i < m; ++i) {
        double x = -reach + 2.0 * reach * static_cast<double>(i) / static_cast<double>(m);
        poly.push_back({x, -height(x)});
    }
    return poly;
}

bool inside_polygon(const std::vector<Point>& poly, Point p) {
    constexpr double kEdge = 1e-9;
    bool inside = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = poly[j];
        const Point b = poly[i];
        const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        if (std::abs(cross) <= kEdge * std::max(1.0, len) &&
            p.x >= std::min(a.x, b.x) - kEdge && p.x <= std::max(a.x, b.x) + kEdge &&
            p.y >= std::min(a.y, b.y) - kEdge && p.y <= std::max(a.y, b.y) + kEdge)
            return true;
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xc) inside = !inside;
        }
    }
    return inside;
}

void write_svg(std::ostream& out, const Region& region, const SvgOptions& options) {
    if (!(options.cell > 0.0)) throw std::invalid_argument("write_svg: cell must be positive");
    const auto vertices = region.sorted_vertices();
    std::vector<Point> outline;
    if (options.overlay_n) outline = ball_outline(*options.overlay_n);

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto extend = [&](double x, double y) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    };
    for (const auto& v : vertices) {
        extend(static_cast<double>(v.x) - 0.5, static_cast<double>(v.y) - 0.5);
        extend(static_cast<double>(v.x) + 0.5, static_cast<double>(v.y) + 0.5);
    }
    for (const auto& p : outline) extend(p.x, p.y);
    if (vertices.empty() && outline.empty()) x0 = x1 = y0 = y1 = 0.0;
    x0 -= 1.0;
    x1 += 1.0;
    y0 -= 1.0;
    y1 += 1.0;

    const double s = options.cell;
    auto px = [&](double x) { return (x - x0) * s; };
    auto py = [&](double y) { return (y1 - y) * s; };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.3f}\" height=\"{1:.3f}\" "
        "viewBox=\"0 0 {0:.3f} {1:.3f}\">\n",
        (x1 - x0) * s, (y1 - y0) * s);
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << fmt::format("<g fill=\"#1f4e79\" data-vertices=\"{}\">\n", vertices.size());
    for (const auto& v : vertices)
        out << fmt::format("<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\"/>\n",
                           px(static_cast<double>(v.x) - 0.5), py(static_cast<double>(v.y) + 0.5), s, s);
    out << "</g>\n";
    if (!outline.empty()) {
        out << fmt::format("<path fill=\"none\" stroke=\"#d62728\" stroke-width=\"{:.3f}\" "
                           "data-ball=\"{}\" d=\"",
                           std::max(1.0, 0.25 * s), *options.overlay_n);
        for (std::size_t i = 0; i < outline.size(); ++i)
            out << fmt::format("{}{:.3f},{:.3f} ", i == 0 ? "M" : "L", px(outline[i].x),
                               py(outline[i].y));
        out << "Z\"/>\n";
    }
    out << "</svg>\n";
}

void write_svg(const std::string& path, const Region& region, const SvgOptions& options) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_svg(out, region, options);
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace combagg::render
