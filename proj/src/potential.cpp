#include "combagg/potential.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "combagg/shape.hpp"
#include "tridiagonal.hpp"

namespace combagg::potential {

void write_field_csv(std::ostream& out, const std::vector<std::pair<Vertex, double>>& rows) {
    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    out << "x,y,value\n";
    auto old = out.precision(17);
    for (const auto& [v, value] : sorted) out << v.x << ',' << v.y << ',' << value << '\n';
    out.precision(old);
}

DirichletSystem::DirichletSystem(const Region& region)
    : kind_(region.kind()), vertices_(region.sorted_vertices()) {
    index_.reserve(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) index_.emplace(pack(vertices_[i]), i);
    nbr_.resize(vertices_.size());
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        nbr_[i].fill(-1);
        auto nb = neighbors(vertices_[i], kind_);
        for (int k = 0; k < nb.count; ++k) nbr_[i][k] = index_of(nb[k]);
    }
    for (std::size_t i = 0; i < vertices_.size();) {
        Column c{vertices_[i].x, i, i, -1};
        while (c.end < vertices_.size() && vertices_[c.end].x == c.x) {
            if (vertices_[c.end].y == 0) c.backbone = static_cast<std::ptrdiff_t>(c.end);
            ++c.end;
        }
        columns_.push_back(c);
        i = c.end;
    }
}

std::ptrdiff_t DirichletSystem::index_of(Vertex v) const {
    if (kind_ == GraphKind::Line && v.y != 0) return -1;
    auto it = index_.find(pack(v));
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::vector<long double> DirichletSystem::solve(std::span<const long double> rhs) const {
    using LD = long double;
    const std::size_t n = vertices_.size();
    if (rhs.size() != n) throw std::invalid_argument("DirichletSystem::solve: rhs size mismatch");
    std::vector<LD> phi(n);
    for (std::size_t i = 0; i < n; ++i) phi[i] = LD(degree(vertices_[i], kind_)) * rhs[i];

    // Per-column reduction of the backbone equation after tooth elimination.
    struct Reduced {
        LD diag_shift = 0;  // q_up(1) + q_down(1)
        LD rhs_shift = 0;   // p_up(1) + p_down(1)
        std::size_t lo = 0, hi = 0;  // tooth run attached to the backbone: [lo, hi)
    };
    std::vector<Reduced> reduced(columns_.size());

    if (kind_ == GraphKind::Comb2) {
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            const Column& col = columns_[c];
            for (std::size_t i = col.begin; i < col.end;) {
                std::size_t j = i + 1;
                while (j < col.end && vertices_[j].y == vertices_[j - 1].y + 1) ++j;
                const auto b = col.backbone;
                if (b >= 0 && static_cast<std::size_t>(b) >= i && static_cast<std::size_t>(b) < j) {
                    auto z = static_cast<std::size_t>(b);
                    Reduced& r = reduced[c];
                    r.lo = i;
                    r.hi = j;
                    std::span<LD> up(phi.data() + z + 1, j - z - 1);
                    std::span<LD> down(phi.data() + i, z - i);
                    detail::solve_path(up);
                    detail::solve_path(down);
                    if (!up.empty()) {
                        r.rhs_shift += up.front();
                        r.diag_shift += LD(up.size()) / LD(up.size() + 1);
                    }
                    if (!down.empty()) {
                        r.rhs_shift += down.back();
                        r.diag_shift += LD(down.size()) / LD(down.size() + 1);
                    }
                } else {
                    detail::solve_path(std::span<LD>(phi.data() + i, j - i));
                }
                i = j;
            }
        }
    }

    // Backbone: tridiagonal along each run of consecutive x.
    const LD deg0 = kind_ == GraphKind::Comb2 ? 4 : 2;
    std::vector<LD> sub, diag, sup, x, scratch;
    for (std::size_t c = 0; c < columns_.size();) {
        if (columns_[c].backbone < 0) {
            ++c;
            continue;
        }
        std::size_t e = c + 1;
        while (e < columns_.size() && columns_[e].backbone >= 0 &&
               columns_[e].x == columns_[e - 1].x + 1)
            ++e;
        const std::size_t m = e - c;
        sub.assign(m, 1);
        sup.assign(m, 1);
        diag.resize(m);
        x.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            const Reduced& r = reduced[c + k];
            diag[k] = r.diag_shift - deg0;
            x[k] = phi[static_cast<std::size_t>(columns_[c + k].backbone)] - r.rhs_shift;
        }
        detail::solve_tridiagonal<LD>(sub, diag, sup, x, scratch);
        for (std::size_t k = 0; k < m; ++k) {
            const auto z = static_cast<std::size_t>(columns_[c + k].backbone);
            phi[z] = x[k];
            const Reduced& r = reduced[c + k];
            if (kind_ != GraphKind::Comb2) continue;
            // phi(y) = p(y) + q(y) phi(x, 0) with q linear from 1 at y = 0 to 0 past the end
            const LD a_up = LD(r.hi - z - 1), a_down = LD(z - r.lo);
            for (std::size_t i = z + 1; i < r.hi; ++i)
                phi[i] += (a_up + 1 - LD(i - z)) / (a_up + 1) * x[k];
            for (std::size_t i = r.lo; i < z; ++i)
                phi[i] += (a_down + 1 - LD(z - i)) / (a_down + 1) * x[k];
        }
        c = e;
    }
    return phi;
}

long double DirichletSystem::residual(std::span<const long double> phi,
                                      std::span<const long double> rhs) const {
    long double worst = 0;
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        const int d = degree(vertices_[i], kind_);
        long double s = -d * phi[i];
        for (int k = 0; k < d; ++k)
            if (nbr_[i][k] >= 0) s += phi[static_cast<std::size_t>(nbr_[i][k])];
        worst = std::max(worst, std::abs(s / d - rhs[i]));
    }
    return worst;
}

namespace {

long double sup_norm(const std::vector<long double>& v) {
    long double m = 0;
    for (auto a : v) m = std::max(m, std::abs(a));
    return m;
}

std::vector<long double> checked_solve(const DirichletSystem& sys,
                                       const std::vector<long double>& rhs, double tol) {
    auto phi = sys.solve(rhs);
    auto bound = [&] { return tol * std::max<long double>(1, sup_norm(phi)); };
    if (sys.residual(phi, rhs) <= bound()) return phi;
    // one round of refinement on the residual
    std::vector<long double> r(rhs.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const int d = sys.degree_at(i);
        long double s = -d * phi[i];
        for (int k = 0; k < d; ++k) {
            auto j = sys.neighbor_indices(i)[k];
            if (j >= 0) s += phi[static_cast<std::size_t>(j)];
        }
        r[i] = rhs[i] - s / d;
    }
    auto delta = sys.solve(r);
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += delta[i];
    long double res = sys.residual(phi, rhs);
    if (res > bound())
        throw SolverError("Dirichlet solve residual " + std::to_string(double(res)) +
                          " exceeds tolerance");
    return phi;
}

Field to_field(const Region& region, const DirichletSystem& sys,
               const std::vector<long double>& phi) {
    std::unordered_map<Vertex, double, VertexHash> values;
    values.reserve(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i)
        values.emplace(sys.vertices()[i], static_cast<double>(phi[i]));
    return Field(region, std::move(values));
}

}  // namespace

Field dirichlet_solve(const Region& region, const std::function<double(Vertex)>& rhs,
                      double tol) {
    DirichletSystem sys(region);
    std::vector<long double> b(sys.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = rhs(sys.vertices()[i]);
    return to_field(region, sys, checked_solve(sys, b, tol));
}

std::vector<long double> green_over_degree(const DirichletSystem& sys, Vertex y) {
    std::vector<long double> rhs(sys.size(), 0.0L);
    auto iy = sys.index_of(y);
    if (iy < 0) return rhs;
    rhs[static_cast<std::size_t>(iy)] = -1.0L / sys.degree_at(static_cast<std::size_t>(iy));
    return sys.solve(rhs);
}

Field stopped_green(const Region& region, Vertex y, double tol) {
    DirichletSystem sys(region);
    std::vector<long double> rhs(sys.size(), 0.0L);
    auto iy = sys.index_of(y);
    if (iy < 0) throw std::invalid_argument("stopped_green: y lies outside the region");
    rhs[static_cast<std::size_t>(iy)] = -1.0L / sys.degree_at(static_cast<std::size_t>(iy));
    auto h = checked_solve(sys, rhs, tol);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] *= sys.degree_at(i);
    return to_field(region, sys, h);
}

double interval_green(std::int64_t b, std::int64_t y) {
    if (b < 0) throw std::invalid_argument("interval_green: b must be non-negative");
    if (std::abs(y) > b) throw std::invalid_argument("interval_green: |y| exceeds b");
    const double bp = static_cast<double>(b + 1);
    const double yy = static_cast<double>(y);
    return (bp * bp - yy * yy) / bp;
}

namespace closed_form {

Coefficients coefficients(double n) {
    if (!(n > 0.0)) throw std::invalid_argument("closed_form: n must be positive");
    const double K = shape::kBackboneRadius * std::cbrt(n);
    return {n, K, (4.0 * K * K * K + 5.0 * K + 9.0 * n) / (18.0 * (1.0 + 3.0 * K * K))};
}

double c1(const Coefficients& c, double xs) {
    return -xs * xs * xs * xs / 18.0 + c.b * xs * xs * xs - xs * xs / 36.0;
}

double c2(const Coefficients& c, double xs) {
    // (1/2)(x^2/3 - 1) - 3 c1(x)/x^2 with the division carried out
    return xs * xs / 3.0 - 3.0 * c.b * xs - 5.0 / 12.0;
}

double g_shifted(const Coefficients& c, double xs, double y) {
    return 0.5 * (y - y * y) + c1(c, xs) + y * c2(c, xs);
}

double g(double n, Vertex v) {
    auto c = coefficients(n);
    return g_shifted(c, c.K - static_cast<double>(std::abs(v.x)),
                     static_cast<double>(std::abs(v.y)));
}

double lambda(double n, Vertex v) { return shape::gamma(n, v) / g(n, v); }

}  // namespace closed_form

BallPotentials ball_potentials(double n) {
    Region ball = shape::ball_region(n);
    DirichletSystem sys(ball);
    std::vector<long double> rf(sys.size()), rg(sys.size());
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const long double d = sys.degree_at(i);
        const long double point = sys.vertices()[i] == kOrigin ? n : 0.0L;
        rf[i] = (1.0L - point) / d;
        rg[i] = (-1.0L - point) / d;
    }
    auto f = checked_solve(sys, rf, kDefaultTolerance);
    auto g = checked_solve(sys, rg, kDefaultTolerance);
    return {n, ball, to_field(ball, sys, f), to_field(ball, sys, g)};
}

double lambda_ratio(const BallPotentials& p, Vertex v) {
    const double g = p.g.at(v);
    if (!(g > 0.0)) throw std::domain_error("lambda_ratio: g_n vanishes at the vertex");
    return p.f.at(v) / g;
}

double lambda_ratio(double n, Vertex v) { return lambda_ratio(ball_potentials(n), v); }

bool in_shrunk_ball(double n, double eps, Vertex v) {
    const double r = std::cbrt(n);
    const double ax = static_cast<double>(std::abs(v.x));
    if (ax > (1.0 - eps) * shape::kBackboneRadius * r) return false;
    const double rem = r - ax / shape::kBackboneRadius;
    return static_cast<double>(std::abs(v.y)) <= (1.0 - eps) * shape::kToothRadius * rem * rem;
}

Region shrunk_ball_region(double n, double eps) {
    Region out(GraphKind::Comb2);
    shape::ball_region(n).for_each([&](Vertex v) {
        if (in_shrunk_ball(n, eps, v)) out.insert(v);
    });
    return out;
}

KernelPoint kernel_eval(double z) {
    if (!(z > 0.0 && z < 1.0)) throw std::invalid_argument("kernel_eval: z must lie in (0, 1)");
    const double one_minus_z2 = (1.0 - z) * (1.0 + z);
    const double s = std::sqrt(one_minus_z2);
    const double w = one_minus_z2 + s;
    KernelPoint k;
    k.z = z;
    k.F1 = (1.0 - s) / z;
    k.F2 = (1.0 + s - std::sqrt(2.0) * std::sqrt(w)) / z;
    k.G = std::sqrt(2.0) / std::sqrt(w);
    return k;
}

double A_gf(Vertex x, double z) {
    auto k = kernel_eval(z);
    return k.G * (1.0 - std::pow(k.F1, static_cast<double>(std::abs(x.y))) *
                            std::pow(k.F2, static_cast<double>(std::abs(x.x))));
}

namespace {

// b = a^alpha for a power series with a[0] != 0.
std::vector<long double> series_pow(const std::vector<long double>& a, long double alpha) {
    std::vector<long double> b(a.size(), 0.0L);
    if (a.empty()) return b;
    b[0] = std::pow(a[0], alpha);
    for (std::size_t m = 1; m < a.size(); ++m) {
        long double s = 0;
        for (std::size_t k = 1; k <= m; ++k)
            s += ((alpha + 1) * static_cast<long double>(k) - static_cast<long double>(m)) * a[k] *
                 b[m - k];
        b[m] = s / (static_cast<long double>(m) * a[0]);
    }
    return b;
}

}  // namespace

std::vector<double> green_series(int t_max) {
    if (t_max < 0) throw std::invalid_argument("green_series: t_max must be non-negative");
    const std::size_t len = static_cast<std::size_t>(t_max) + 1;
    std::vector<long double> one_minus_z2(len, 0.0L);
    one_minus_z2[0] = 1;
    if (len > 2) one_minus_z2[2] = -1;
    auto s = series_pow(one_minus_z2, 0.5L);
    std::vector<long double> w(len);
    for (std::size_t i = 0; i < len; ++i) w[i] = one_minus_z2[i] + s[i];
    auto inv = series_pow(w, -0.5L);
    std::vector<double> out(len);
    for (std::size_t i = 0; i < len; ++i) out[i] = static_cast<double>(std::sqrt(2.0L) * inv[i]);
    return out;
}

std::vector<double> return_prob_dp(int t_max) {
    if (t_max < 0) throw std::invalid_argument("return_prob_dp: t_max must be non-negative");
    const std::int64_t T = t_max;
    const std::int64_t W = 2 * T + 1;
    auto at = [&](std::int64_t x, std::int64_t y) {
        return static_cast<std::size_t>((x + T) * W + (y + T));
    };
    std::vector<long double> cur(static_cast<std::size_t>(W * W), 0.0L), next(cur.size());
    cur[at(0, 0)] = 1;
    std::vector<double> out{1.0};
    for (std::int64_t t = 1; t <= T; ++t) {
        std::fill(next.begin(), next.end(), 0.0L);
        // mass present at step t-1 lies within distance t-1 of the origin
        const std::int64_t r = t - 1;
        for (std::int64_t x = -r; x <= r; ++x) {
            for (std::int64_t y = -(r - std::abs(x)); y <= r - std::abs(x); ++y) {
                const long double p = cur[at(x, y)];
                if (p == 0) continue;
                const Vertex v{x, y};
                auto nb = neighbors(v, GraphKind::Comb2);
                const long double share = p / nb.count;
                for (Vertex w : nb) next[at(w.x, w.y)] += share;
            }
        }
        cur.swap(next);
        out.push_back(static_cast<double>(cur[at(0, 0)]));
    }
    return out;
}

}  // namespace combagg::potential
