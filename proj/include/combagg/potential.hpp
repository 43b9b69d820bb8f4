#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "combagg/lattice.hpp"

namespace combagg {

// Raised when a numerical routine cannot meet its contract (tolerance, caps).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace combagg

namespace combagg::potential {

/// Real-valued function on a region; zero outside by convention.
class Field {
public:
    Field() = default;
    Field(Region region, std::unordered_map<Vertex, double, VertexHash> values)
        : region_(std::move(region)), values_(std::move(values)) {}

    const Region& region() const noexcept { return region_; }
    double at(Vertex v) const {
        auto it = values_.find(v);
        return it == values_.end() ? 0.0 : it->second;
    }
    const std::unordered_map<Vertex, double, VertexHash>& values() const noexcept {
        return values_;
    }

private:
    Region region_;
    std::unordered_map<Vertex, double, VertexHash> values_;
};

// CSV "x,y,value", 17 significant digits, sorted by (x, y).
void write_field_csv(std::ostream& out, const std::vector<std::pair<Vertex, double>>& rows);

/// Dirichlet Laplacian of one finite region, prepared for repeated solves.
///
/// Every tooth segment is a path, so it is eliminated in closed form onto its
/// backbone vertex; what remains is a tridiagonal system along each backbone
/// run. Arithmetic is carried in long double. Cost per solve is O(|region|).
class DirichletSystem {
public:
    explicit DirichletSystem(const Region& region);

    GraphKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return vertices_.size(); }
    const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
    // -1 when v is outside the region
    std::ptrdiff_t index_of(Vertex v) const;
    // Neighbor indices in rotor order; -1 marks a neighbor outside the region.
    const std::array<std::ptrdiff_t, 4>& neighbor_indices(std::size_t i) const {
        return nbr_[i];
    }
    int degree_at(std::size_t i) const { return degree(vertices_[i], kind_); }

    // Solves (Laplacian phi)(v) = rhs[v] on the region with phi = 0 outside.
    std::vector<long double> solve(std::span<const long double> rhs) const;

    // max |Laplacian(phi) - rhs| over the region.
    long double residual(std::span<const long double> phi,
                         std::span<const long double> rhs) const;

private:
    struct Column {
        std::int64_t x;
        std::size_t begin, end;   // slice of vertices_
        std::ptrdiff_t backbone;  // index of (x, 0), or -1
    };

    GraphKind kind_;
    std::vector<Vertex> vertices_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::vector<std::array<std::ptrdiff_t, 4>> nbr_;
    std::vector<Column> columns_;
};

inline constexpr double kDefaultTolerance = 1e-10;

// Solves the Dirichlet problem and checks ||residual||_inf <= tol * max(1, ||phi||_inf).
Field dirichlet_solve(const Region& region, const std::function<double(Vertex)>& rhs,
                      double tol = kDefaultTolerance);

// G_region(y, .): expected visits before the walk from y leaves the region.
Field stopped_green(const Region& region, Vertex y, double tol = kDefaultTolerance);

// h_y = G(y, .)/d(.) on the system's vertex order.
std::vector<long double> green_over_degree(const DirichletSystem& sys, Vertex y);

// Green function on the integer line killed on leaving [-b, b], at (y, y).
double interval_green(std::int64_t b, std::int64_t y);

/// Closed-form solution g_n of the (-1 - n delta_o)/d Dirichlet problem on the ball.
namespace closed_form {

struct Coefficients {
    double n;
    double K;  // k n^{1/3}, the shift that moves the origin to the left tip
    double b;  // free parameter of c1 fixed by the centre condition
};

Coefficients coefficients(double n);
double c1(const Coefficients& c, double xs);
double c2(const Coefficients& c, double xs);
// g in the shifted frame: xs measured from the left tip, y >= 0
double g_shifted(const Coefficients& c, double xs, double y);
double g(double n, Vertex v);
// gamma_n / g_n, the asymptotic counterpart of f_n / g_n
double lambda(double n, Vertex v);

}  // namespace closed_form

/// f_n and g_n solved numerically on ball_region(n).
struct BallPotentials {
    double n;
    Region ball;
    Field f;  // rhs (1 - n delta_o)/d
    Field g;  // rhs (-1 - n delta_o)/d
};

BallPotentials ball_potentials(double n);

// f_n / g_n at v; throws std::domain_error when g_n(v) <= 0.
double lambda_ratio(const BallPotentials& p, Vertex v);
double lambda_ratio(double n, Vertex v);

// B_{n,eps}: |x| <= (1-eps) k n^{1/3}, |y| <= (1-eps) l (n^{1/3} - |x|/k)^2
bool in_shrunk_ball(double n, double eps, Vertex v);
Region shrunk_ball_region(double n, double eps);

/// Generating-function quantities of the comb walk at 0 < z < 1.
struct KernelPoint {
    double z;
    double F1;  // first passage along a tooth
    double F2;  // first passage along the backbone
    double G;   // G(o, o | z)
};

KernelPoint kernel_eval(double z);
// A(x, o | z) = G(o,o|z) (1 - F1^{|x.y|} F2^{|x.x|})
double A_gf(Vertex x, double z);

// Power-series coefficients of G(o, o | z) up to z^{t_max}, from the radical form.
std::vector<double> green_series(int t_max);

// P_o[X_t = o] for t = 0..t_max by forward evolution on |x|, |y| <= t_max.
std::vector<double> return_prob_dp(int t_max);

}  // namespace combagg::potential
