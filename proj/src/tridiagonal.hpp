#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace combagg::detail {

// Thomas elimination for sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i].
// sub[0] and sup[n-1] are ignored. Intended for M-matrices (no pivoting).
template <class Real>
void solve_tridiagonal(std::span<const Real> sub, std::span<const Real> diag,
                       std::span<const Real> sup, std::span<Real> rhs_then_x,
                       std::vector<Real>& scratch) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    scratch.resize(n);
    Real m = diag[0];
    scratch[0] = sup[0] / m;
    rhs_then_x[0] /= m;
    for (std::size_t i = 1; i < n; ++i) {
        m = diag[i] - sub[i] * scratch[i - 1];
        scratch[i] = sup[i] / m;
        rhs_then_x[i] = (rhs_then_x[i] - sub[i] * rhs_then_x[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs_then_x[i] -= scratch[i] * rhs_then_x[i + 1];
}

// Path with Dirichlet ends: x[i-1] - 2 x[i] + x[i+1] = rhs[i].
// Pivots are -(i+2)/(i+1) in closed form.
template <class Real>
void solve_path(std::span<Real> rhs_then_x) {
    const std::size_t n = rhs_then_x.size();
    if (n == 0) return;
    Real prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
        prev = (rhs_then_x[i] - prev) * (-Real(i + 1) / Real(i + 2));
        rhs_then_x[i] = prev;
    }
    for (std::size_t i = n - 1; i-- > 0;)
        rhs_then_x[i] += Real(i + 1) / Real(i + 2) * rhs_then_x[i + 1];
}

}  // namespace combagg::detail
