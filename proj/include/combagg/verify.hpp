#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace combagg::verify {

/// Outcome of one acceptance routine.
struct CheckReport {
    int criterion = 0;
    std::string name;
    bool pass = false;
    nlohmann::json details;
};

nlohmann::json to_json(const CheckReport& r);

// 1: sandpile cluster against ball_region(n): boundary layer, x-extent, central tooth.
CheckReport sandpile_shape(const std::vector<double>& ns = {1e3, 1e4, 1e5}, double stop_tol = 1e-8);
// 2: gamma_n - 2 <= u_n <= gamma_n.
CheckReport odometer_sandwich(const std::vector<double>& ns = {1e3, 1e4}, double stop_tol = 1e-8);
// 3: sup odometer difference between toppling schedules.
CheckReport abelian(double n = 1e3, double stop_tol = 1e-8);
// 4: mass-profile recursions at random roots t.
CheckReport recursion_identities(int samples = 50, std::uint64_t seed = 1);
// 5: IDLA containment of ball_region(n (1 - eps)).
CheckReport idla_inner(std::int64_t n = 10'000, double eps = 0.15, int trials = 20,
                       std::uint64_t first_seed = 42, int jobs = 1);
// 6: Monte Carlo E[M] against the Green ratio.
CheckReport visit_count(double n = 200, int trials = 200, std::uint64_t seed = 1);
// 7: rotor odometer inequality.
CheckReport rotor_bound(const std::vector<std::int64_t>& ns = {500, 2000},
                        const std::vector<std::string>& presets = {"all-first", "toward-origin", "random:42"},
                        double stop_tol = 1e-8);
// 8: restricted wtilde = 2 E[d(y, X_T)] - 2 on the sandpile cluster.
CheckReport tree_identity(double n = 500, int samples = 20, std::uint64_t seed = 1);
// 9: rotor_inner_region(n) inside the rotor cluster.
CheckReport rotor_region(std::int64_t n = 10'000,
                         const std::vector<std::string>& presets = {"all-first", "toward-origin", "random:42"});
// 10: line sandpile of mass floor(n/3) inside the line rotor cluster.
CheckReport line_regular(const std::vector<std::int64_t>& ns = {999, 10'000},
                         const std::vector<std::string>& presets = {"all-first", "toward-origin"});
// 11: closed-form g_n: tooth recursion, boundary zeros, discrepancy trend.
CheckReport closed_form_g(const std::vector<double>& ns = {1e3, 1e4, 1e5}, double eps = 0.2);
// 12: min f_n/g_n on the inner boundary of B_{n,eps}.
CheckReport ratio_bound(double n = 1e5, double eps = 0.2);
// 13: series of G(o,o|z) and the potential kernel near z = 1.
CheckReport kernel(int t_max = 40);
// 14: interval Green formula against the line solver.
CheckReport interval_green(const std::vector<std::int64_t>& bs = {1, 10, 100});

/// Command-line overrides; unset fields keep each routine's defaults.
struct Overrides {
    std::optional<double> n;
    std::optional<double> eps;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<int> t_max;
    std::optional<std::string> rotors;
    int jobs = 1;
};

const std::vector<std::string>& check_names();

// Runs a named group: shape, abelian, idla-inner, rotor-bound, rotor-region,
// line-regular, kernel or green-consistency.
std::vector<CheckReport> run_check(const std::string& name, const Overrides& o = {});

// Acceptance routine for criterion 1..14 with its default parameters.
CheckReport run_criterion(int criterion, int jobs = 1);

}  // namespace combagg::verify
