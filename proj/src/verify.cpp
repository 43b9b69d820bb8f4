#include "combagg/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "combagg/idla.hpp"
#include "combagg/potential.hpp"
#include "combagg/rotor.hpp"
#include "combagg/sandpile.hpp"
#include "combagg/shape.hpp"

namespace combagg::verify {

using nlohmann::json;

namespace {

class Stopwatch {
public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json vertex_json(Vertex v) { return json::array({v.x, v.y}); }

CheckReport make(int criterion, std::string name) {
    CheckReport r;
    r.criterion = criterion;
    r.name = std::move(name);
    r.pass = true;
    r.details = json::object();
    return r;
}

void finish(CheckReport& r, const Stopwatch& sw) {
    r.details["wall_ms"] = sw.ms();
    spdlog::info("criterion {} ({}): {} in {:.0f} ms", r.criterion, r.name, r.pass ? "pass" : "FAIL", sw.ms());
}

sandpile::SandpileResult relax_point(double n, double stop_tol) {
    sandpile::RelaxOptions opt;
    opt.stop_tol = stop_tol;
    return sandpile::relax(sandpile::MassField::point(n), opt);
}

}  // namespace

json to_json(const CheckReport& r) {
    return {{"criterion", r.criterion}, {"name", r.name}, {"pass", r.pass}, {"details", r.details}};
}

CheckReport sandpile_shape(const std::vector<double>& ns, double stop_tol) {
    Stopwatch sw;
    CheckReport rep = make(1, "sandpile shape");
    for (double n : ns) {
        Stopwatch run;
        const auto pile = relax_point(n, stop_tol);
        const double relax_ms = run.ms();
        const Region ball = shape::ball_region(n);
        const auto rim = region_boundary(ball);
        std::vector<Vertex> rim_sites;
        rim.outer.for_each([&](Vertex v) { rim_sites.push_back(v); });
        rim.inner.for_each([&](Vertex v) { rim_sites.push_back(v); });

        std::int64_t layer = 0;
        std::size_t diff = 0;
        auto scan = [&](Vertex v) {
            ++diff;
            std::int64_t best = INT64_MAX;
            for (Vertex s : rim_sites) best = std::min(best, comb_distance(v, s));
            layer = std::max(layer, best);
        };
        region_difference(pile.cluster, ball).for_each(scan);
        region_difference(ball, pile.cluster).for_each(scan);

        std::int64_t x_max = 0, h0 = 0;
        pile.cluster.for_each([&](Vertex v) {
            x_max = std::max(x_max, v.x);
            if (v.x == 0) h0 = std::max(h0, std::abs(v.y));
        });
        const double x_ref = shape::kBackboneRadius * std::cbrt(n);
        const double h_ref = shape::extents(n).tooth_height(0);
        const bool ok = layer <= 6 && std::abs(static_cast<double>(x_max) - x_ref) <= 3.0 &&
                        std::abs(static_cast<double>(h0) - h_ref) <= 3.0 && relax_ms < 120'000.0;
        rep.pass = rep.pass && ok;
        rep.details["runs"].push_back({{"n", n},
                                       {"cluster_size", pile.cluster.size()},
                                       {"symmetric_difference", diff},
                                       {"boundary_layer", layer},
                                       {"x_max", x_max},
                                       {"k_n13", x_ref},
                                       {"central_tooth", h0},
                                       {"n0_half", h_ref},
                                       {"relax_ms", relax_ms},
                                       {"pass", ok}});
    }
    finish(rep, sw);
    return rep;
}

CheckReport odometer_sandwich(const std::vector<double>& ns, double stop_tol) {
    Stopwatch sw;
    CheckReport rep = make(2, "odometer sandwich");
    for (double n : ns) {
        const auto pile = relax_point(n, stop_tol);
        const auto spec = shape::ShapeSpec::for_mass(n);
        double upper = -INFINITY, lower = INFINITY;
        for (const auto& [v, e] : pile.odometer.values())
            upper = std::max(upper, pile.odometer.normalized(v) - shape::gamma(spec, v));
        shape::ball_region(n).for_each([&](Vertex v) {
            lower = std::min(lower, pile.odometer.normalized(v) - (shape::gamma(spec, v) - 2.0));
        });
        const bool ok = upper <= 1e-6 && lower >= -1e-6;
        rep.pass = rep.pass && ok;
        rep.details["runs"].push_back(
            {{"n", n}, {"max_u_minus_gamma", upper}, {"min_u_minus_gamma_plus_2", lower}, {"pass", ok}});
    }
    finish(rep, sw);
    return rep;
}

CheckReport abelian(double n, double stop_tol) {
    using sandpile::Schedule;
    Stopwatch sw;
    CheckReport rep = make(3, "abelian property");
    const auto mu0 = sandpile::MassField::point(n);
    for (auto [a, b] : {std::pair{Schedule::SweepBox, Schedule::UnstableQueue},
                        std::pair{Schedule::ActiveSet, Schedule::UnstableQueue}}) {
        const double d = sandpile::abelian_check(mu0, a, b, stop_tol);
        const bool ok = d <= 1e-6;
        rep.pass = rep.pass && ok;
        rep.details["pairs"].push_back(
            {{"a", sandpile::to_string(a)}, {"b", sandpile::to_string(b)}, {"sup_difference", d}, {"pass", ok}});
    }
    rep.details["n"] = n;
    finish(rep, sw);
    return rep;
}

CheckReport recursion_identities(int samples, std::uint64_t seed) {
    Stopwatch sw;
    CheckReport rep = make(4, "recursion identities");
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> ut(1e-6, 100.0);
    double worst = 0;
    for (int i = 0; i < samples; ++i) {
        const auto s = shape::ShapeSpec::for_root(ut(gen));
        auto nx = [&](std::int64_t x) { return shape::mass_profile(x, s); };
        const double lhs0 = nx(0), rhs0 = s.n + 0.25 * nx(1) * nx(1) - 0.25 * nx(0) * nx(0);
        worst = std::max(worst, std::abs(lhs0 - rhs0) / std::max(1.0, std::abs(lhs0)));
        for (std::int64_t x = 1; x <= 50; ++x) {
            const double r = 0.125 * nx(x - 1) * nx(x - 1) - 0.25 * nx(x) * nx(x) + 0.125 * nx(x + 1) * nx(x + 1);
            const double scale = std::max({1.0, nx(x - 1) * nx(x - 1), nx(x + 1) * nx(x + 1)});
            worst = std::max(worst, std::abs(nx(x) - r) / scale);
        }
    }
    rep.pass = worst <= 1e-12;
    rep.details = {{"samples", samples}, {"max_relative_residual", worst}};
    finish(rep, sw);
    return rep;
}

CheckReport idla_inner(std::int64_t n, double eps, int trials, std::uint64_t first_seed, int jobs) {
    Stopwatch sw;
    CheckReport rep = make(5, "idla inner bound");
    const auto runs = idla::run_trials(n, eps, first_seed, trials, jobs);
    int contained = 0;
    double eps_all = 0;
    for (const auto& t : runs) {
        contained += t.contained;
        eps_all = std::max(eps_all, t.eps_threshold);
        rep.details["runs"].push_back({{"n", t.n},
                                       {"seed", t.seed},
                                       {"contained", t.contained},
                                       {"fraction", t.fraction},
                                       {"eps_threshold", t.eps_threshold},
                                       {"wall_ms", t.wall_ms}});
    }
    const int needed = static_cast<int>(std::ceil(0.95 * trials));
    rep.pass = contained >= needed;
    rep.details["n"] = n;
    rep.details["eps"] = eps;
    rep.details["contained"] = contained;
    rep.details["required"] = needed;
    // every run contains ball_region(n (1 - e)) for all e above this value
    rep.details["smallest_eps_all_runs"] = eps_all;
    finish(rep, sw);
    return rep;
}

CheckReport visit_count(double n, int trials, std::uint64_t seed) {
    Stopwatch sw;
    CheckReport rep = make(6, "expected visit count");
    const std::vector<Vertex> targets{{1, 0}, {0, 3}, {-4, 0}, {2, -5}, {-5, 1}};
    std::uint64_t s = seed;
    for (Vertex z : targets) {
        if (!shape::in_ball(n, z)) continue;
        const auto est = idla::estimate_M(n, z, trials, s++);
        const double exact = idla::expected_M(n, z);
        const double score = est.std_error > 0 ? std::abs(est.mean - exact) / est.std_error
                                               : (est.mean == exact ? 0.0 : INFINITY);
        const bool ok = score <= 4.0;
        rep.pass = rep.pass && ok;
        rep.details["targets"].push_back({{"z", vertex_json(z)},
                                          {"mean", est.mean},
                                          {"std_error", est.std_error},
                                          {"green_ratio", exact},
                                          {"z_score", score},
                                          {"pass", ok}});
    }
    rep.pass = rep.pass && rep.details.contains("targets");
    rep.details["n"] = n;
    rep.details["trials"] = trials;
    finish(rep, sw);
    return rep;
}

CheckReport rotor_bound(const std::vector<std::int64_t>& ns, const std::vector<std::string>& presets,
                        double stop_tol) {
    Stopwatch sw;
    CheckReport rep = make(7, "rotor odometer inequality");
    for (const auto& p : presets)
        for (std::int64_t n : ns) {
            const auto b = rotor::check_rotor_bound(n, rotor::RotorState::from_spec(p), stop_tol);
            const bool ok = b.min_slack >= -1e-6;
            rep.pass = rep.pass && ok;
            rep.details["runs"].push_back({{"preset", p},
                                           {"n", n},
                                           {"min_slack", b.min_slack},
                                           {"worst", vertex_json(b.worst)},
                                           {"checked", b.checked},
                                           {"pass", ok}});
        }
    finish(rep, sw);
    return rep;
}

CheckReport tree_identity(double n, int samples, std::uint64_t seed) {
    Stopwatch sw;
    CheckReport rep = make(8, "tree identity");
    const auto pile = relax_point(n, 1e-8);
    const potential::DirichletSystem sys(pile.cluster);
    const auto verts = pile.cluster.sorted_vertices();
    std::mt19937_64 gen(seed);
    double worst_identity = 0, worst_gap = 0;
    for (int i = 0; i < samples; ++i) {
        const Vertex y = verts[gen() % verts.size()];
        const auto w = rotor::wtilde(y, sys);
        const double e = rotor::expected_exit_distance(y, sys);
        const double id = std::abs(w.restricted - (2.0 * e - 2.0));
        const double gap = std::abs(w.full - w.restricted - 1.0);
        worst_identity = std::max(worst_identity, id);
        worst_gap = std::max(worst_gap, gap);
        rep.details["samples"].push_back({{"y", vertex_json(y)},
                                          {"restricted", w.restricted},
                                          {"full", w.full},
                                          {"expected_exit_distance", e}});
    }
    rep.pass = worst_identity <= 1e-8 && worst_gap <= 1e-9;
    rep.details["n"] = n;
    rep.details["max_identity_error"] = worst_identity;
    rep.details["max_gap_error"] = worst_gap;
    finish(rep, sw);
    return rep;
}

CheckReport rotor_region(std::int64_t n, const std::vector<std::string>& presets) {
    Stopwatch sw;
    CheckReport rep = make(9, "rotor inner region");
    const Region inner = rotor::rotor_inner_region(static_cast<double>(n));
    for (const auto& p : presets) {
        const auto run = rotor::rotor_aggregate(n, rotor::RotorState::from_spec(p));
        std::size_t missing = 0;
        inner.for_each([&](Vertex v) { missing += !run.cluster.contains(v); });
        const bool ok = missing == 0 && !inner.empty();
        rep.pass = rep.pass && ok;
        rep.details["runs"].push_back({{"preset", p}, {"missing", missing}, {"steps", run.steps}, {"pass", ok}});
    }
    rep.details["n"] = n;
    rep.details["inner_region_size"] = inner.size();
    finish(rep, sw);
    return rep;
}

CheckReport line_regular(const std::vector<std::int64_t>& ns, const std::vector<std::string>& presets) {
    Stopwatch sw;
    CheckReport rep = make(10, "line regular-graph containment");
    for (const auto& p : presets)
        for (std::int64_t n : ns) {
            const bool ok = rotor::line_regular_check(n, rotor::RotorState::from_spec(p, GraphKind::Line));
            rep.pass = rep.pass && ok;
            rep.details["runs"].push_back({{"preset", p}, {"n", n}, {"pass", ok}});
        }
    finish(rep, sw);
    return rep;
}

CheckReport closed_form_g(const std::vector<double>& ns, double eps) {
    namespace cf = potential::closed_form;
    Stopwatch sw;
    CheckReport rep = make(11, "closed form of g");
    double recursion = 0, zeros = 0;
    double prev = INFINITY;
    bool decreasing = true;
    for (double n : ns) {
        const auto c = cf::coefficients(n);
        for (std::int64_t xs = 1; xs <= static_cast<std::int64_t>(c.K); ++xs) {
            const double x = static_cast<double>(xs);
            for (double y = 1; y <= x * x / 3.0; ++y) {
                const double g = cf::g_shifted(c, x, y);
                const double r = cf::g_shifted(c, x, y + 1) + cf::g_shifted(c, x, y - 1) + 1 - 2 * g;
                recursion = std::max(recursion, std::abs(r) / std::max(1.0, std::abs(g)));
            }
        }
        for (double x : {3.0, 6.0, 9.0, 30.0})
            zeros = std::max(zeros, std::abs(cf::g_shifted(c, x, x * x / 3.0)) /
                                        std::max(1.0, std::abs(cf::c1(c, x))));

        const auto p = potential::ball_potentials(n);
        double sup = 0, scale = 0;
        shape::ball_region(n * (1.0 - eps)).for_each([&](Vertex v) {
            sup = std::max(sup, std::abs(cf::g(n, v) - p.g.at(v)));
            scale = std::max(scale, std::abs(p.g.at(v)));
        });
        const double rel = sup / scale;
        decreasing = decreasing && rel < prev;
        prev = rel;
        rep.details["discrepancy"].push_back({{"n", n}, {"sup", sup}, {"relative_sup", rel}});
    }
    rep.pass = recursion <= 1e-9 && zeros <= 1e-9 && decreasing;
    rep.details["eps"] = eps;
    rep.details["max_recursion_residual"] = recursion;
    rep.details["max_boundary_zero"] = zeros;
    rep.details["relative_sup_decreasing"] = decreasing;
    finish(rep, sw);
    return rep;
}

CheckReport ratio_bound(double n, double eps) {
    Stopwatch sw;
    CheckReport rep = make(12, "ratio bound");
    const auto p = potential::ball_potentials(n);
    const Region shrunk = potential::shrunk_ball_region(n, eps);
    double worst = INFINITY;
    Vertex where{};
    std::size_t points = 0;
    region_boundary(shrunk).inner.for_each([&](Vertex v) {
        ++points;
        const double r = potential::lambda_ratio(p, v);
        if (r < worst) {
            worst = r;
            where = v;
        }
    });
    rep.pass = points > 0 && worst >= eps / 4.0;
    rep.details = {{"n", n},      {"eps", eps},           {"min_ratio", worst},
                   {"bound", eps / 4.0}, {"argmin", vertex_json(where)}, {"inner_boundary_points", points}};
    finish(rep, sw);
    return rep;
}

CheckReport kernel(int t_max) {
    Stopwatch sw;
    CheckReport rep = make(13, "potential kernel");
    const auto series = potential::green_series(t_max);
    const auto dp = potential::return_prob_dp(t_max);
    double coeff = 0;
    for (int t = 0; t <= t_max; ++t) coeff = std::max(coeff, std::abs(series[t] - dp[t]));
    const double z = 1.0 - 1e-6;
    const double a1 = potential::A_gf({1, 0}, z);
    const double a5 = potential::A_gf({0, 5}, z);
    const bool c1 = coeff <= 1e-10, c2 = a1 >= 1.9 && a1 <= 2.0, c3 = a5 <= 0.1;
    rep.pass = c1 && c2 && c3;
    rep.details = {{"t_max", t_max},
                   {"max_coefficient_error", coeff},
                   {"series_pass", c1},
                   {"z", z},
                   {"A_1_0", a1},
                   {"A_1_0_pass", c2},
                   {"A_0_5", a5},
                   {"A_0_5_pass", c3}};
    finish(rep, sw);
    return rep;
}

CheckReport interval_green(const std::vector<std::int64_t>& bs) {
    Stopwatch sw;
    CheckReport rep = make(14, "interval Green function");
    double worst = 0;
    for (std::int64_t b : bs) {
        Region seg(GraphKind::Line);
        for (std::int64_t x = -b; x <= b; ++x) seg.insert({x, 0});
        for (std::int64_t y = -b; y <= b; ++y) {
            const double g = potential::stopped_green(seg, {y, 0}).at({y, 0});
            worst = std::max(worst, std::abs(g - potential::interval_green(b, y)) / std::max(1.0, g));
        }
    }
    rep.pass = worst <= 1e-10;
    rep.details = {{"b", bs}, {"max_relative_error", worst}};
    finish(rep, sw);
    return rep;
}

const std::vector<std::string>& check_names() {
    static const std::vector<std::string> names{"shape",        "abelian",      "idla-inner", "rotor-bound",
                                                "rotor-region", "line-regular", "kernel",     "green-consistency"};
    return names;
}

std::vector<CheckReport> run_check(const std::string& name, const Overrides& o) {
    const double tol = o.tol.value_or(1e-8);
    const std::uint64_t seed = o.seed.value_or(1);
    auto ns = [&](std::vector<double> dflt) { return o.n ? std::vector<double>{*o.n} : dflt; };
    auto ins = [&](std::vector<std::int64_t> dflt) {
        return o.n ? std::vector<std::int64_t>{std::llround(*o.n)} : dflt;
    };
    auto presets = [&](std::vector<std::string> dflt) {
        return o.rotors ? std::vector<std::string>{*o.rotors} : dflt;
    };
    if (name == "shape")
        return {sandpile_shape(ns({1e3, 1e4, 1e5}), tol), odometer_sandwich(ns({1e3, 1e4}), tol),
                recursion_identities(50, seed)};
    if (name == "abelian") return {abelian(o.n.value_or(1e3), tol)};
    if (name == "idla-inner")
        return {idla_inner(std::llround(o.n.value_or(1e4)), o.eps.value_or(0.15), o.trials.value_or(20),
                           o.seed.value_or(42), o.jobs)};
    if (name == "rotor-bound")
        return {rotor_bound(ins({500, 2000}), presets({"all-first", "toward-origin", "random:42"}), tol)};
    if (name == "rotor-region")
        return {rotor_region(std::llround(o.n.value_or(1e4)), presets({"all-first", "toward-origin", "random:42"}))};
    if (name == "line-regular") return {line_regular(ins({999, 10'000}), presets({"all-first", "toward-origin"}))};
    if (name == "kernel") return {kernel(o.t_max.value_or(40))};
    if (name == "green-consistency")
        return {visit_count(200, o.trials.value_or(200), seed), tree_identity(500, 20, seed),
                closed_form_g({1e3, 1e4, 1e5}, o.eps.value_or(0.2)),
                ratio_bound(o.n.value_or(1e5), o.eps.value_or(0.2)), interval_green()};
    throw std::invalid_argument("unknown check '" + name + "'");
}

CheckReport run_criterion(int criterion, int jobs) {
    switch (criterion) {
        case 1: return sandpile_shape();
        case 2: return odometer_sandwich();
        case 3: return abelian();
        case 4: return recursion_identities();
        case 5: return idla_inner(10'000, 0.15, 20, 42, jobs);
        case 6: return visit_count();
        case 7: return rotor_bound();
        case 8: return tree_identity();
        case 9: return rotor_region();
        case 10: return line_regular();
        case 11: return closed_form_g();
        case 12: return ratio_bound();
        case 13: return kernel();
        case 14: return interval_green();
        default: throw std::invalid_argument("criterion must lie in 1..14");
    }
}

}  // namespace combagg::verify
