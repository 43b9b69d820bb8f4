#include "combagg/idla.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "combagg/grid.hpp"
#include "combagg/potential.hpp"
#include "combagg/shape.hpp"

namespace combagg::idla {

Vertex walk_step(Vertex v, RngStream& rng, GraphKind kind) {
    const auto nb = neighbors(v, kind);
    return nb[rng.below(static_cast<std::uint32_t>(nb.count))];
}

IdlaRun idla_run(std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("idla_run: n must be at least 1");
    const double r = std::cbrt(static_cast<double>(n));
    GrowableGrid<std::uint8_t> occupied(
        static_cast<std::int64_t>(shape::kBackboneRadius * r) + 4,
        static_cast<std::int64_t>(shape::kToothRadius * r * r) + 4, 0);
    IdlaRun run;
    run.n = n;
    run.seed = seed;
    run.cluster = Region(GraphKind::Comb2);
    run.arrivals.reserve(static_cast<std::size_t>(n));
    run.steps.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        std::int64_t x = 0, y = 0;
        std::uint64_t steps = 0;
        while (occupied.get(x, y)) {
            if (y == 0) {
                switch (rng.bits(2)) {
                    case 0: ++x; break;
                    case 1: ++y; break;
                    case 2: --x; break;
                    default: --y; break;
                }
            } else {
                y += rng.bits(1) ? -1 : 1;
            }
            if (++steps > kStepCap)
                throw SolverError("idla: particle " + std::to_string(i) + " exceeded the step cap");
        }
        occupied.ref(x, y) = 1;
        run.cluster.insert({x, y});
        run.arrivals.push_back({x, y});
        run.steps.push_back(steps);
    }
    return run;
}

double containment_fraction(const IdlaRun& run, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    Region inner = shape::ball_region(static_cast<double>(run.n) * (1.0 - eps));
    if (inner.empty()) return 1.0;
    std::size_t hit = 0;
    inner.for_each([&](Vertex v) { hit += run.cluster.contains(v); });
    return static_cast<double>(hit) / static_cast<double>(inner.size());
}

double containment_threshold(const IdlaRun& run) {
    // radial coordinate grows along geodesics from o, so the first missing
    // vertex of any inner ball lies on the outer boundary of the cluster
    double r_min = INFINITY;
    region_boundary(run.cluster).outer.for_each(
        [&](Vertex v) { r_min = std::min(r_min, shape::ball_radius(v)); });
    return std::max(0.0, 1.0 - r_min * r_min * r_min / static_cast<double>(run.n));
}

namespace {

struct BallTable {
    std::int64_t reach;
    std::vector<std::int64_t> height;  // -1 where (x, 0) is outside

    explicit BallTable(double n) {
        reach = static_cast<std::int64_t>(shape::kBackboneRadius * std::cbrt(n)) + 1;
        for (std::int64_t x = -reach; x <= reach; ++x) height.push_back(shape::ball_tooth_height(n, x));
    }
    bool contains(std::int64_t x, std::int64_t y) const {
        if (x < -reach || x > reach) return false;
        return std::abs(y) <= height[static_cast<std::size_t>(x + reach)];
    }
};

}  // namespace

MEstimate estimate_M(double n, Vertex z, int trials, std::uint64_t seed) {
    if (!shape::in_ball(n, z)) throw std::invalid_argument("estimate_M: z lies outside the ball");
    if (trials < 1) throw std::invalid_argument("estimate_M: trials must be positive");
    const BallTable ball(n);
    const auto walks = static_cast<std::int64_t>(std::llround(n));
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        RngStream rng(seed, static_cast<std::uint64_t>(t));
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < walks; ++i) {
            std::int64_t x = 0, y = 0;
            while (ball.contains(x, y)) {
                if (x == z.x && y == z.y) {
                    ++hits;
                    break;
                }
                if (y == 0) {
                    switch (rng.bits(2)) {
                        case 0: ++x; break;
                        case 1: ++y; break;
                        case 2: --x; break;
                        default: --y; break;
                    }
                } else {
                    y += rng.bits(1) ? -1 : 1;
                }
            }
        }
        sum += static_cast<double>(hits);
        sum_sq += static_cast<double>(hits) * static_cast<double>(hits);
    }
    MEstimate e;
    e.trials = trials;
    e.mean = sum / trials;
    const double var = trials > 1 ? (sum_sq - trials * e.mean * e.mean) / (trials - 1) : 0.0;
    e.std_error = std::sqrt(std::max(0.0, var) / trials);
    return e;
}

double expected_M(double n, Vertex z) {
    Region ball = shape::ball_region(n);
    const double g_oz = potential::stopped_green(ball, kOrigin).at(z);
    const double g_zz = potential::stopped_green(ball, z).at(z);
    return n * g_oz / g_zz;
}

std::vector<TrialSummary> run_trials(std::int64_t n, double eps, std::uint64_t first_seed,
                                     int trials, int jobs) {
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    std::vector<TrialSummary> out(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k; (k = next.fetch_add(1)) < trials;) {
            const auto t0 = std::chrono::steady_clock::now();
            const std::uint64_t seed = first_seed + static_cast<std::uint64_t>(k);
            IdlaRun run = idla_run(n, seed);
            TrialSummary& s = out[static_cast<std::size_t>(k)];
            s.n = n;
            s.seed = seed;
            s.fraction = containment_fraction(run, eps);
            s.contained = s.fraction == 1.0;
            s.eps_threshold = containment_threshold(run);
            s.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            spdlog::info("idla n={} seed={} fraction={} eps*={:.4f} ({:.0f} ms)", n, seed, s.fraction,
                         s.eps_threshold, s.wall_ms);
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < std::max(1, jobs); ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace combagg::idla
