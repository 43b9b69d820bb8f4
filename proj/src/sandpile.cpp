#include "combagg/sandpile.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <spdlog/spdlog.h>

#include "combagg/shape.hpp"

namespace combagg::sandpile {

MassField MassField::point(double n, GraphKind kind) {
    if (!(n >= 0.0)) throw std::invalid_argument("mass must be nonnegative");
    MassField f(kind);
    f.set(kOrigin, n);
    return f;
}

double MassField::at(Vertex v) const {
    auto it = mass_.find(v);
    return it == mass_.end() ? 0.0 : it->second;
}

void MassField::set(Vertex v, double m) {
    if (!(m >= 0.0)) throw std::invalid_argument("mass must be nonnegative");
    if (kind_ == GraphKind::Line && v.y != 0)
        throw std::invalid_argument("line mass must sit on y = 0");
    if (m == 0.0)
        mass_.erase(v);
    else
        mass_[v] = m;
}

double MassField::total() const {
    long double s = 0;
    for (const auto& [v, m] : mass_) s += m;
    return static_cast<double>(s);
}

double OdometerField::emitted(Vertex v) const {
    auto it = v_.find(v);
    return it == v_.end() ? 0.0 : it->second;
}

std::string to_string(Schedule s) {
    switch (s) {
        case Schedule::SweepBox: return "sweep";
        case Schedule::UnstableQueue: return "queue";
        case Schedule::ActiveSet: return "active-set";
    }
    return "?";
}

Schedule schedule_from_string(const std::string& name) {
    if (name == "sweep" || name == "SweepBox") return Schedule::SweepBox;
    if (name == "queue" || name == "UnstableQueue") return Schedule::UnstableQueue;
    if (name == "active-set" || name == "ActiveSet") return Schedule::ActiveSet;
    throw std::invalid_argument("unknown schedule: " + name);
}

void topple(MassField& field, Vertex v, OdometerField& odo) {
    const double alpha = field.at(v) - 1.0;
    if (!(alpha > 0.0)) return;
    auto nb = neighbors(v, field.kind());
    field.set(v, 1.0);
    odo.add(v, alpha);
    const double share = alpha / nb.count;
    for (Vertex w : nb) field.add(w, share);
}

double odometer_flow(const OdometerField& odo, Vertex v) {
    double s = -static_cast<double>(degree(v, odo.kind())) * odo.normalized(v);
    for (Vertex w : neighbors(v, odo.kind())) s += odo.normalized(w);
    return s;
}

namespace {

using LD = long double;

// Dense mass/odometer storage on a fixed safety box; columns are contiguous in y.
class Grid {
public:
    Grid(GraphKind kind, std::int64_t x0, std::int64_t x1, std::int64_t y0, std::int64_t y1)
        : kind_(kind), x0_(x0), x1_(x1), y0_(y0), y1_(y1), h_(y1 - y0 + 1) {
        const auto cells = static_cast<std::size_t>((x1 - x0 + 1) * h_);
        mu.assign(cells, 0.0L);
        v.assign(cells, 0.0L);
    }

    bool inside(std::int64_t x, std::int64_t y) const {
        return x >= x0_ && x <= x1_ && y >= y0_ && y <= y1_;
    }
    std::size_t idx(std::int64_t x, std::int64_t y) const {
        return static_cast<std::size_t>((x - x0_) * h_ + (y - y0_));
    }
    Vertex vertex(std::size_t i) const {
        auto q = static_cast<std::int64_t>(i) / h_;
        return {x0_ + q, y0_ + static_cast<std::int64_t>(i) - q * h_};
    }
    GraphKind kind() const { return kind_; }

    // Sends `amount` from (x, y) evenly to its neighbors and books it on the odometer.
    void emit(std::int64_t x, std::int64_t y, LD amount) {
        const std::size_t i = idx(x, y);
        mu[i] -= amount;
        v[i] += amount;
        const Neighbors nb = neighbors({x, y}, kind_);
        const LD share = amount / nb.count;
        for (Vertex w : nb) deposit(w, share);
    }

    void deposit(Vertex w, LD m) {
        if (!inside(w.x, w.y))
            throw RelaxError("sandpile support left the safety box at (" + std::to_string(w.x) +
                                 "," + std::to_string(w.y) + ")",
                             topplings, static_cast<double>(excess()));
        LD& cell = mu[idx(w.x, w.y)];
        if (cell == 0.0L) ++support;
        cell += m;
        touch(w.x, w.y);
    }

    void touch(std::int64_t x, std::int64_t y) {
        bx0 = std::min(bx0, x);
        bx1 = std::max(bx1, x);
        by0 = std::min(by0, y);
        by1 = std::max(by1, y);
    }

    bool topple_at(std::int64_t x, std::int64_t y) {
        const LD a = mu[idx(x, y)] - 1.0L;
        if (!(a > 0.0L)) return false;
        emit(x, y, a);
        ++topplings;
        return true;
    }

    template <class F>
    void for_each_in_bbox(F&& f) const {
        for (std::int64_t x = bx0; x <= bx1; ++x)
            for (std::int64_t y = by0; y <= by1; ++y) f(x, y, idx(x, y));
    }

    LD excess() const {
        LD s = 0;
        if (bx0 > bx1) return s;
        for_each_in_bbox([&](std::int64_t, std::int64_t, std::size_t i) {
            if (mu[i] > 1.0L) s += mu[i] - 1.0L;
        });
        return s;
    }

    void check_cap(std::uint64_t cap) const {
        if (topplings > cap)
            throw RelaxError("toppling cap of " + std::to_string(cap) + " exceeded", topplings,
                             static_cast<double>(excess()));
    }

    std::vector<LD> mu, v;
    std::uint64_t topplings = 0;
    std::size_t support = 0;
    std::int64_t bx0 = 1, bx1 = 0, by0 = 1, by1 = 0;

private:
    GraphKind kind_;
    std::int64_t x0_, x1_, y0_, y1_, h_;
};

Grid make_grid(const MassField& mu0) {
    const double n = mu0.total();
    std::int64_t sx0 = 0, sx1 = 0, sy0 = 0, sy1 = 0;
    bool first = true;
    for (const auto& [v, m] : mu0.values()) {
        if (first) {
            sx0 = sx1 = v.x;
            sy0 = sy1 = v.y;
            first = false;
        }
        sx0 = std::min(sx0, v.x);
        sx1 = std::max(sx1, v.x);
        sy0 = std::min(sy0, v.y);
        sy1 = std::max(sy1, v.y);
    }
    std::int64_t X = 0, Y = 0;
    if (mu0.kind() == GraphKind::Line) {
        X = static_cast<std::int64_t>(std::ceil(n)) + 2;
    } else {
        // reach of ball_region(2n), plus margin for the partially filled rim
        const double r = std::cbrt(2.0 * std::max(n, 0.5));
        X = static_cast<std::int64_t>(std::floor(shape::kBackboneRadius * r)) + 2;
        Y = static_cast<std::int64_t>(std::floor(shape::kToothRadius * r * r)) + 2;
    }
    Grid g(mu0.kind(), sx0 - X, sx1 + X, sy0 - Y, sy1 + Y);
    for (const auto& [v, m] : mu0.values()) {
        g.mu[g.idx(v.x, v.y)] = m;
        if (m > 0.0) ++g.support;
        g.touch(v.x, v.y);
    }
    if (first) g.touch(0, 0);
    return g;
}

void run_sweeps(Grid& g, const RelaxOptions& opt) {
    while (g.excess() >= opt.stop_tol) {
        const auto x0 = g.bx0, x1 = g.bx1, y0 = g.by0, y1 = g.by1;
        for (std::int64_t x = x0; x <= x1; ++x)
            for (std::int64_t y = y0; y <= y1; ++y) g.topple_at(x, y);
        g.check_cap(opt.max_topplings);
    }
}

void run_queue(Grid& g, const RelaxOptions& opt) {
    LD theta = opt.stop_tol / std::max<LD>(1, static_cast<LD>(g.support));
    std::vector<char> queued(g.mu.size(), 0);
    std::deque<std::size_t> queue;
    auto seed = [&] {
        g.for_each_in_bbox([&](std::int64_t, std::int64_t, std::size_t i) {
            if (g.mu[i] - 1.0L > theta && !queued[i]) {
                queued[i] = 1;
                queue.push_back(i);
            }
        });
    };
    seed();
    for (;;) {
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            queued[i] = 0;
            const Vertex v = g.vertex(i);
            if (!g.topple_at(v.x, v.y)) continue;
            for (Vertex w : neighbors(v, g.kind())) {
                const std::size_t j = g.idx(w.x, w.y);
                if (!queued[j] && g.mu[j] - 1.0L > theta) {
                    queued[j] = 1;
                    queue.push_back(j);
                }
            }
            if ((g.topplings & 0xffff) == 0) g.check_cap(opt.max_topplings);
        }
        if (g.excess() < opt.stop_tol) return;
        theta = std::min(theta / 10, opt.stop_tol / std::max<LD>(1, static_cast<LD>(g.support)));
        if (theta < 1e-30L) {
            // excess below any representable per-site threshold cannot shrink further
            throw RelaxError("excess stalled above stop_tol", g.topplings,
                             static_cast<double>(g.excess()));
        }
        seed();
    }
}

Region active_set_seed(const MassField& mu0) {
    Region seed(mu0.kind());
    const auto& vals = mu0.values();
    if (vals.size() == 1 && vals.begin()->first == kOrigin) {
        const double n = vals.begin()->second;
        if (n <= 1.0) return seed;
        if (mu0.kind() == GraphKind::Comb2) return shape::ball_region(n);
        const auto r = static_cast<std::int64_t>(std::floor((n - 1.0) / 2.0));
        for (std::int64_t x = -r; x <= r; ++x) seed.insert({x, 0});
        return seed;
    }
    for (const auto& [v, m] : vals)
        if (m > 1.0) seed.insert(v);
    return seed;
}

// Primal-dual active-set iteration for u >= 0, mu0 + d Lap u <= 1, complementary.
void run_active_set(Grid& g, const MassField& mu0, const RelaxOptions& opt, int& rounds) {
    Region J = active_set_seed(mu0);
    if (J.empty()) return;
    std::vector<LD> ugrid(g.mu.size(), 0.0L);
    std::vector<LD> u;
    std::unique_ptr<potential::DirichletSystem> sys;
    for (rounds = 1;; ++rounds) {
        J.for_each([&](Vertex v) {
            if (!g.inside(v.x, v.y))
                throw RelaxError("active set left the safety box", g.topplings, 0.0);
        });
        sys = std::make_unique<potential::DirichletSystem>(J);
        std::vector<LD> rhs(sys->size());
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            const Vertex v = sys->vertices()[i];
            rhs[i] = (1.0L - mu0.at(v)) / sys->degree_at(i);
        }
        u = sys->solve(rhs);
        for (std::size_t i = 0; i < u.size(); ++i) {
            const Vertex v = sys->vertices()[i];
            ugrid[g.idx(v.x, v.y)] = u[i];
        }
        Region next(J.kind());
        std::size_t removed = 0, added = 0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i] > 0.0L)
                next.insert(sys->vertices()[i]);
            else
                ++removed;
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            const Neighbors nb = neighbors(sys->vertices()[i], J.kind());
            for (int k = 0; k < nb.count; ++k) {
                if (sys->neighbor_indices(i)[k] >= 0) continue;
                const Vertex w = nb[k];
                if (!g.inside(w.x, w.y))
                    throw RelaxError("active set left the safety box", g.topplings, 0.0);
                LD m = mu0.at(w);
                for (Vertex z : neighbors(w, J.kind())) m += ugrid[g.idx(z.x, z.y)];
                if (m > 1.0L + 1e-15L && next.insert(w)) ++added;
            }
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            const Vertex v = sys->vertices()[i];
            ugrid[g.idx(v.x, v.y)] = 0.0L;
        }
        spdlog::debug("active set round {}: |J| = {}, +{} -{}", rounds, J.size(), added, removed);
        if (added == 0 && removed == 0) break;
        if (rounds >= opt.max_active_set_rounds) {
            spdlog::warn("active set did not settle after {} rounds; finishing by toppling", rounds);
            break;
        }
        J = std::move(next);
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] > 0.0L)) continue;
        const Vertex v = sys->vertices()[i];
        g.emit(v.x, v.y, u[i] * sys->degree_at(i));
        g.touch(v.x, v.y);
    }
}

}  // namespace

SandpileResult relax(const MassField& mu0, const RelaxOptions& opt) {
    if (!(opt.stop_tol > 0.0)) throw std::invalid_argument("stop_tol must be positive");
    Grid g = make_grid(mu0);
    SandpileResult res{MassField(mu0.kind()), OdometerField(mu0.kind()), Region(mu0.kind())};
    switch (opt.schedule) {
        case Schedule::SweepBox: run_sweeps(g, opt); break;
        case Schedule::UnstableQueue: run_queue(g, opt); break;
        case Schedule::ActiveSet:
            run_active_set(g, mu0, opt, res.active_set_rounds);
            if (g.excess() >= opt.stop_tol) run_queue(g, opt);
            break;
    }
    res.iterations = g.topplings;
    res.residual_excess = static_cast<double>(g.excess());
    g.for_each_in_bbox([&](std::int64_t x, std::int64_t y, std::size_t i) {
        const Vertex v{x, y};
        if (g.mu[i] > 0.0L) res.mass.set(v, static_cast<double>(g.mu[i]));
        if (g.v[i] > 0.0L) res.odometer.add(v, static_cast<double>(g.v[i]));
        if (g.mu[i] >= 1.0L - opt.cluster_tol) res.cluster.insert(v);
    });
    return res;
}

double abelian_check(const MassField& mu0, Schedule a, Schedule b, double stop_tol) {
    RelaxOptions oa, ob;
    oa.schedule = a;
    ob.schedule = b;
    oa.stop_tol = ob.stop_tol = stop_tol;
    auto ra = relax(mu0, oa);
    auto rb = relax(mu0, ob);
    double worst = 0.0;
    for (const auto& [v, _] : ra.odometer.values())
        worst = std::max(worst, std::abs(ra.odometer.normalized(v) - rb.odometer.normalized(v)));
    for (const auto& [v, _] : rb.odometer.values())
        worst = std::max(worst, std::abs(ra.odometer.normalized(v) - rb.odometer.normalized(v)));
    return worst;
}

void write_mass_csv(std::ostream& out, const MassField& mass) {
    std::vector<std::pair<Vertex, double>> rows(mass.values().begin(), mass.values().end());
    potential::write_field_csv(out, rows);
}

void write_odometer_csv(std::ostream& out, const OdometerField& odo) {
    std::vector<std::pair<Vertex, double>> rows;
    rows.reserve(odo.values().size());
    for (const auto& [v, e] : odo.values()) rows.emplace_back(v, odo.normalized(v));
    potential::write_field_csv(out, rows);
}

}  // namespace combagg::sandpile
