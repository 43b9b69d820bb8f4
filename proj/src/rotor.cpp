#include "combagg/rotor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "combagg/rng.hpp"
#include "combagg/sandpile.hpp"
#include "combagg/shape.hpp"

namespace combagg::rotor {

RotorState::RotorState(RotorPreset preset, GraphKind kind, std::string name)
    : preset_(preset), kind_(kind), name_(std::move(name)), current_(8, 64, -1) {}

RotorState RotorState::all_first(GraphKind kind) {
    return RotorState(RotorPreset::AllFirst, kind, "all-first");
}

RotorState RotorState::toward_origin(GraphKind kind) {
    return RotorState(RotorPreset::TowardOrigin, kind, "toward-origin");
}

RotorState RotorState::custom(std::unordered_map<Vertex, int, VertexHash> indices, GraphKind kind) {
    for (auto& [v, i] : indices) {
        if (kind == GraphKind::Line && v.y != 0)
            throw std::invalid_argument("line rotor with nonzero y");
        const int d = degree(v, kind);
        i = ((i % d) + d) % d;
    }
    RotorState s(RotorPreset::Custom, kind, "custom");
    s.custom_ = std::make_shared<const std::unordered_map<Vertex, int, VertexHash>>(std::move(indices));
    return s;
}

RotorState RotorState::random(std::uint64_t seed, GraphKind kind) {
    RotorState s(RotorPreset::Random, kind, "random:" + std::to_string(seed));
    s.seed_ = seed;
    return s;
}

RotorState RotorState::from_spec(const std::string& spec, GraphKind kind) {
    if (spec == "all-first") return all_first(kind);
    if (spec == "toward-origin") return toward_origin(kind);
    if (spec.rfind("random:", 0) == 0) {
        std::uint64_t seed = 0;
        const char* b = spec.data() + 7;
        const char* e = spec.data() + spec.size();
        auto [p, ec] = std::from_chars(b, e, seed);
        if (ec != std::errc{} || p != e || b == e)
            throw std::invalid_argument("bad rotor seed in '" + spec + "'");
        return random(seed, kind);
    }
    if (spec.rfind("file:", 0) == 0) {
        std::ifstream in(spec.substr(5), std::ios::binary);
        if (!in) throw std::invalid_argument("cannot open rotor file: " + spec.substr(5));
        return custom(read_rotor_csv(in), kind);
    }
    throw std::invalid_argument("unknown rotor preset: " + spec);
}

int RotorState::initial_index(Vertex v) const {
    switch (preset_) {
        case RotorPreset::AllFirst: return 0;
        case RotorPreset::TowardOrigin:
            if (kind_ == GraphKind::Line || v.y == 0) {
                if (v.x > 0) return kind_ == GraphKind::Line ? 1 : 2;  // West
                return 0;  // East; the origin also starts East
            }
            return v.y > 0 ? 1 : 0;  // South above the backbone, North below
        case RotorPreset::Custom: {
            auto it = custom_->find(v);
            return it == custom_->end() ? 0 : it->second;
        }
        case RotorPreset::Random: {
            std::uint64_t s = seed_ ^ pack(v);
            return static_cast<int>(splitmix64(s) % static_cast<std::uint64_t>(degree(v, kind_)));
        }
    }
    return 0;
}

void RotorState::for_each_touched(const std::function<void(Vertex, int)>& f) const {
    current_.for_each_set([&](Vertex v, std::int8_t i) { f(v, i); });
}

bool RotorState::same_rotors(const RotorState& other) const {
    bool same = true;
    for_each_touched([&](Vertex v, int i) { same = same && other.index(v) == i; });
    other.for_each_touched([&](Vertex v, int i) { same = same && index(v) == i; });
    return same;
}

Vertex rotor_step(Vertex v, RotorState& state) {
    const auto nb = neighbors(v, state.kind());
    const int i = (state.index(v) + 1) % nb.count;
    state.set_index(v, i);
    return nb[static_cast<std::size_t>(i)];
}

namespace {

struct Router {
    RotorState rotors;
    GrowableGrid<std::uint8_t> occupied;
    GrowableGrid<std::int64_t> emitted;
    std::uint64_t steps = 0;

    explicit Router(const RotorState& initial)
        : rotors(initial), occupied(8, 64, 0), emitted(8, 64, 0) {}

    Vertex step(Vertex v) {
        ++emitted.ref(v);
        ++steps;
        return rotor_step(v, rotors);
    }

    RotorRun finish(std::int64_t n) {
        RotorRun run{n, Region(rotors.kind()), {}, rotors, steps};
        occupied.for_each_set([&](Vertex v, std::uint8_t) { run.cluster.insert(v); });
        emitted.for_each_set([&](Vertex v, std::int64_t m) { run.odometer.emplace(v, m); });
        return run;
    }
};

void check_cap(std::uint64_t walked) {
    if (walked > kStepCap) throw SolverError("rotor: a particle exceeded the step cap");
}

// Range add, point query over positions lo..hi.
class Fenwick {
public:
    Fenwick(std::int64_t lo, std::int64_t hi) : lo_(lo), tree_(static_cast<std::size_t>(hi - lo + 2), 0) {}
    void add(std::int64_t a, std::int64_t b, std::int64_t delta) {
        bump(a, delta);
        bump(b + 1, -delta);
    }
    std::int64_t at(std::int64_t x) const {
        std::int64_t sum = 0;
        for (auto i = static_cast<std::size_t>(x - lo_ + 1); i > 0; i -= i & (~i + 1)) sum += tree_[i];
        return sum;
    }

private:
    void bump(std::int64_t x, std::int64_t delta) {
        for (auto i = static_cast<std::size_t>(x - lo_ + 1); i < tree_.size(); i += i & (~i + 1))
            tree_[i] += delta;
    }
    std::int64_t lo_;
    std::vector<std::int64_t> tree_;
};

// Sequential release on the line. A walker passes straight through a run of
// sites whose next exit points the same way, flipping each, so whole runs are
// taken at once. Runs are kept as start -> direction (0 east, 1 west).
void route_sequential_line(Router& r, std::int64_t n) {
    const std::int64_t reach = n + 2;
    std::map<std::int64_t, int> runs;
    for (std::int64_t x = -reach; x <= reach; ++x) {
        const int dir = (r.rotors.initial_index({x, 0}) + 1) % 2;
        if (runs.empty() || std::prev(runs.end())->second != dir) runs.emplace(x, dir);
    }
    auto split = [&](std::int64_t x) {
        auto it = std::prev(runs.upper_bound(x));
        if (it->first != x) runs.emplace_hint(std::next(it), x, it->second);
    };
    auto assign = [&](std::int64_t a, std::int64_t b, int dir) {
        split(a);
        if (b + 1 <= reach) split(b + 1);
        auto first = runs.find(a);
        runs.erase(first, runs.upper_bound(b));
        auto it = runs.emplace(a, dir).first;
        auto after = std::next(it);
        if (after != runs.end() && after->second == dir) runs.erase(after);
        if (it != runs.begin() && std::prev(it)->second == dir) runs.erase(it);
    };

    Fenwick emitted(-reach, reach);
    std::int64_t left = 1, right = -1;  // occupied interval, empty at first
    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t p = 0;
        std::uint64_t walked = 0;
        while (p >= left && p <= right) {
            auto it = std::prev(runs.upper_bound(p));
            std::int64_t a, b;
            if (it->second == 0) {
                const auto next = std::next(it);
                const std::int64_t end = next == runs.end() ? reach : next->first - 1;
                a = p;
                b = std::min(end, right);
            } else {
                a = std::max(it->first, left);
                b = p;
            }
            const int dir = it->second;
            assign(a, b, 1 - dir);
            emitted.add(a, b, 1);
            walked += static_cast<std::uint64_t>(b - a + 1);
            check_cap(walked);
            p = dir == 0 ? b + 1 : a - 1;
        }
        if (p > reach - 2 || p < -reach + 2) throw SolverError("rotor: line walker left the safety box");
        left = std::min(left, p);
        right = std::max(right, p);
        r.steps += walked;
    }
    for (std::int64_t x = left; x <= right; ++x) {
        r.occupied.ref(x, 0) = 1;
        const std::int64_t m = emitted.at(x);
        if (m == 0) continue;
        r.emitted.ref(x, 0) = m;
        r.rotors.set_index({x, 0}, static_cast<int>((r.rotors.initial_index({x, 0}) + m) % 2));
    }
}

void route_sequential(Router& r, std::int64_t n) {
    if (r.rotors.kind() == GraphKind::Line) return route_sequential_line(r, n);
    for (std::int64_t i = 0; i < n; ++i) {
        Vertex v = kOrigin;
        std::uint64_t walked = 0;
        while (r.occupied.get(v)) {
            v = r.step(v);
            check_cap(++walked);
        }
        r.occupied.ref(v) = 1;
    }
}

void route_round_robin(Router& r, std::int64_t n) {
    std::vector<Vertex> pos(static_cast<std::size_t>(n), kOrigin);
    GrowableGrid<std::int64_t> count(8, 64, 0);
    count.ref(kOrigin) = n;
    for (bool moved = true; moved;) {
        moved = false;
        for (Vertex& p : pos) {
            if (count.get(p) < 2) continue;
            --count.ref(p);
            p = r.step(p);
            check_cap(r.steps / static_cast<std::uint64_t>(n));
            ++count.ref(p);
            moved = true;
        }
    }
    for (Vertex p : pos) r.occupied.ref(p) = 1;
}

void route_bulk(Router& r, std::int64_t n) {
    GrowableGrid<std::int64_t> count(8, 64, 0);
    count.ref(kOrigin) = n;
    std::vector<Vertex> stack{kOrigin};
    while (!stack.empty()) {
        const Vertex v = stack.back();
        stack.pop_back();
        const std::int64_t k = count.get(v) - 1;
        if (k <= 0) continue;
        count.ref(v) = 1;
        const auto nb = neighbors(v, r.rotors.kind());
        const int d = nb.count;
        const int r0 = r.rotors.index(v);
        for (int j = 1; j <= d; ++j) {
            const std::int64_t share = k / d + (j <= k % d ? 1 : 0);
            if (share == 0) continue;
            const Vertex w = nb[static_cast<std::size_t>((r0 + j) % d)];
            std::int64_t& c = count.ref(w);
            c += share;
            if (c >= 2 && c - share < 2) stack.push_back(w);
        }
        r.rotors.set_index(v, static_cast<int>((r0 + k) % d));
        r.emitted.ref(v) += k;
        r.steps += static_cast<std::uint64_t>(k);
    }
    count.for_each_set([&](Vertex v, std::int64_t) { r.occupied.ref(v) = 1; });
}

}  // namespace

RotorRun rotor_aggregate(std::int64_t n, const RotorState& initial, Routing routing) {
    if (n < 1) throw std::invalid_argument("rotor_aggregate: n must be at least 1");
    Router r(initial);
    switch (routing) {
        case Routing::Sequential: route_sequential(r, n); break;
        case Routing::RoundRobin: route_round_robin(r, n); break;
        case Routing::Bulk: route_bulk(r, n); break;
    }
    return r.finish(n);
}

AuditReport weight_audit(std::int64_t n, const RotorState& initial,
                         const std::function<double(Vertex)>& h) {
    if (n < 1) throw std::invalid_argument("weight_audit: n must be at least 1");
    Router r(initial);
    const GraphKind kind = initial.kind();
    // sigma: particles per site; the walker in flight is tracked separately
    GrowableGrid<std::int64_t> sigma(8, 64, 0);
    sigma.ref(kOrigin) = n;

    // w(x, k) with emissions k >= 0 from initial index r0:
    //   floor(k/d) (-d Lap h(x)) + sum_{j=1}^{k mod d} (h(x) - h(x_{(r0+j) mod d}))
    auto rotor_weight = [&](Vertex x, std::int64_t k) {
        const auto nb = neighbors(x, kind);
        const int d = nb.count;
        const double hx = h(x);
        double minus_d_lap = 0;
        for (Vertex z : nb) minus_d_lap += hx - h(z);
        double w = static_cast<double>(k / d) * minus_d_lap;
        const int r0 = initial.initial_index(x);
        for (std::int64_t j = 1; j <= k % d; ++j) w += hx - h(nb[static_cast<std::size_t>((r0 + j) % d)]);
        return w;
    };
    auto total = [&] {
        long double wp = 0, wr = 0;
        sigma.for_each_set([&](Vertex v, std::int64_t s) { wp += static_cast<long double>(s) * h(v); });
        r.emitted.for_each_set([&](Vertex v, std::int64_t k) { wr += rotor_weight(v, k); });
        return static_cast<double>(wp + wr);
    };

    AuditReport rep;
    double hmax = 0;
    const double start = total();
    auto checkpoint = [&] {
        rep.max_drift = std::max(rep.max_drift, std::abs(total() - start));
        ++rep.checkpoints;
    };
    std::uint64_t next_check = 1;
    for (std::int64_t i = 0; i < n; ++i) {
        Vertex v = kOrigin;
        hmax = std::max(hmax, std::abs(h(v)));
        // the walker leaves a site only while another particle is there
        while (r.occupied.get(v)) {
            --sigma.ref(v);
            v = r.step(v);
            ++sigma.ref(v);
            hmax = std::max(hmax, std::abs(h(v)));
            if (r.steps == next_check) {
                checkpoint();
                next_check *= 2;
            }
        }
        r.occupied.ref(v) = 1;
        checkpoint();
    }
    rep.scale = std::max(1.0, static_cast<double>(n) * hmax);
    return rep;
}

WeightSum wtilde(Vertex y, const potential::DirichletSystem& sys) {
    if (sys.index_of(y) < 0) throw std::invalid_argument("wtilde: y lies outside the region");
    const auto h = potential::green_over_degree(sys, y);
    long double full = 0, restricted = 0;
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const int d = sys.degree_at(i);
        for (int k = 0; k < d; ++k) {
            const auto j = sys.neighbor_indices(i)[k];
            if (j >= 0) {
                const long double diff = std::abs(h[i] - h[static_cast<std::size_t>(j)]);
                full += diff;
                restricted += diff;
            } else {
                full += std::abs(h[i]);
            }
        }
    }
    return {static_cast<double>(full), static_cast<double>(restricted)};
}

WeightSum wtilde(Vertex y, const Region& region) {
    return wtilde(y, potential::DirichletSystem(region));
}

double expected_exit_distance(Vertex y, const potential::DirichletSystem& sys) {
    const auto iy = sys.index_of(y);
    if (iy < 0) throw std::invalid_argument("expected_exit_distance: y lies outside the region");
    // phi harmonic inside, equal to d(y, .) outside
    std::vector<long double> rhs(sys.size(), 0.0L);
    for (std::size_t i = 0; i < sys.size(); ++i) {
        const Vertex w = sys.vertices()[i];
        const auto nb = neighbors(w, sys.kind());
        long double s = 0;
        for (int k = 0; k < nb.count; ++k)
            if (sys.neighbor_indices(i)[k] < 0) s += graph_distance(y, nb[static_cast<std::size_t>(k)], sys.kind());
        rhs[i] = -s / nb.count;
    }
    return static_cast<double>(sys.solve(rhs)[static_cast<std::size_t>(iy)]);
}

double expected_exit_distance(Vertex y, const Region& region) {
    return expected_exit_distance(y, potential::DirichletSystem(region));
}

BoundReport check_rotor_bound(std::int64_t n, const RotorState& initial, double stop_tol) {
    sandpile::RelaxOptions opt;
    opt.stop_tol = stop_tol;
    const auto pile = sandpile::relax(sandpile::MassField::point(static_cast<double>(n), initial.kind()), opt);
    const auto run = rotor_aggregate(n, initial);
    potential::DirichletSystem sys(pile.cluster);
    BoundReport rep;
    rep.min_slack = INFINITY;
    for (Vertex y : sys.vertices()) {
        const double d = degree(y, initial.kind());
        const double slack = static_cast<double>(run.emitted(y)) / d + wtilde(y, sys).full -
                             pile.odometer.normalized(y);
        if (slack < rep.min_slack) {
            rep.min_slack = slack;
            rep.worst = y;
        }
        ++rep.checked;
    }
    if (rep.checked == 0) rep.min_slack = 0.0;
    return rep;
}

Region rotor_inner_region(double n) {
    const auto spec = shape::ShapeSpec::for_mass(n);
    const double reach = shape::kToothRadius * std::pow(n, 2.0 / 3.0);
    Region out(GraphKind::Comb2);
    shape::ball_region(n).for_each([&](Vertex v) {
        const double bound = 2.0 * (static_cast<double>(std::abs(v.x) + std::abs(v.y)) + reach);
        if (shape::gamma(spec, v) - bound > 0.0) out.insert(v);
    });
    return out;
}

bool line_regular_check(std::int64_t n, const RotorState& initial) {
    if (n < 1) throw std::invalid_argument("line_regular_check: n must be at least 1");
    if (initial.kind() != GraphKind::Line) throw std::invalid_argument("line_regular_check needs line rotors");
    const double mass = std::floor(static_cast<double>(n) / 3.0);
    const auto run = rotor_aggregate(n, initial);
    if (mass <= 0.0) return true;
    const auto pile = sandpile::relax(sandpile::MassField::point(mass, GraphKind::Line));
    return pile.cluster.is_subset_of(run.cluster);
}

void write_rotor_csv(std::ostream& out, const RotorState& state) {
    out << "x,y,index\n";
    state.for_each_touched([&](Vertex v, int i) { out << v.x << ',' << v.y << ',' << i << '\n'; });
}

std::unordered_map<Vertex, int, VertexHash> read_rotor_csv(std::istream& in) {
    std::unordered_map<Vertex, int, VertexHash> out;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line.rfind("x,y,index", 0) != 0) throw std::invalid_argument("missing 'x,y,index' header");
            header = true;
            continue;
        }
        std::int64_t f[3];
        const char* p = line.data();
        const char* e = line.data() + line.size();
        for (int k = 0; k < 3; ++k) {
            auto [q, ec] = std::from_chars(p, e, f[k]);
            if (ec != std::errc{} || (k < 2 && (q == e || *q != ',')) || (k == 2 && q != e))
                throw std::invalid_argument("malformed rotor row on line " + std::to_string(line_no));
            p = q + 1;
        }
        out[{f[0], f[1]}] = static_cast<int>(f[2]);
    }
    if (!header) throw std::invalid_argument("empty rotor CSV");
    return out;
}

}  // namespace combagg::rotor
