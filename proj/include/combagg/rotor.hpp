#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>

#include "combagg/grid.hpp"
#include "combagg/lattice.hpp"
#include "combagg/potential.hpp"

namespace combagg::rotor {

inline constexpr std::uint64_t kStepCap = 10'000'000'000ULL;

enum class RotorPreset { AllFirst, TowardOrigin, Custom, Random };

/// Rotor index per vertex; index i points at neighbors(v)[i].
/// Vertices never written hold the preset's initial index.
class RotorState {
public:
    static RotorState all_first(GraphKind kind = GraphKind::Comb2);
    static RotorState toward_origin(GraphKind kind = GraphKind::Comb2);
    // Listed vertices take the given index (reduced mod degree); all others 0.
    static RotorState custom(std::unordered_map<Vertex, int, VertexHash> indices,
                             GraphKind kind = GraphKind::Comb2);
    static RotorState random(std::uint64_t seed, GraphKind kind = GraphKind::Comb2);
    // "all-first", "toward-origin", "random:SEED" or "file:PATH" (CSV x,y,index)
    static RotorState from_spec(const std::string& spec, GraphKind kind = GraphKind::Comb2);

    GraphKind kind() const noexcept { return kind_; }
    RotorPreset preset() const noexcept { return preset_; }
    const std::string& name() const noexcept { return name_; }

    int initial_index(Vertex v) const;
    int index(Vertex v) const {
        const int i = current_.get(v);
        return i < 0 ? initial_index(v) : i;
    }
    void set_index(Vertex v, int i) { current_.ref(v) = static_cast<std::int8_t>(i); }

    // Vertices whose rotor has been written, in (x, y) order.
    void for_each_touched(const std::function<void(Vertex, int)>& f) const;

    bool same_rotors(const RotorState& other) const;

private:
    RotorState(RotorPreset preset, GraphKind kind, std::string name);

    RotorPreset preset_;
    GraphKind kind_;
    std::string name_;
    std::shared_ptr<const std::unordered_map<Vertex, int, VertexHash>> custom_;
    std::uint64_t seed_ = 0;
    GrowableGrid<std::int8_t> current_;
};

// Turns the rotor at v to its next neighbor and returns that neighbor.
Vertex rotor_step(Vertex v, RotorState& state);

struct RotorRun {
    std::int64_t n = 0;
    Region cluster;
    std::unordered_map<Vertex, std::int64_t, VertexHash> odometer;  // particles sent out
    RotorState rotors;
    std::uint64_t steps = 0;

    std::int64_t emitted(Vertex v) const {
        auto it = odometer.find(v);
        return it == odometer.end() ? 0 : it->second;
    }
};

enum class Routing {
    Sequential,  // release particles one at a time; each walks until it leaves the cluster
    RoundRobin,  // all particles at o, advanced in turn while sharing a site
    Bulk,        // a site holding k particles sends k - 1 of them at once
};

// All three routings end in the same cluster, odometer and rotors.
RotorRun rotor_aggregate(std::int64_t n, const RotorState& initial,
                         Routing routing = Routing::Sequential);

struct AuditReport {
    double max_drift = 0.0;  // max |W_P(t) + W_R(t) - W_P(0) - W_R(0)|
    double scale = 1.0;      // max(1, n max|h|)
    std::size_t checkpoints = 0;
};

// Replays rotor aggregation and recomputes particle and rotor weights from
// scratch at checkpoints.
AuditReport weight_audit(std::int64_t n, const RotorState& initial,
                         const std::function<double(Vertex)>& h);

struct WeightSum {
    double full = 0.0;        // all edges leaving region vertices
    double restricted = 0.0;  // edges with both ends in the region
};

// sum over x in region, z ~ x of |h_y(x) - h_y(z)| with h_y = G(y, .)/d
WeightSum wtilde(Vertex y, const Region& region);
WeightSum wtilde(Vertex y, const potential::DirichletSystem& sys);

// E_y[d(y, X_T)], T the exit time of the region, by a harmonic-extension solve.
double expected_exit_distance(Vertex y, const Region& region);
double expected_exit_distance(Vertex y, const potential::DirichletSystem& sys);

struct BoundReport {
    double min_slack = 0.0;
    Vertex worst{};
    std::size_t checked = 0;
};

// min over the sandpile cluster of u_R/d + wtilde_full - u_n
BoundReport check_rotor_bound(std::int64_t n, const RotorState& initial, double stop_tol = 1e-8);

// Ball vertices with gamma_n(x, y) - 2(|x| + |y| + l n^{2/3}) > 0.
Region rotor_inner_region(double n);

// Line sandpile cluster of mass floor(n/3) inside the line rotor cluster of n particles.
bool line_regular_check(std::int64_t n, const RotorState& initial);

void write_rotor_csv(std::ostream& out, const RotorState& state);
std::unordered_map<Vertex, int, VertexHash> read_rotor_csv(std::istream& in);

}  // namespace combagg::rotor
