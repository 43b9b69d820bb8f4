#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>

#include "combagg/lattice.hpp"
#include "combagg/potential.hpp"

namespace combagg::sandpile {

/// Sparse nonnegative mass distribution on one graph.
class MassField {
public:
    explicit MassField(GraphKind kind = GraphKind::Comb2) : kind_(kind) {}

    static MassField point(double n, GraphKind kind = GraphKind::Comb2);

    GraphKind kind() const noexcept { return kind_; }
    double at(Vertex v) const;
    void set(Vertex v, double m);
    void add(Vertex v, double m) { set(v, at(v) + m); }
    double total() const;
    const std::unordered_map<Vertex, double, VertexHash>& values() const noexcept { return mass_; }

private:
    GraphKind kind_;
    std::unordered_map<Vertex, double, VertexHash> mass_;
};

/// Emitted mass v per vertex; the normalized odometer is u = v / d.
class OdometerField {
public:
    explicit OdometerField(GraphKind kind = GraphKind::Comb2) : kind_(kind) {}

    GraphKind kind() const noexcept { return kind_; }
    double emitted(Vertex v) const;
    double normalized(Vertex v) const { return emitted(v) / degree(v, kind_); }
    void add(Vertex v, double amount) { v_[v] += amount; }
    const std::unordered_map<Vertex, double, VertexHash>& values() const noexcept { return v_; }

private:
    GraphKind kind_;
    std::unordered_map<Vertex, double, VertexHash> v_;
};

enum class Schedule {
    SweepBox,       // Gauss-Seidel sweeps over the support bounding box
    UnstableQueue,  // FIFO of sites whose excess is above a shrinking threshold
    ActiveSet,      // exact Dirichlet solves on a guessed support, polished by UnstableQueue
};

std::string to_string(Schedule s);
Schedule schedule_from_string(const std::string& name);

struct RelaxOptions {
    Schedule schedule = Schedule::ActiveSet;
    double stop_tol = 1e-8;      // bound on the total excess sum max(mu - 1, 0)
    double cluster_tol = 1e-6;   // mu >= 1 - cluster_tol counts as full
    std::uint64_t max_topplings = 1'000'000'000;
    int max_active_set_rounds = 500;
};

struct SandpileResult {
    MassField mass;
    OdometerField odometer;
    Region cluster;
    std::uint64_t iterations = 0;  // topplings performed
    int active_set_rounds = 0;
    double residual_excess = 0.0;
};

class RelaxError : public SolverError {
public:
    RelaxError(const std::string& what, std::uint64_t topplings, double excess)
        : SolverError(what), topplings_(topplings), excess_(excess) {}
    std::uint64_t topplings() const noexcept { return topplings_; }
    double excess() const noexcept { return excess_; }

private:
    std::uint64_t topplings_;
    double excess_;
};

// Keeps mass 1 at v and splits the excess evenly among the neighbors.
void topple(MassField& field, Vertex v, OdometerField& odo);

SandpileResult relax(const MassField& mu0, const RelaxOptions& options = {});

// sup_z |u_A(z) - u_B(z)| for the same initial mass under two schedules.
double abelian_check(const MassField& mu0, Schedule a, Schedule b, double stop_tol);

// sum_nbr u - d u: the mass change produced by the odometer at v
double odometer_flow(const OdometerField& odo, Vertex v);

void write_mass_csv(std::ostream& out, const MassField& mass);
void write_odometer_csv(std::ostream& out, const OdometerField& odo);

}  // namespace combagg::sandpile
