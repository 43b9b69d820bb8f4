#pragma once

#include <cstdint>
#include <vector>

#include "combagg/lattice.hpp"
#include "combagg/rng.hpp"

namespace combagg::idla {

inline constexpr std::uint64_t kStepCap = 10'000'000'000ULL;

// One step of simple random walk: a uniformly chosen neighbor.
Vertex walk_step(Vertex v, RngStream& rng, GraphKind kind = GraphKind::Comb2);

struct IdlaRun {
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    Region cluster;
    std::vector<Vertex> arrivals;     // site added by particle i
    std::vector<std::uint64_t> steps;  // walk length of particle i
};

// Particle i walks with RngStream(seed, i) until it leaves the current cluster.
IdlaRun idla_run(std::int64_t n, std::uint64_t seed);

// Share of ball_region(n (1 - eps)) covered by the cluster.
double containment_fraction(const IdlaRun& run, double eps);

// Infimum of eps with ball_region(n (1 - eps)) inside the cluster (0 when the whole ball is).
double containment_threshold(const IdlaRun& run);

struct MEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int trials = 0;
};

// Monte Carlo mean of M: walks from o, among n, that visit z before leaving ball_region(n).
MEstimate estimate_M(double n, Vertex z, int trials, std::uint64_t seed);

// n G(o, z) / G(z, z) for the walk stopped on leaving ball_region(n).
double expected_M(double n, Vertex z);

struct TrialSummary {
    std::int64_t n = 0;
    std::uint64_t seed = 0;
    bool contained = false;
    double fraction = 0.0;
    double eps_threshold = 0.0;
    double wall_ms = 0.0;
};

// Independent runs for seeds first_seed .. first_seed + trials - 1, sorted by seed.
std::vector<TrialSummary> run_trials(std::int64_t n, double eps, std::uint64_t first_seed,
                                     int trials, int jobs);

}  // namespace combagg::idla
