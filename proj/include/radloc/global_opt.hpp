#pragma once

#include <optional>
#include <vector>

#include "radloc/likelihood.hpp"
#include "radloc/rng.hpp"

namespace radloc {

/// Early-stopping rules shared by the global methods. stall_window counts
/// reannealing intervals for SA, iterations for PS, generations for GA.
struct StoppingCriteria {
    long max_evaluations = 10000;
    std::optional<double> target_objective;
    int stall_window = 20;
    double stall_tolerance = 1e-6;
};

struct SAConfig {
    Vec3 initial_temperatures{240.0, 180.0, 99.0};
    int reanneal_interval = 50;
    double cooling_base = 0.95;
    int n_starts = 16;
    double fd_delta = 1e-3;
};

struct PSConfig {
    int swarm_size = 16;
    int min_neighborhood = 4;
    double inertia = 1.1;
    double inertia_min = 0.1;
    double inertia_max = 1.1;
    double self_weight = 1.49;
    double social_weight = 1.49;
};

struct GAConfig {
    int population = 16;
    // Zero means "derive from population": r_e = floor(0.05 P) + 1,
    // r_c = round(0.2 (P - r_e)), r_m = P - r_e - r_c.
    int elite_count = 0;
    int crossover_count = 0;
    int mutation_count = 0;
};

GAConfig resolve(GAConfig cfg);

struct TracePoint {
    double best_objective;
    double mean_objective;
    Vec3 spread;  // per-coordinate max - min over the population
};

struct OptResult {
    SourceParams best_theta;  // unscaled when produced via a Scenario
    Vec3 best_scaled{};
    double best_objective = 0.0;
    long n_evaluations = 0;
    bool budget_exhausted = false;
    std::vector<TracePoint> trace;
};

// --- Simulated annealing pieces ---

/// Proposal with explicit uniform draws (r components in [-1,1], repair
/// weight alpha in [0,1]); the Rng overload samples them.
Vec3 sa_propose(const Vec3& theta_old, const Vec3& r, double alpha,
                const Vec3& temperatures, const FeasibleBox& box);
Vec3 sa_propose(const Vec3& theta_old, const Vec3& temperatures,
                const FeasibleBox& box, Rng& rng);

/// Uphill acceptance probability 1 / (1 + exp(dJ / max_i T_i)); downhill
/// moves are accepted unconditionally by the caller.
double sa_accept_probability(double j_new, double j_old, const Vec3& temperatures);

/// Reannealing counters k_i = log(T_i0 / T_i * max_j s_j / s_i), clamped
/// at zero; sensitivities floored at machine epsilon.
Vec3 sa_reanneal_counters(const Vec3& initial_temperatures, const Vec3& temperatures,
                          const Vec3& sensitivities);

// --- Particle swarm pieces ---

struct Particle {
    Vec3 position{};
    Vec3 velocity{};
    Vec3 best_position{};
    double objective = 0.0;
    double best_objective = 0.0;
    double inertia = 1.1;
    int stall_count = 0;
    int neighborhood = 1;
};

/// Velocity/position update with explicit uniform vectors; clamps to box.
void ps_move(Particle& p, const Vec3& neighborhood_best, const Vec3& u1,
             const Vec3& u2, const PSConfig& cfg, const FeasibleBox& box);

/// Post-evaluation bookkeeping: inertia doubling/halving, stall counter,
/// neighborhood growth.
void ps_feedback(Particle& p, bool improved_swarm_best, const PSConfig& cfg);

// --- Genetic algorithm pieces ---

/// One generation: elites verbatim, convex-combination crossover children,
/// mutation towards uniform resamples. Parent selection is rank-based
/// roulette where the lowest objective gets the largest slice.
std::vector<Vec3> ga_next_generation(const std::vector<Vec3>& population,
                                     const std::vector<double>& objective,
                                     const GAConfig& cfg, const FeasibleBox& box,
                                     Rng& rng);

// --- Full runs over a generic objective ---

OptResult sa_minimize(const Objective& obj, const FeasibleBox& box, const SAConfig& cfg,
                      const StoppingCriteria& stop, Rng& rng);
OptResult ps_minimize(const Objective& obj, const FeasibleBox& box, const PSConfig& cfg,
                      const StoppingCriteria& stop, Rng& rng);
OptResult ga_minimize(const Objective& obj, const FeasibleBox& box, const GAConfig& cfg,
                      const StoppingCriteria& stop, Rng& rng);

// --- Scenario-level runs (scaled box, unscaled result) ---

OptResult sa_run(const ObjectiveContext& ctx, const SAConfig& cfg,
                 const StoppingCriteria& stop, Rng& rng);
OptResult ps_run(const ObjectiveContext& ctx, const PSConfig& cfg,
                 const StoppingCriteria& stop, Rng& rng);
OptResult ga_run(const ObjectiveContext& ctx, const GAConfig& cfg,
                 const StoppingCriteria& stop, Rng& rng);

}  // namespace radloc
