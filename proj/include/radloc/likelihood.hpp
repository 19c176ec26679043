#pragma once

#include <array>
#include <atomic>
#include <functional>
#include <limits>

#include "radloc/transport.hpp"

namespace radloc {

using Vec3 = std::array<double, 3>;

/// Objective over SCALED coordinates: x, y in meters, third coordinate in
/// intensity-scale units (the reference box maps S0 onto [1, 100]).
using Objective = std::function<double(const Vec3&)>;

/// Data + model bundle handed to every objective evaluation. The counter
/// increments exactly once per evaluation, including parallel ones.
struct ObjectiveContext {
    const Scenario* scenario = nullptr;
    const ObservationSet* observations = nullptr;
    mutable std::atomic<long> n_evaluations{0};

    ObjectiveContext(const Scenario& scn, const ObservationSet& obs)
        : scenario(&scn), observations(&obs) {}
    long evaluations() const { return n_evaluations.load(); }
};

/// Feasible box in scaled coordinates.
FeasibleBox scaled_box(const Scenario& scn);

SourceParams unscale(const Scenario& scn, const Vec3& scaled);
Vec3 scale_params(const Scenario& scn, const SourceParams& theta);

/// log pi(V | theta), factorial terms included via lgamma. Returns -inf
/// (with no throw) when any detector mean is nonpositive.
double log_likelihood(const ObjectiveContext& ctx, const Vec3& scaled_theta);

/// J(theta) = 1/2 sum_ij [ -v_ij log f_i + f_i ]; the quantity every
/// optimizer minimizes. Counts one evaluation.
double neg_log_objective(const ObjectiveContext& ctx, const Vec3& scaled_theta);

/// Ordinary least squares sum_ij (v_ij - f_i)^2, used only to seed DRAM.
double ols_objective(const ObjectiveContext& ctx, const Vec3& scaled_theta);

/// Callable adapter around neg_log_objective.
Objective make_objective(const ObjectiveContext& ctx);
Objective make_ols_objective(const ObjectiveContext& ctx);

}  // namespace radloc
