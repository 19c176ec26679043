#pragma once

#include <cmath>
#include <limits>

#include "radloc/global_opt.hpp"

namespace radloc {

struct IFConfig {
    long budget = 300;
    int maxit = 50;
    int maxitarm = 3;
    double tau_factor = 1.2e-20;  // tau = tau_factor * |J(theta)| at inner entry
    double beta = 1.0;            // initial line-search step
    double h0 = 0.5;
    double h_min = std::pow(2.0, -15);
    double epsilon_active = 1e-6;
};

enum class InnerTermination { StencilFailure, GradientCriterion, MaxIterations };

struct InnerResult {
    Vec3 theta;
    double objective;
    long evaluations;
    InnerTermination reason;
};

/// Componentwise projection onto the box; idempotent.
Vec3 project(const Vec3& theta, const FeasibleBox& box);

/// Central-difference stencil gradient; falls back to one-sided when a
/// stencil point leaves the box, zero when both sides are infeasible.
Vec3 stencil_gradient(const Objective& obj, const Vec3& theta, double h,
                      const FeasibleBox& box);

/// One inner loop at fixed scale h: stencil poll, projected-BFGS step,
/// simple-decrease line search. Never increases the objective.
InnerResult if_inner(const Objective& obj, const Vec3& theta, double h,
                     const IFConfig& cfg, const FeasibleBox& box,
                     double j_entry = std::numeric_limits<double>::quiet_NaN());

/// Full Implicit Filtering: halve h from h0 down to h_min, inner loop at
/// each scale, respecting the evaluation budget. Operates internally on
/// the unit cube so one h serves all coordinates.
OptResult if_run(const Objective& obj, const Vec3& theta0, const IFConfig& cfg,
                 const FeasibleBox& box);

/// Nelder-Mead simplex with projection into the box; used to seed DRAM
/// from the least-squares objective.
Vec3 nelder_mead(const Objective& obj, const Vec3& theta0, const FeasibleBox& box,
                 double diameter_tol = 1e-6, long max_evaluations = 2000);

}  // namespace radloc
