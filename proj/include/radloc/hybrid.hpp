#pragma once

#include "radloc/local_opt.hpp"

namespace radloc {

enum class GlobalMethod { SA, PS, GA };

/// Half-widths of the refinement sub-domain, in UNSCALED units
/// (m, m, decays/s).
struct SubdomainSpec {
    Vec3 half_widths{10.0, 10.0, 1e10};
};

struct HybridReport {
    OptResult global_stage;
    FeasibleBox subdomain;  // scaled coordinates
    OptResult local_stage;
    long total_evaluations = 0;
    bool truth_available = false;
    bool truth_in_subdomain = false;
    bool global_budget_exhausted = false;
};

/// [theta* - a, theta* + a] clipped to omega; all in one coordinate system.
FeasibleBox make_subdomain(const Vec3& theta_star, const Vec3& half_widths,
                           const FeasibleBox& omega);

struct HybridConfig {
    GlobalMethod method = GlobalMethod::SA;
    SAConfig sa;
    PSConfig ps;
    GAConfig ga;
    StoppingCriteria stopping;
    IFConfig local;
    SubdomainSpec subdomain;
};

/// Two-stage pipeline: early-stopped global search, sub-domain around the
/// pseudo-optimum, Implicit Filtering refinement started from it.
HybridReport hybrid_run(const ObjectiveContext& ctx, const HybridConfig& cfg, Rng& rng);

}  // namespace radloc
