#include "radloc/hybrid.hpp"

#include <algorithm>
#include <stdexcept>

namespace radloc {

FeasibleBox make_subdomain(const Vec3& theta_star, const Vec3& half_widths,
                           const FeasibleBox& omega) {
    FeasibleBox out;
    for (int i = 0; i < 3; ++i) {
        out.lower[i] = std::max(theta_star[i] - half_widths[i], omega.lower[i]);
        out.upper[i] = std::min(theta_star[i] + half_widths[i], omega.upper[i]);
        if (out.lower[i] >= out.upper[i])
            throw std::invalid_argument("make_subdomain: theta_star outside omega");
    }
    return out;
}

HybridReport hybrid_run(const ObjectiveContext& ctx, const HybridConfig& cfg, Rng& rng) {
    HybridReport report;
    Rng global_rng = rng.split(1);
    switch (cfg.method) {
        case GlobalMethod::SA:
            report.global_stage = sa_run(ctx, cfg.sa, cfg.stopping, global_rng);
            break;
        case GlobalMethod::PS:
            report.global_stage = ps_run(ctx, cfg.ps, cfg.stopping, global_rng);
            break;
        case GlobalMethod::GA:
            report.global_stage = ga_run(ctx, cfg.ga, cfg.stopping, global_rng);
            break;
    }
    report.global_budget_exhausted = report.global_stage.budget_exhausted;

    const Scenario& scn = *ctx.scenario;
    // Half-widths arrive unscaled; the intensity one is converted into the
    // scaled axis the optimizers use.
    const Vec3 a_scaled{cfg.subdomain.half_widths[0], cfg.subdomain.half_widths[1],
                        cfg.subdomain.half_widths[2] / scn.intensity_scale};
    report.subdomain =
        make_subdomain(report.global_stage.best_scaled, a_scaled, scaled_box(scn));

    if (scn.has_true_source) {
        report.truth_available = true;
        const Vec3 truth = scale_params(scn, scn.true_source);
        report.truth_in_subdomain = true;
        for (int i = 0; i < 3; ++i)
            if (truth[i] < report.subdomain.lower[i] || truth[i] > report.subdomain.upper[i])
                report.truth_in_subdomain = false;
    }

    report.local_stage = if_run(make_objective(ctx), report.global_stage.best_scaled,
                                cfg.local, report.subdomain);
    report.local_stage.best_theta = unscale(scn, report.local_stage.best_scaled);
    report.total_evaluations =
        report.global_stage.n_evaluations + report.local_stage.n_evaluations;
    return report;
}

}  // namespace radloc
