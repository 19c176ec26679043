#include "radloc/likelihood.hpp"

#include <cmath>
#include <vector>

namespace radloc {

namespace {

// One "model run": expected counts per detector. Counts one evaluation.
std::vector<double> detector_means(const ObjectiveContext& ctx, const Vec3& scaled) {
    ctx.n_evaluations.fetch_add(1, std::memory_order_relaxed);
    const Scenario& scn = *ctx.scenario;
    const SourceParams theta = unscale(scn, scaled);
    std::vector<double> f(scn.detectors.size());
    for (size_t i = 0; i < scn.detectors.size(); ++i)
        f[i] = mean_count(scn.detectors[i], theta, scn.geometry, scn.background);
    return f;
}

}  // namespace

FeasibleBox scaled_box(const Scenario& scn) {
    FeasibleBox b = scn.feasible_box;
    b.lower[2] /= scn.intensity_scale;
    b.upper[2] /= scn.intensity_scale;
    return b;
}

SourceParams unscale(const Scenario& scn, const Vec3& s) {
    return {s[0], s[1], s[2] * scn.intensity_scale};
}

Vec3 scale_params(const Scenario& scn, const SourceParams& theta) {
    return {theta.x, theta.y, theta.s0 / scn.intensity_scale};
}

double log_likelihood(const ObjectiveContext& ctx, const Vec3& scaled_theta) {
    const std::vector<double> f = detector_means(ctx, scaled_theta);
    const ObservationSet& obs = *ctx.observations;
    double ll = 0.0;
    for (int i = 0; i < obs.n_det; ++i) {
        if (f[i] <= 0.0) return -std::numeric_limits<double>::infinity();
        const double logf = std::log(f[i]);
        for (int j = 0; j < obs.n_rep; ++j) {
            const double v = static_cast<double>(obs.at(i, j));
            ll += v * logf - std::lgamma(v + 1.0);
        }
        ll -= obs.n_rep * f[i];
    }
    return ll;
}

double neg_log_objective(const ObjectiveContext& ctx, const Vec3& scaled_theta) {
    const std::vector<double> f = detector_means(ctx, scaled_theta);
    const ObservationSet& obs = *ctx.observations;
    double j_val = 0.0;
    for (int i = 0; i < obs.n_det; ++i) {
        if (f[i] <= 0.0) return std::numeric_limits<double>::infinity();
        const double logf = std::log(f[i]);
        double row = 0.0;
        for (int j = 0; j < obs.n_rep; ++j)
            row -= static_cast<double>(obs.at(i, j)) * logf;
        j_val += row + obs.n_rep * f[i];
    }
    return 0.5 * j_val;
}

double ols_objective(const ObjectiveContext& ctx, const Vec3& scaled_theta) {
    const std::vector<double> f = detector_means(ctx, scaled_theta);
    const ObservationSet& obs = *ctx.observations;
    double s = 0.0;
    for (int i = 0; i < obs.n_det; ++i)
        for (int j = 0; j < obs.n_rep; ++j) {
            const double r = static_cast<double>(obs.at(i, j)) - f[i];
            s += r * r;
        }
    return s;
}

Objective make_objective(const ObjectiveContext& ctx) {
    return [&ctx](const Vec3& t) { return neg_log_objective(ctx, t); };
}

Objective make_ols_objective(const ObjectiveContext& ctx) {
    return [&ctx](const Vec3& t) { return ols_objective(ctx, t); };
}

}  // namespace radloc
