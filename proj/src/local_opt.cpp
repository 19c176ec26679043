#include "radloc/local_opt.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace radloc {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 identity() {
    return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

// Solve A x = b by Gaussian elimination with partial pivoting; falls back
// to x = b (steepest descent direction) when A is singular.
Vec3 solve3(Mat3 a, Vec3 b) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-14) return b;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vec3 x{};
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

double norm(const Vec3& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

}  // namespace

Vec3 project(const Vec3& theta, const FeasibleBox& box) {
    Vec3 out;
    for (int i = 0; i < 3; ++i)
        out[i] = std::max(box.lower[i], std::min(theta[i], box.upper[i]));
    return out;
}

Vec3 stencil_gradient(const Objective& obj, const Vec3& theta, double h,
                      const FeasibleBox& box) {
    Vec3 g{};
    double j_center = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < 3; ++i) {
        Vec3 fwd = theta, bwd = theta;
        fwd[i] += h;
        bwd[i] -= h;
        const bool fwd_ok = fwd[i] <= box.upper[i];
        const bool bwd_ok = bwd[i] >= box.lower[i];
        if (fwd_ok && bwd_ok) {
            g[i] = (obj(fwd) - obj(bwd)) / (2.0 * h);
        } else if (fwd_ok || bwd_ok) {
            if (std::isnan(j_center)) j_center = obj(theta);
            g[i] = fwd_ok ? (obj(fwd) - j_center) / h : (j_center - obj(bwd)) / h;
        } else {
            g[i] = 0.0;
        }
    }
    return g;
}

InnerResult if_inner(const Objective& obj, const Vec3& theta_in, double h,
                     const IFConfig& cfg, const FeasibleBox& box, double j_entry) {
    long evals = 0;
    auto eval = [&](const Vec3& t) {
        ++evals;
        return obj(t);
    };

    Vec3 theta = project(theta_in, box);
    double j_base = std::isnan(j_entry) ? eval(theta) : j_entry;
    const double tau = cfg.tau_factor * std::abs(j_base);

    Mat3 hessian = identity();
    Vec3 grad{};
    bool have_prev = false;
    bool hessian_scaled = false;
    Vec3 prev_theta{}, prev_grad{};

    // Stencil values double as the finite-difference gradient samples.
    auto poll = [&](Vec3& theta_min, double& j_min) {
        j_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i) {
            Vec3 fwd = theta, bwd = theta;
            fwd[i] += h;
            bwd[i] -= h;
            const bool fwd_ok = fwd[i] <= box.upper[i];
            const bool bwd_ok = bwd[i] >= box.lower[i];
            double jf = 0.0, jb = 0.0;
            if (fwd_ok) {
                jf = eval(fwd);
                if (jf < j_min) {
                    j_min = jf;
                    theta_min = fwd;
                }
            }
            if (bwd_ok) {
                jb = eval(bwd);
                if (jb < j_min) {
                    j_min = jb;
                    theta_min = bwd;
                }
            }
            if (fwd_ok && bwd_ok)
                grad[i] = (jf - jb) / (2.0 * h);
            else if (fwd_ok)
                grad[i] = (jf - j_base) / h;
            else if (bwd_ok)
                grad[i] = (j_base - jb) / h;
            else
                grad[i] = 0.0;
        }
    };

    InnerTermination reason = InnerTermination::MaxIterations;
    for (int p = 1; p <= cfg.maxit; ++p) {
        Vec3 theta_min{};
        double j_min;
        poll(theta_min, j_min);
        // A failed poll alone does not end the scale: the quasi-Newton step
        // below can still interpolate inside the stencil. The scale ends
        // when the step and the stencil both fail.

        const Vec3 proj_step = project(
            {theta[0] - grad[0], theta[1] - grad[1], theta[2] - grad[2]}, box);
        const Vec3 step{theta[0] - proj_step[0], theta[1] - proj_step[1],
                        theta[2] - proj_step[2]};
        if (norm(step) < tau * h) {
            reason = InnerTermination::GradientCriterion;
            break;
        }

        // Projected BFGS model update restricted to epsilon-inactive
        // coordinates; reset to identity on a failed curvature condition.
        if (have_prev) {
            Vec3 s{}, y{};
            for (int i = 0; i < 3; ++i) {
                const bool active = theta[i] - box.lower[i] <= cfg.epsilon_active ||
                                    box.upper[i] - theta[i] <= cfg.epsilon_active;
                s[i] = active ? 0.0 : theta[i] - prev_theta[i];
                y[i] = active ? 0.0 : grad[i] - prev_grad[i];
            }
            double ys = 0.0, yy = 0.0;
            for (int i = 0; i < 3; ++i) {
                ys += y[i] * s[i];
                yy += y[i] * y[i];
            }
            // Calibrate the identity model to the observed curvature before
            // the first update; otherwise the unit scale makes every
            // quasi-Newton step overshoot the backtracking range.
            if (!hessian_scaled && ys > 1e-14) {
                const double gamma = yy / ys;
                for (int i = 0; i < 3; ++i) hessian[i][i] = gamma;
                hessian_scaled = true;
            }
            double s_r_s = 0.0;
            Vec3 rs{};
            for (int i = 0; i < 3; ++i)
                for (int c = 0; c < 3; ++c) rs[i] += hessian[i][c] * s[c];
            for (int i = 0; i < 3; ++i) s_r_s += s[i] * rs[i];
            if (ys > 1e-14 && s_r_s > 1e-14) {
                for (int i = 0; i < 3; ++i)
                    for (int c = 0; c < 3; ++c)
                        hessian[i][c] += y[i] * y[c] / ys - rs[i] * rs[c] / s_r_s;
            } else {
                hessian = identity();
            }
        }
        prev_theta = theta;
        prev_grad = grad;
        have_prev = true;

        const Vec3 dir = solve3(hessian, {-grad[0], -grad[1], -grad[2]});

        // Backtracking with simple decrease; step halves from beta.
        bool ls_ok = false;
        for (int m = 0; m <= cfg.maxitarm; ++m) {
            const double lambda = cfg.beta * std::pow(2.0, -m);
            const Vec3 cand = project(
                {theta[0] + lambda * dir[0], theta[1] + lambda * dir[1],
                 theta[2] + lambda * dir[2]},
                box);
            const double j_cand = eval(cand);
            if (j_cand < j_base) {
                theta = cand;
                j_base = j_cand;
                ls_ok = true;
                break;
            }
        }
        if (!ls_ok) {
            if (j_min < j_base) {
                theta = theta_min;
                j_base = j_min;
            } else {
                reason = InnerTermination::StencilFailure;
                break;
            }
        }

        if (evals >= cfg.budget) break;
    }

    return {theta, j_base, evals, reason};
}

OptResult if_run(const Objective& obj, const Vec3& theta0, const IFConfig& cfg,
                 const FeasibleBox& box) {
    // Work in the unit cube so one stencil scale serves all coordinates.
    Vec3 range;
    for (int i = 0; i < 3; ++i) range[i] = box.upper[i] - box.lower[i];
    auto denorm = [&](const Vec3& u) {
        return Vec3{box.lower[0] + u[0] * range[0], box.lower[1] + u[1] * range[1],
                    box.lower[2] + u[2] * range[2]};
    };
    const Objective unit_obj = [&](const Vec3& u) { return obj(denorm(u)); };
    const FeasibleBox unit_box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};

    Vec3 u;
    for (int i = 0; i < 3; ++i) u[i] = (theta0[i] - box.lower[i]) / range[i];
    u = project(u, unit_box);

    OptResult res;
    long evals = 1;
    double j = unit_obj(u);
    res.trace.push_back({j, j, {cfg.h0, cfg.h0, cfg.h0}});
    for (double h = cfg.h0; h >= cfg.h_min && evals < cfg.budget; h *= 0.5) {
        IFConfig inner_cfg = cfg;
        inner_cfg.budget = cfg.budget - evals;
        const InnerResult r = if_inner(unit_obj, u, h, inner_cfg, unit_box, j);
        u = r.theta;
        j = r.objective;
        evals += r.evaluations;
        res.trace.push_back({j, j, {h, h, h}});
    }

    res.best_scaled = denorm(u);
    res.best_objective = j;
    res.n_evaluations = evals;
    res.budget_exhausted = evals >= cfg.budget;
    res.best_theta = {res.best_scaled[0], res.best_scaled[1], res.best_scaled[2]};
    return res;
}

Vec3 nelder_mead(const Objective& obj, const Vec3& theta0, const FeasibleBox& box,
                 double diameter_tol, long max_evaluations) {
    Vec3 range;
    for (int i = 0; i < 3; ++i) range[i] = box.upper[i] - box.lower[i];
    auto denorm = [&](const Vec3& u) {
        return Vec3{box.lower[0] + u[0] * range[0], box.lower[1] + u[1] * range[1],
                    box.lower[2] + u[2] * range[2]};
    };
    const FeasibleBox unit_box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}};
    long evals = 0;
    auto f = [&](const Vec3& u) {
        ++evals;
        const Vec3 up = project(u, unit_box);
        const double v = obj(denorm(up));
        // Penalize infeasible vertices so the region outside the box is not
        // a plateau the simplex can collapse onto.
        double infeas = 0.0;
        for (int c = 0; c < 3; ++c) infeas += std::abs(u[c] - up[c]);
        return v + infeas * 1e3 * (1.0 + std::abs(v));
    };

    Vec3 u0;
    for (int i = 0; i < 3; ++i)
        u0[i] = std::clamp((theta0[i] - box.lower[i]) / range[i], 0.0, 1.0);

    std::array<Vec3, 4> simplex;
    std::array<double, 4> value;
    simplex[0] = u0;
    for (int i = 1; i < 4; ++i) {
        simplex[i] = u0;
        simplex[i][i - 1] += (u0[i - 1] + 0.05 <= 1.0) ? 0.05 : -0.05;
    }
    for (int i = 0; i < 4; ++i) value[i] = f(simplex[i]);

    while (evals < max_evaluations) {
        std::array<int, 4> ord{0, 1, 2, 3};
        std::sort(ord.begin(), ord.end(),
                  [&](int a, int b) { return value[a] < value[b]; });
        {
            std::array<Vec3, 4> s2;
            std::array<double, 4> v2;
            for (int i = 0; i < 4; ++i) {
                s2[i] = simplex[ord[i]];
                v2[i] = value[ord[i]];
            }
            simplex = s2;
            value = v2;
        }

        double diam = 0.0;
        for (int i = 1; i < 4; ++i) {
            double d = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double dd = simplex[i][c] - simplex[0][c];
                d += dd * dd;
            }
            diam = std::max(diam, std::sqrt(d));
        }
        if (diam < diameter_tol) break;

        Vec3 centroid{};
        for (int i = 0; i < 3; ++i)
            for (int c = 0; c < 3; ++c) centroid[c] += simplex[i][c] / 3.0;

        auto along = [&](double coef) {
            Vec3 p;
            for (int c = 0; c < 3; ++c)
                p[c] = centroid[c] + coef * (simplex[3][c] - centroid[c]);
            return p;
        };

        const Vec3 refl = along(-1.0);
        const double j_refl = f(refl);
        if (j_refl < value[0]) {
            const Vec3 exp_pt = along(-2.0);
            const double j_exp = f(exp_pt);
            if (j_exp < j_refl) {
                simplex[3] = exp_pt;
                value[3] = j_exp;
            } else {
                simplex[3] = refl;
                value[3] = j_refl;
            }
        } else if (j_refl < value[2]) {
            simplex[3] = refl;
            value[3] = j_refl;
        } else {
            const bool outside = j_refl < value[3];
            const Vec3 con = along(outside ? -0.5 : 0.5);
            const double j_con = f(con);
            if (j_con < std::min(j_refl, value[3])) {
                simplex[3] = con;
                value[3] = j_con;
            } else {
                for (int i = 1; i < 4; ++i) {
                    for (int c = 0; c < 3; ++c)
                        simplex[i][c] = simplex[0][c] + 0.5 * (simplex[i][c] - simplex[0][c]);
                    value[i] = f(simplex[i]);
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i < 4; ++i)
        if (value[i] < value[best]) best = i;
    return denorm(project(simplex[best], unit_box));
}

}  // namespace radloc
