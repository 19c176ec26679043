#include "radloc/global_opt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "radloc/parallel.hpp"

namespace radloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 clamp_to_box(Vec3 v, const FeasibleBox& box) {
    for (int i = 0; i < 3; ++i) v[i] = std::clamp(v[i], box.lower[i], box.upper[i]);
    return v;
}

bool in_box(const Vec3& v, const FeasibleBox& box) {
    for (int i = 0; i < 3; ++i)
        if (v[i] < box.lower[i] || v[i] > box.upper[i]) return false;
    return true;
}

Vec3 uniform_in_box(const FeasibleBox& box, Rng& rng) {
    return {rng.uniform(box.lower[0], box.upper[0]),
            rng.uniform(box.lower[1], box.upper[1]),
            rng.uniform(box.lower[2], box.upper[2])};
}

struct CountedObjective {
    const Objective* obj;
    std::atomic<long>* count;
    double operator()(const Vec3& t) const {
        count->fetch_add(1, std::memory_order_relaxed);
        return (*obj)(t);
    }
};

TracePoint trace_point(const std::vector<Vec3>& points,
                       const std::vector<double>& values, double best) {
    TracePoint tp{best, 0.0, {0.0, 0.0, 0.0}};
    double sum = 0.0;
    Vec3 lo{kInf, kInf, kInf}, hi{-kInf, -kInf, -kInf};
    for (size_t i = 0; i < points.size(); ++i) {
        sum += values[i];
        for (int c = 0; c < 3; ++c) {
            lo[c] = std::min(lo[c], points[i][c]);
            hi[c] = std::max(hi[c], points[i][c]);
        }
    }
    tp.mean_objective = sum / static_cast<double>(points.size());
    for (int c = 0; c < 3; ++c) tp.spread[c] = hi[c] - lo[c];
    return tp;
}

double rel_change(const Vec3& a, const Vec3& b) {
    double m = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-12});
        m = std::max(m, std::abs(a[i] - b[i]) / scale);
    }
    return m;
}

}  // namespace

GAConfig resolve(GAConfig cfg) {
    const int p = cfg.population;
    if (cfg.elite_count <= 0) cfg.elite_count = static_cast<int>(p * 0.05) + 1;
    if (cfg.crossover_count <= 0)
        cfg.crossover_count = static_cast<int>(std::lround(0.2 * (p - cfg.elite_count)));
    cfg.mutation_count = p - cfg.elite_count - cfg.crossover_count;
    return cfg;
}

// --- SA pieces ---

Vec3 sa_propose(const Vec3& theta_old, const Vec3& r, double alpha,
                const Vec3& temperatures, const FeasibleBox& box) {
    Vec3 cand;
    for (int i = 0; i < 3; ++i) cand[i] = theta_old[i] + r[i] * temperatures[i];
    if (in_box(cand, box)) return cand;
    // Repair: clamp violating components to their bounds, then take a
    // random convex combination with the previous point.
    const Vec3 bar = clamp_to_box(cand, box);
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = alpha * bar[i] + (1.0 - alpha) * theta_old[i];
    return out;
}

Vec3 sa_propose(const Vec3& theta_old, const Vec3& temperatures,
                const FeasibleBox& box, Rng& rng) {
    const Vec3 r{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const double alpha = rng.uniform();
    return sa_propose(theta_old, r, alpha, temperatures, box);
}

double sa_accept_probability(double j_new, double j_old, const Vec3& temperatures) {
    if (j_new < j_old) return 1.0;
    const double t = std::max({temperatures[0], temperatures[1], temperatures[2]});
    const double ratio = (j_new - j_old) / t;
    if (ratio > 700.0) return 0.0;
    return 1.0 / (1.0 + std::exp(ratio));
}

Vec3 sa_reanneal_counters(const Vec3& initial_temperatures, const Vec3& temperatures,
                          const Vec3& sensitivities) {
    Vec3 s = sensitivities;
    for (double& v : s) v = std::max(v, std::numeric_limits<double>::epsilon());
    const double smax = std::max({s[0], s[1], s[2]});
    Vec3 k;
    for (int i = 0; i < 3; ++i) {
        k[i] = std::log(initial_temperatures[i] / temperatures[i] * smax / s[i]);
        k[i] = std::max(k[i], 0.0);
    }
    return k;
}

// --- SA run ---

OptResult sa_minimize(const Objective& obj, const FeasibleBox& box, const SAConfig& cfg,
                      const StoppingCriteria& stop, Rng& rng) {
    std::atomic<long> count{0};
    const Objective counted = CountedObjective{&obj, &count};

    struct Trajectory {
        Vec3 theta;
        double j;
        Vec3 temps;
        Vec3 k{1.0, 1.0, 1.0};
        long accepted = 0;
        Rng rng;
        std::vector<Vec3> reanneal_history;
    };

    const int p = cfg.n_starts;
    std::vector<Trajectory> trajs;
    trajs.reserve(p);
    std::vector<Vec3> batch(p);
    std::vector<double> values;
    for (int i = 0; i < p; ++i) {
        Trajectory t{.theta = {}, .j = 0.0, .temps = cfg.initial_temperatures,
                     .rng = rng.split(1000 + i), .reanneal_history = {}};
        t.theta = uniform_in_box(box, t.rng);
        batch[i] = t.theta;
        trajs.push_back(std::move(t));
    }
    evaluate_batch(counted, batch, values);
    for (int i = 0; i < p; ++i) trajs[i].j = values[i];

    OptResult res;
    res.best_objective = kInf;
    auto consider = [&](const Vec3& t, double j) {
        if (j < res.best_objective) {
            res.best_objective = j;
            res.best_scaled = t;
        }
    };
    for (const auto& t : trajs) consider(t.theta, t.j);

    bool stop_now = false;
    bool restart = false;
    while (!stop_now) {
        if (count.load() >= stop.max_evaluations) {
            res.budget_exhausted = true;
            break;
        }
        for (int i = 0; i < p; ++i)
            batch[i] = sa_propose(trajs[i].theta, trajs[i].temps, box, trajs[i].rng);
        evaluate_batch(counted, batch, values);

        std::vector<int> reanneal_idx;
        for (int i = 0; i < p; ++i) {
            Trajectory& t = trajs[i];
            bool accept = values[i] < t.j;
            if (!accept) {
                const double pa = sa_accept_probability(values[i], t.j, t.temps);
                accept = t.rng.uniform() < pa;
            }
            if (accept) {
                t.theta = batch[i];
                t.j = values[i];
                ++t.accepted;
                consider(t.theta, t.j);
            }
            for (int c = 0; c < 3; ++c)
                t.temps[c] = cfg.initial_temperatures[c] * std::pow(cfg.cooling_base, t.k[c]);
            if (accept && t.accepted % cfg.reanneal_interval == 0)
                reanneal_idx.push_back(i);
            else
                for (int c = 0; c < 3; ++c) t.k[c] += 1.0;
        }

        if (!reanneal_idx.empty()) {
            std::vector<Vec3> probes;
            for (int idx : reanneal_idx) {
                const Trajectory& t = trajs[idx];
                for (int c = 0; c < 3; ++c) {
                    Vec3 probe = t.theta;
                    const double step = (probe[c] + cfg.fd_delta <= box.upper[c])
                                            ? cfg.fd_delta
                                            : -cfg.fd_delta;
                    probe[c] += step;
                    probes.push_back(probe);
                }
            }
            std::vector<double> pj;
            evaluate_batch(counted, probes, pj);
            for (size_t m = 0; m < reanneal_idx.size(); ++m) {
                Trajectory& t = trajs[reanneal_idx[m]];
                Vec3 s;
                for (int c = 0; c < 3; ++c)
                    s[c] = std::abs((pj[3 * m + c] - t.j) / cfg.fd_delta);
                t.k = sa_reanneal_counters(cfg.initial_temperatures, t.temps, s);
                t.reanneal_history.push_back(t.theta);
                const auto& h = t.reanneal_history;
                if (static_cast<int>(h.size()) > stop.stall_window) {
                    bool stalled = true;
                    for (int w = 0; w < stop.stall_window; ++w) {
                        const size_t a = h.size() - 1 - w;
                        if (rel_change(h[a], h[a - 1]) >= stop.stall_tolerance) {
                            stalled = false;
                            break;
                        }
                    }
                    if (stalled) {
                        if (stop.target_objective)
                            restart = true;
                        else
                            stop_now = true;
                    }
                }
            }
        }

        // With a target set, completion means reaching it; a stalled search
        // scatters its trajectories again instead of giving up.
        if (restart) {
            restart = false;
            for (Trajectory& t : trajs) {
                t.theta = uniform_in_box(box, t.rng);
                t.temps = cfg.initial_temperatures;
                t.k = {1.0, 1.0, 1.0};
                t.accepted = 0;
                t.reanneal_history.clear();
                batch[&t - trajs.data()] = t.theta;
            }
            evaluate_batch(counted, batch, values);
            for (int i = 0; i < p; ++i) {
                trajs[i].j = values[i];
                consider(trajs[i].theta, trajs[i].j);
            }
        }

        std::vector<Vec3> pts(p);
        std::vector<double> js(p);
        for (int i = 0; i < p; ++i) {
            pts[i] = trajs[i].theta;
            js[i] = trajs[i].j;
        }
        res.trace.push_back(trace_point(pts, js, res.best_objective));

        if (stop.target_objective && res.best_objective <= *stop.target_objective)
            stop_now = true;
        if (!stop_now && count.load() >= stop.max_evaluations) {
            res.budget_exhausted = true;
            stop_now = true;
        }
    }

    res.n_evaluations = count.load();
    res.best_theta = {res.best_scaled[0], res.best_scaled[1], res.best_scaled[2]};
    return res;
}

// --- PS pieces ---

void ps_move(Particle& p, const Vec3& neighborhood_best, const Vec3& u1,
             const Vec3& u2, const PSConfig& cfg, const FeasibleBox& box) {
    for (int i = 0; i < 3; ++i) {
        p.velocity[i] = p.inertia * p.velocity[i] +
                        cfg.self_weight * u1[i] * (p.best_position[i] - p.position[i]) +
                        cfg.social_weight * u2[i] * (neighborhood_best[i] - p.position[i]);
        p.position[i] = p.position[i] + p.velocity[i];
        if (p.position[i] < box.lower[i]) p.position[i] = box.lower[i];
        if (p.position[i] > box.upper[i]) p.position[i] = box.upper[i];
    }
}

void ps_feedback(Particle& p, bool improved_swarm_best, const PSConfig& cfg) {
    if (improved_swarm_best) {
        p.stall_count = std::max(0, p.stall_count - 1);
        p.neighborhood = cfg.min_neighborhood;
    } else {
        p.stall_count += 1;
        p.neighborhood =
            std::min(p.neighborhood + cfg.min_neighborhood, cfg.swarm_size - 1);
    }
    // Inertia reacts to the counter every step: growth while the particle
    // keeps finding swarm bests, decay once it has been stuck a while.
    if (p.stall_count < 2) p.inertia *= 2.0;
    if (p.stall_count > 5) p.inertia /= 2.0;
    p.inertia = std::clamp(p.inertia, cfg.inertia_min, cfg.inertia_max);
}

OptResult ps_minimize(const Objective& obj, const FeasibleBox& box, const PSConfig& cfg,
                      const StoppingCriteria& stop, Rng& rng) {
    std::atomic<long> count{0};
    const Objective counted = CountedObjective{&obj, &count};

    const int p = cfg.swarm_size;
    std::vector<Particle> swarm(p);
    std::vector<Vec3> batch(p);
    std::vector<double> values;
    for (int i = 0; i < p; ++i) {
        Particle& pt = swarm[i];
        pt.position = uniform_in_box(box, rng);
        // Velocities start as recentred uniforms spanning half the box
        // either way.
        for (int c = 0; c < 3; ++c)
            pt.velocity[c] = rng.uniform(box.lower[c], box.upper[c]) -
                             0.5 * (box.lower[c] + box.upper[c]);
        pt.inertia = cfg.inertia;
        pt.neighborhood = cfg.min_neighborhood;
        batch[i] = pt.position;
    }
    evaluate_batch(counted, batch, values);

    OptResult res;
    res.best_objective = kInf;
    for (int i = 0; i < p; ++i) {
        swarm[i].objective = values[i];
        swarm[i].best_position = swarm[i].position;
        swarm[i].best_objective = values[i];
        if (values[i] < res.best_objective) {
            res.best_objective = values[i];
            res.best_scaled = swarm[i].position;
        }
    }

    std::vector<double> best_history{res.best_objective};
    std::vector<int> pick;
    bool stop_now = false;
    while (!stop_now) {
        if (count.load() >= stop.max_evaluations) {
            res.budget_exhausted = true;
            break;
        }
        for (int i = 0; i < p; ++i) {
            Particle& pt = swarm[i];
            // Random neighborhood of size N excluding self; the best
            // remembered point in it guides the social term.
            const int n = std::clamp(pt.neighborhood, 1, p - 1);
            pick.clear();
            for (int m = 0; m < n; ++m) {
                int cand;
                do {
                    cand = rng.uniform_int(p);
                } while (cand == i ||
                         std::find(pick.begin(), pick.end(), cand) != pick.end());
                pick.push_back(cand);
            }
            int g = pick[0];
            for (int idx : pick)
                if (swarm[idx].objective < swarm[g].objective) g = idx;
            const Vec3 u1{rng.uniform(), rng.uniform(), rng.uniform()};
            const Vec3 u2{rng.uniform(), rng.uniform(), rng.uniform()};
            ps_move(pt, swarm[g].position, u1, u2, cfg, box);
            batch[i] = pt.position;
        }
        evaluate_batch(counted, batch, values);
        bool improved_any = false;
        for (int i = 0; i < p; ++i) {
            Particle& pt = swarm[i];
            pt.objective = values[i];
            if (values[i] < pt.best_objective) {
                pt.best_objective = values[i];
                pt.best_position = pt.position;
            }
            if (values[i] < res.best_objective) {
                res.best_objective = values[i];
                res.best_scaled = pt.position;
                improved_any = true;
            }
        }
        // The adaptive state reacts to the swarm as a whole: one improved
        // best loosens every particle, a dry iteration tightens them all.
        // Per-particle bookkeeping would freeze the non-improving majority
        // while the lone improver oscillates.
        for (int i = 0; i < p; ++i) {
            Particle& pt = swarm[i];
            ps_feedback(pt, improved_any, cfg);
        }

        std::vector<Vec3> pts(p);
        for (int i = 0; i < p; ++i) pts[i] = swarm[i].position;
        res.trace.push_back(trace_point(pts, values, res.best_objective));
        best_history.push_back(res.best_objective);

        if (stop.target_objective && res.best_objective <= *stop.target_objective)
            stop_now = true;
        if (!stop_now && static_cast<int>(best_history.size()) > stop.stall_window) {
            const double then = best_history[best_history.size() - 1 - stop.stall_window];
            const double now = best_history.back();
            const double scale = std::max(std::abs(then), 1e-12);
            if (std::abs(then - now) / scale < stop.stall_tolerance) {
                if (stop.target_objective) {
                    // Target not reached yet: scatter the swarm and keep going.
                    for (int i = 0; i < p; ++i) {
                        Particle& pt = swarm[i];
                        pt.position = uniform_in_box(box, rng);
                        for (int c = 0; c < 3; ++c)
                            pt.velocity[c] = rng.uniform(box.lower[c], box.upper[c]) -
                                             0.5 * (box.lower[c] + box.upper[c]);
                        pt.inertia = cfg.inertia;
                        pt.neighborhood = cfg.min_neighborhood;
                        pt.stall_count = 0;
                        batch[i] = pt.position;
                    }
                    evaluate_batch(counted, batch, values);
                    for (int i = 0; i < p; ++i) {
                        swarm[i].objective = values[i];
                        swarm[i].best_position = swarm[i].position;
                        swarm[i].best_objective = values[i];
                        if (values[i] < res.best_objective) {
                            res.best_objective = values[i];
                            res.best_scaled = swarm[i].position;
                        }
                    }
                    best_history.assign(1, res.best_objective);
                } else {
                    stop_now = true;
                }
            }
        }
        if (!stop_now && count.load() >= stop.max_evaluations) {
            res.budget_exhausted = true;
            stop_now = true;
        }
    }

    res.n_evaluations = count.load();
    res.best_theta = {res.best_scaled[0], res.best_scaled[1], res.best_scaled[2]};
    return res;
}

// --- GA pieces ---

std::vector<Vec3> ga_next_generation(const std::vector<Vec3>& population,
                                     const std::vector<double>& objective,
                                     const GAConfig& raw_cfg, const FeasibleBox& box,
                                     Rng& rng) {
    const GAConfig cfg = resolve(raw_cfg);
    const int p = static_cast<int>(population.size());
    std::vector<int> order(p);
    for (int i = 0; i < p; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return objective[a] < objective[b]; });

    // Rank-based roulette: the lowest objective gets the largest slice.
    std::vector<double> cum(p);
    double total = 0.0;
    for (int q = 0; q < p; ++q) {
        total += static_cast<double>(p - q);
        cum[q] = total;
    }
    auto select_parent = [&]() {
        const double u = rng.uniform() * total;
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        return order[static_cast<int>(it - cum.begin())];
    };

    std::vector<Vec3> next;
    next.reserve(p);
    for (int e = 0; e < cfg.elite_count; ++e) next.push_back(population[order[e]]);
    for (int s = 0; s < cfg.crossover_count; ++s) {
        const int j1 = select_parent();
        int j2 = select_parent();
        for (int tries = 0; j2 == j1 && tries < 8; ++tries) j2 = select_parent();
        Vec3 child;
        for (int c = 0; c < 3; ++c) {
            const double lam = rng.uniform();
            child[c] = lam * population[j1][c] + (1.0 - lam) * population[j2][c];
        }
        next.push_back(child);
    }
    for (int t = 0; t < cfg.mutation_count; ++t) {
        const int j1 = select_parent();
        Vec3 child;
        for (int c = 0; c < 3; ++c) {
            const double lam = rng.uniform();
            const double eps = rng.uniform(box.lower[c], box.upper[c]);
            child[c] = lam * population[j1][c] + (1.0 - lam) * eps;
        }
        next.push_back(child);
    }
    return next;
}

OptResult ga_minimize(const Objective& obj, const FeasibleBox& box, const GAConfig& raw_cfg,
                      const StoppingCriteria& stop, Rng& rng) {
    std::atomic<long> count{0};
    const Objective counted = CountedObjective{&obj, &count};
    const GAConfig cfg = resolve(raw_cfg);
    const int p = cfg.population;

    std::vector<Vec3> pop(p);
    for (int i = 0; i < p; ++i) pop[i] = uniform_in_box(box, rng);
    std::vector<double> fitness;
    evaluate_batch(counted, pop, fitness);

    OptResult res;
    res.best_objective = kInf;
    auto consider = [&](const Vec3& t, double j) {
        if (j < res.best_objective) {
            res.best_objective = j;
            res.best_scaled = t;
        }
    };
    for (int i = 0; i < p; ++i) consider(pop[i], fitness[i]);

    std::vector<double> best_history{res.best_objective};
    bool stop_now = false;
    while (!stop_now) {
        if (count.load() >= stop.max_evaluations) {
            res.budget_exhausted = true;
            break;
        }
        std::vector<Vec3> next = ga_next_generation(pop, fitness, cfg, box, rng);
        // Elites keep their objective values; only children are new runs.
        std::vector<double> next_fit(p);
        std::vector<int> elite_src(p, -1);
        for (int e = 0; e < cfg.elite_count; ++e) {
            // ga_next_generation placed elites first in sorted order.
            int src = -1;
            for (int i = 0; i < p; ++i)
                if (pop[i] == next[e] && elite_src[i] < 0) {
                    src = i;
                    break;
                }
            next_fit[e] = src >= 0 ? fitness[src] : counted(next[e]);
            if (src >= 0) elite_src[src] = e;
        }
        std::vector<Vec3> children(next.begin() + cfg.elite_count, next.end());
        std::vector<double> child_fit;
        evaluate_batch(counted, children, child_fit);
        for (int i = cfg.elite_count; i < p; ++i)
            next_fit[i] = child_fit[i - cfg.elite_count];
        pop = std::move(next);
        fitness = std::move(next_fit);
        for (int i = 0; i < p; ++i) consider(pop[i], fitness[i]);

        res.trace.push_back(trace_point(pop, fitness, res.best_objective));
        best_history.push_back(res.best_objective);

        if (stop.target_objective && res.best_objective <= *stop.target_objective)
            stop_now = true;
        if (!stop_now && static_cast<int>(best_history.size()) > stop.stall_window) {
            const double then = best_history[best_history.size() - 1 - stop.stall_window];
            const double scale = std::max(std::abs(then), 1e-12);
            if (std::abs(then - best_history.back()) / scale < stop.stall_tolerance) {
                if (stop.target_objective) {
                    // Target not reached yet: resample the population and
                    // keep going. The incumbent best stays out of the pool
                    // so elitism cannot drag everyone back into the same
                    // basin; it is still the reported answer.
                    for (int i = 0; i < p; ++i) pop[i] = uniform_in_box(box, rng);
                    evaluate_batch(counted, pop, fitness);
                    for (int i = 0; i < p; ++i) consider(pop[i], fitness[i]);
                    best_history.assign(1, res.best_objective);
                } else {
                    stop_now = true;
                }
            }
        }
        if (!stop_now && count.load() >= stop.max_evaluations) {
            res.budget_exhausted = true;
            stop_now = true;
        }
    }

    res.n_evaluations = count.load();
    res.best_theta = {res.best_scaled[0], res.best_scaled[1], res.best_scaled[2]};
    return res;
}

// --- Scenario-level wrappers ---

namespace {
OptResult finish_scenario_result(OptResult res, const ObjectiveContext& ctx) {
    res.best_theta = unscale(*ctx.scenario, res.best_scaled);
    return res;
}
}  // namespace

OptResult sa_run(const ObjectiveContext& ctx, const SAConfig& cfg,
                 const StoppingCriteria& stop, Rng& rng) {
    return finish_scenario_result(
        sa_minimize(make_objective(ctx), scaled_box(*ctx.scenario), cfg, stop, rng), ctx);
}

OptResult ps_run(const ObjectiveContext& ctx, const PSConfig& cfg,
                 const StoppingCriteria& stop, Rng& rng) {
    return finish_scenario_result(
        ps_minimize(make_objective(ctx), scaled_box(*ctx.scenario), cfg, stop, rng), ctx);
}

OptResult ga_run(const ObjectiveContext& ctx, const GAConfig& cfg,
                 const StoppingCriteria& stop, Rng& rng) {
    return finish_scenario_result(
        ga_minimize(make_objective(ctx), scaled_box(*ctx.scenario), cfg, stop, rng), ctx);
}

}  // namespace radloc
