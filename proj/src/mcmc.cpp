#include "radloc/mcmc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "radloc/local_opt.hpp"
#include "radloc/parallel.hpp"

namespace radloc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Mat3 = std::array<std::array<double, 3>, 3>;

bool in_box(const Vec3& v, const FeasibleBox& box) {
    for (int i = 0; i < 3; ++i)
        if (v[i] < box.lower[i] || v[i] > box.upper[i]) return false;
    return true;
}

// Lower-triangular Cholesky factor; false when not SPD.
bool cholesky(const Mat3& a, Mat3& l) {
    l = {};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (int k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            if (i == j) {
                if (s <= 0.0) return false;
                l[i][i] = std::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    return true;
}

// d^T V^{-1} d given the Cholesky factor of V.
double mahalanobis_sq(const Mat3& l, const Vec3& d) {
    Vec3 y{};
    for (int i = 0; i < 3; ++i) {
        double s = d[i];
        for (int k = 0; k < i; ++k) s -= l[i][k] * y[k];
        y[i] = s / l[i][i];
    }
    return y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
}

// Running covariance accumulator for the adaptation step.
struct CovAccumulator {
    long n = 0;
    Vec3 mean{};
    Mat3 m2{};  // sum of centered outer products

    void add(const Vec3& x) {
        ++n;
        Vec3 d;
        for (int i = 0; i < 3; ++i) d[i] = x[i] - mean[i];
        for (int i = 0; i < 3; ++i) mean[i] += d[i] / static_cast<double>(n);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m2[i][j] += d[i] * (x[j] - mean[j]);
    }
    Mat3 covariance() const {
        Mat3 c{};
        if (n < 2) return c;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) c[i][j] = m2[i][j] / static_cast<double>(n - 1);
        return c;
    }
};

double segment_mean(const std::vector<double>& x, size_t lo, size_t hi) {
    double s = 0.0;
    for (size_t i = lo; i < hi; ++i) s += x[i];
    return s / static_cast<double>(hi - lo);
}

// Spectral density at frequency zero via Bartlett-windowed autocovariances.
double spectrum0(const std::vector<double>& x, size_t lo, size_t hi) {
    const size_t n = hi - lo;
    const double mean = segment_mean(x, lo, hi);
    const size_t lag_max =
        std::min(n - 1, static_cast<size_t>(std::floor(2.0 * std::sqrt(static_cast<double>(n)))));
    double s = 0.0;
    for (size_t lag = 0; lag <= lag_max; ++lag) {
        double c = 0.0;
        for (size_t i = lo; i + lag < hi; ++i)
            c += (x[i] - mean) * (x[i + lag] - mean);
        c /= static_cast<double>(n);
        const double w = 1.0 - static_cast<double>(lag) / static_cast<double>(lag_max + 1);
        s += (lag == 0 ? 1.0 : 2.0) * w * c;
    }
    return s;
}

}  // namespace

Vec3 ChainSet::posterior_mean(double last_frac) const {
    Vec3 m{};
    long count = 0;
    const long start = burn_in + static_cast<long>((1.0 - last_frac) * (n_iterations - burn_in));
    for (int c = 0; c < n_chains; ++c)
        for (long k = start; k < n_iterations; ++k) {
            const Vec3& s = at(c, k);
            for (int i = 0; i < 3; ++i) m[i] += s[i];
            ++count;
        }
    for (int i = 0; i < 3; ++i) m[i] /= static_cast<double>(count);
    return m;
}

GewekeResult geweke(const std::vector<double>& chain, double first_frac,
                    double last_frac) {
    if (chain.size() < 100) throw std::invalid_argument("geweke: chain too short");
    const size_t n = chain.size();
    const size_t n1 = static_cast<size_t>(first_frac * n);
    const size_t lo2 = n - static_cast<size_t>(last_frac * n);

    const double m1 = segment_mean(chain, 0, n1);
    const double m2 = segment_mean(chain, lo2, n);
    const double v1 = spectrum0(chain, 0, n1) / static_cast<double>(n1);
    const double v2 = spectrum0(chain, lo2, n) / static_cast<double>(n - lo2);

    GewekeResult res;
    // Relative floor: a constant chain leaves only rounding noise in the
    // spectral estimates, which must still count as degenerate.
    const double scale = std::max({std::abs(m1), std::abs(m2), 1.0});
    if (v1 + v2 <= 1e-24 * scale * scale) {
        res.degenerate = true;
        return res;
    }
    res.z = (m1 - m2) / std::sqrt(v1 + v2);
    res.score = std::erfc(std::abs(res.z) / std::sqrt(2.0));
    return res;
}

GelmanRubinResult gelman_rubin(const std::vector<std::vector<double>>& chains,
                               double last_frac) {
    if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need >= 2 chains");
    const size_t len = chains[0].size();
    for (const auto& c : chains)
        if (c.size() != len) throw std::invalid_argument("gelman_rubin: unequal lengths");
    const size_t lo = len - static_cast<size_t>(last_frac * len);
    const size_t n = len - lo;
    const size_t m = chains.size();

    std::vector<double> means(m);
    double w = 0.0;
    for (size_t c = 0; c < m; ++c) {
        means[c] = segment_mean(chains[c], lo, len);
        double v = 0.0;
        for (size_t i = lo; i < len; ++i) {
            const double d = chains[c][i] - means[c];
            v += d * d;
        }
        w += v / static_cast<double>(n - 1);
    }
    w /= static_cast<double>(m);

    double grand = 0.0;
    for (double v : means) grand += v;
    grand /= static_cast<double>(m);
    double b = 0.0;
    for (double v : means) b += (v - grand) * (v - grand);
    b *= static_cast<double>(n) / static_cast<double>(m - 1);

    GelmanRubinResult res;
    const double scale = std::max(std::abs(grand), 1.0);
    if (w <= 1e-24 * scale * scale) {
        res.degenerate = true;
        return res;
    }
    const double n_d = static_cast<double>(n);
    res.r = std::sqrt(((n_d - 1.0) / n_d * w + b / n_d) / w);
    return res;
}

ChainSet dram_run(const LogDensity& log_post, const FeasibleBox& box,
                  const DRAMConfig& cfg, const Vec3& start, Rng& rng) {
    if (!in_box(start, box)) throw std::invalid_argument("dram_run: start outside box");

    Vec3 sigma = cfg.initial_sigma;
    for (int i = 0; i < 3; ++i) {
        if (sigma[i] <= 0.0)
            sigma[i] = std::max(0.05 * std::abs(start[i]),
                                1e-3 * (box.upper[i] - box.lower[i]));
    }
    Mat3 cov{};
    for (int i = 0; i < 3; ++i) cov[i][i] = sigma[i] * sigma[i];
    Mat3 factor;
    cholesky(cov, factor);

    const long total = cfg.burn_in + cfg.n_iterations;
    ChainSet out;
    out.n_chains = 1;
    out.n_iterations = total;
    out.burn_in = cfg.burn_in;
    out.samples.reserve(total);
    out.log_posteriors.reserve(total);

    Vec3 theta = start;
    double lp = log_post(theta);
    CovAccumulator acc;
    acc.add(theta);

    auto draw_z = [&]() { return Vec3{rng.normal(), rng.normal(), rng.normal()}; };
    auto propose = [&](double scale) {
        const Vec3 z = draw_z();
        Vec3 t = theta;
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k <= i; ++k) t[i] += scale * factor[i][k] * z[k];
        return t;
    };
    auto density = [&](const Vec3& t) { return in_box(t, box) ? log_post(t) : kNegInf; };

    for (long k = 1; k <= total; ++k) {
        const Vec3 cand = propose(1.0);
        const double lp_cand = density(cand);
        const double log_alpha = std::min(0.0, lp_cand - lp);
        if (std::log(rng.uniform() + 1e-300) < log_alpha) {
            theta = cand;
            lp = lp_cand;
            ++out.accept_stage1;
        } else {
            // Delayed rejection: narrower second-stage candidate with the
            // detailed-balance correction.
            const Vec3 cand2 = propose(cfg.dr_scale);
            const double lp_cand2 = density(cand2);
            bool accepted2 = false;
            if (lp_cand2 > kNegInf) {
                Vec3 d12, d01;
                for (int i = 0; i < 3; ++i) {
                    d12[i] = cand[i] - cand2[i];
                    d01[i] = cand[i] - theta[i];
                }
                const double log_j_num = -0.5 * mahalanobis_sq(factor, d12);
                const double log_j_den = -0.5 * mahalanobis_sq(factor, d01);
                const double alpha_12 = std::min(1.0, std::exp(lp_cand - lp_cand2));
                const double alpha_01 = std::min(1.0, std::exp(lp_cand - lp));
                if (alpha_12 < 1.0 && alpha_01 < 1.0) {
                    const double log_alpha2 = std::min(
                        0.0, lp_cand2 + log_j_num + std::log1p(-alpha_12) - lp -
                                 log_j_den - std::log1p(-alpha_01));
                    accepted2 = std::log(rng.uniform() + 1e-300) < log_alpha2;
                }
            }
            if (accepted2) {
                theta = cand2;
                lp = lp_cand2;
                ++out.accept_stage2;
            } else {
                ++out.rejections;
            }
        }

        out.samples.push_back(theta);
        out.log_posteriors.push_back(lp);
        acc.add(theta);

        if (k % cfg.adapt_interval == 1 && acc.n > 3) {
            Mat3 v = acc.covariance();
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    v[i][j] *= cfg.scale_sp;
                    if (i == j) v[i][j] += 1e-10;
                }
            Mat3 f2;
            if (cholesky(v, f2))
                factor = f2;
            else
                ++out.cholesky_fallbacks;
        }
    }
    return out;
}

ChainSet dream_run(const LogDensity& log_post, const FeasibleBox& box,
                   const DREAMConfig& cfg, Rng& rng) {
    const int p = cfg.n_chains;
    const int delta = cfg.n_pairs;
    if (p < 2 * delta + 1)
        throw std::invalid_argument("dream_run: need n_chains >= 2*n_pairs + 1");

    const long total = cfg.n_iterations;
    const long burn = static_cast<long>(cfg.burn_in_fraction * total);
    ChainSet out;
    out.n_chains = p;
    out.n_iterations = total;
    out.burn_in = burn;
    out.samples.resize(static_cast<size_t>(p) * total);
    out.log_posteriors.resize(static_cast<size_t>(p) * total);

    Vec3 range;
    for (int i = 0; i < 3; ++i) range[i] = box.upper[i] - box.lower[i];

    std::vector<Vec3> state(p);
    std::vector<double> lp(p);
    {
        std::vector<Vec3> init(p);
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < 3; ++i)
                init[j][i] = rng.uniform(box.lower[i], box.upper[i]);
        std::vector<double> vals;
        evaluate_batch(log_post, init, vals);
        state = init;
        lp = vals;
    }

    // Adaptive crossover levels {1/3, 2/3, 1}: selection favours levels
    // producing longer normalized jumps, adapted during burn-in.
    std::vector<double> cr_levels(cfg.n_crossover);
    for (int m = 0; m < cfg.n_crossover; ++m)
        cr_levels[m] = static_cast<double>(m + 1) / cfg.n_crossover;
    std::vector<double> cr_prob(cfg.n_crossover, 1.0 / cfg.n_crossover);
    std::vector<double> cr_dist(cfg.n_crossover, 0.0);
    std::vector<long> cr_count(cfg.n_crossover, 0);

    auto pick_cr = [&]() {
        const double u = rng.uniform();
        double acc = 0.0;
        for (int m = 0; m < cfg.n_crossover; ++m) {
            acc += cr_prob[m];
            if (u <= acc) return m;
        }
        return cfg.n_crossover - 1;
    };

    std::vector<int> donor_pool(p);
    auto de_jump = [&](int self, double gamma, const std::vector<Vec3>& snapshot) {
        // 2*delta distinct donors, none equal to the updating chain.
        donor_pool.clear();
        for (int i = 0; i < p; ++i)
            if (i != self) donor_pool.push_back(i);
        for (int i = 0; i < 2 * delta; ++i) {
            const int pickidx = i + rng.uniform_int(static_cast<int>(donor_pool.size()) - i);
            std::swap(donor_pool[i], donor_pool[pickidx]);
        }
        Vec3 jump{};
        for (int i = 0; i < delta; ++i)
            for (int c = 0; c < 3; ++c)
                jump[c] += snapshot[donor_pool[i]][c] - snapshot[donor_pool[delta + i]][c];
        Mat3 e;
        for (auto& row : e)
            for (double& v : row) v = rng.uniform(-cfg.perturb_b, cfg.perturb_b);
        Vec3 step;
        for (int i = 0; i < 3; ++i) {
            step[i] = gamma * jump[i];
            for (int c = 0; c < 3; ++c) step[i] += e[i][c] * gamma * jump[c];
            step[i] += rng.normal(0.0, cfg.perturb_b_star) * range[i];
        }
        return step;
    };

    auto subspace = [&](const Vec3& current, const Vec3& full, double cr) {
        Vec3 masked = current;
        int updated_any = 0;
        std::array<bool, 3> upd{};
        for (int i = 0; i < 3; ++i) {
            if (rng.uniform() > 1.0 - cr) {
                upd[i] = true;
                ++updated_any;
            }
        }
        if (updated_any == 0) upd[rng.uniform_int(3)] = true;
        for (int i = 0; i < 3; ++i)
            if (upd[i]) masked[i] = full[i];
        return masked;
    };

    std::vector<Vec3> proposals(p);
    std::vector<int> cr_pick(p);
    std::vector<double> prop_lp;

    for (long gen = 0; gen < total; ++gen) {
        const std::vector<Vec3> snapshot = state;
        for (int j = 0; j < p; ++j) {
            const Vec3 step = de_jump(j, cfg.jump, snapshot);
            Vec3 full;
            for (int i = 0; i < 3; ++i) full[i] = snapshot[j][i] + step[i];
            cr_pick[j] = pick_cr();
            proposals[j] = subspace(snapshot[j], full, cr_levels[cr_pick[j]]);
        }
        const LogDensity bounded = [&](const Vec3& t) {
            return in_box(t, box) ? log_post(t) : kNegInf;
        };
        evaluate_batch(bounded, proposals, prop_lp);

        std::vector<int> second_stage;
        std::vector<double> alpha1(p);
        for (int j = 0; j < p; ++j) {
            alpha1[j] = std::min(1.0, std::exp(prop_lp[j] - lp[j]));
            if (rng.uniform() < alpha1[j]) {
                // Jump-distance bookkeeping for crossover adaptation.
                if (gen < burn) {
                    double d2 = 0.0;
                    for (int i = 0; i < 3; ++i) {
                        const double d = (proposals[j][i] - state[j][i]) / range[i];
                        d2 += d * d;
                    }
                    cr_dist[cr_pick[j]] += d2;
                }
                state[j] = proposals[j];
                lp[j] = prop_lp[j];
                ++out.accept_stage1;
            } else {
                second_stage.push_back(j);
            }
            if (gen < burn) ++cr_count[cr_pick[j]];
        }

        if (!second_stage.empty()) {
            std::vector<Vec3> cand2(second_stage.size());
            for (size_t m = 0; m < second_stage.size(); ++m) {
                const int j = second_stage[m];
                const Vec3 step = de_jump(j, cfg.dr_scale * cfg.jump, snapshot);
                for (int i = 0; i < 3; ++i) cand2[m][i] = snapshot[j][i] + step[i];
            }
            std::vector<double> lp2;
            evaluate_batch(bounded, cand2, lp2);
            for (size_t m = 0; m < second_stage.size(); ++m) {
                const int j = second_stage[m];
                bool accept = false;
                if (lp2[m] > kNegInf) {
                    // Symmetric differential-evolution proposal: the jumping
                    // density ratio cancels in the two-stage acceptance.
                    const double a12 = std::min(1.0, std::exp(prop_lp[j] - lp2[m]));
                    if (a12 < 1.0 && alpha1[j] < 1.0) {
                        const double log_a2 =
                            std::min(0.0, lp2[m] + std::log1p(-a12) - lp[j] -
                                              std::log1p(-alpha1[j]));
                        accept = std::log(rng.uniform() + 1e-300) < log_a2;
                    }
                }
                if (accept) {
                    state[j] = cand2[m];
                    lp[j] = lp2[m];
                    ++out.accept_stage2;
                } else {
                    ++out.rejections;
                }
            }
        }

        for (int j = 0; j < p; ++j) {
            out.samples[static_cast<size_t>(j) * total + gen] = state[j];
            out.log_posteriors[static_cast<size_t>(j) * total + gen] = lp[j];
        }

        const bool in_burn = gen < burn;
        if (in_burn && gen > 0 && gen % 10 == 0) {
            // Crossover probability adaptation by jump-distance weighting.
            double tot = 0.0;
            std::vector<double> w(cfg.n_crossover);
            for (int m = 0; m < cfg.n_crossover; ++m) {
                w[m] = cr_count[m] > 0 ? cr_dist[m] / static_cast<double>(cr_count[m]) : 0.0;
                tot += w[m];
            }
            if (tot > 0.0) {
                for (int m = 0; m < cfg.n_crossover; ++m)
                    cr_prob[m] = std::max(0.05, w[m] / tot);
                double norm = 0.0;
                for (double v : cr_prob) norm += v;
                for (double& v : cr_prob) v /= norm;
            }

            // IQR outlier test on mean log posterior over each chain's
            // last half; outliers jump to the best chain's state.
            std::vector<double> score(p);
            for (int j = 0; j < p; ++j) {
                double s = 0.0;
                const long lo = gen / 2;
                for (long k2 = lo; k2 <= gen; ++k2)
                    s += out.log_posteriors[static_cast<size_t>(j) * total + k2];
                score[j] = s / static_cast<double>(gen - lo + 1);
            }
            std::vector<double> sorted = score;
            std::sort(sorted.begin(), sorted.end());
            const double q1 = sorted[static_cast<size_t>(0.25 * (p - 1))];
            const double q3 = sorted[static_cast<size_t>(0.75 * (p - 1))];
            const double iqr = q3 - q1;
            int best = 0;
            for (int j = 1; j < p; ++j)
                if (lp[j] > lp[best]) best = j;
            for (int j = 0; j < p; ++j) {
                if (score[j] < q1 - 2.0 * iqr) {
                    state[j] = state[best];
                    lp[j] = lp[best];
                    out.outlier_replacements.push_back(gen);
                }
            }
        }

        if (gen > 10 && (gen % cfg.r_stat_interval == 0 || gen == total - 1)) {
            Vec3 r{};
            for (int i = 0; i < 3; ++i) {
                std::vector<std::vector<double>> per_chain(p);
                for (int j = 0; j < p; ++j) {
                    per_chain[j].reserve(gen + 1);
                    for (long k2 = 0; k2 <= gen; ++k2)
                        per_chain[j].push_back(
                            out.samples[static_cast<size_t>(j) * total + k2][i]);
                }
                const GelmanRubinResult g = gelman_rubin(per_chain, 0.5);
                r[i] = g.degenerate ? 1.0 : g.r;
            }
            out.r_stat_trace.emplace_back(gen, r);
        }
    }
    return out;
}

namespace {
ChainSet unscale_chains(ChainSet cs, const Scenario& scn) {
    for (Vec3& s : cs.samples) s[2] *= scn.intensity_scale;
    return cs;
}
}  // namespace

ChainSet dram_sample(const ObjectiveContext& ctx, const DRAMConfig& cfg, Rng& rng) {
    const Scenario& scn = *ctx.scenario;
    const FeasibleBox box = scaled_box(scn);
    // Least-squares seed: coarse deterministic grid scan, then one
    // Nelder-Mead polish from the best cell. A single local descent can
    // settle in a shielded pocket far from the global basin.
    const Objective ols = make_ols_objective(ctx);
    Vec3 grid_best{};
    double best = std::numeric_limits<double>::infinity();
    const int nx = 50, ny = 36, ns = 25;
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy)
            for (int is = 0; is < ns; ++is) {
                Vec3 s0{box.lower[0] + (ix + 0.5) / nx * (box.upper[0] - box.lower[0]),
                        box.lower[1] + (iy + 0.5) / ny * (box.upper[1] - box.lower[1]),
                        box.lower[2] + (is + 0.5) / ns * (box.upper[2] - box.lower[2])};
                const double v = ols(s0);
                if (v < best) {
                    best = v;
                    grid_best = s0;
                }
            }
    const Vec3 start = nelder_mead(ols, grid_best, box, 1e-8, 2000);
    const LogDensity post = [&ctx](const Vec3& t) { return log_likelihood(ctx, t); };
    return unscale_chains(dram_run(post, box, cfg, start, rng), scn);
}

ChainSet dream_sample(const ObjectiveContext& ctx, const DREAMConfig& cfg, Rng& rng) {
    const Scenario& scn = *ctx.scenario;
    const LogDensity post = [&ctx](const Vec3& t) { return log_likelihood(ctx, t); };
    return unscale_chains(dream_run(post, scaled_box(scn), cfg, rng), scn);
}

void export_chains_csv(const ChainSet& chains, std::ostream& out) {
    out << "chain,iteration,x,y,s0,log_posterior\n";
    char buf[160];
    for (int c = 0; c < chains.n_chains; ++c)
        for (long k = 0; k < chains.n_iterations; ++k) {
            const Vec3& s = chains.at(c, k);
            std::snprintf(buf, sizeof(buf), "%d,%ld,%.17g,%.17g,%.17g,%.17g\n", c, k,
                          s[0], s[1], s[2], chains.log_posterior_at(c, k));
            out << buf;
        }
}

}  // namespace radloc
