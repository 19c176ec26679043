#include <doctest.h>

#include <cmath>
#include <vector>

#include "radloc/mcmc.hpp"

using namespace radloc;

namespace {

// Independent Gaussian in 3D, axis variances 1, 4, 0.25, mean (2, -1, 0.5).
const Vec3 kMu{2.0, -1.0, 0.5};
const Vec3 kVar{1.0, 4.0, 0.25};

double gauss_log_density(const Vec3& t) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += (t[i] - kMu[i]) * (t[i] - kMu[i]) / kVar[i];
    return -0.5 * s;
}

const FeasibleBox kWide{{-50.0, -50.0, -50.0}, {50.0, 50.0, 50.0}};

std::vector<double> coordinate(const ChainSet& cs, int chain, int c, long from) {
    std::vector<double> out;
    for (long i = from; i < cs.n_iterations; ++i) out.push_back(cs.at(chain, i)[c]);
    return out;
}

}  // namespace

TEST_CASE("adaptive sampler recovers a Gaussian") {
    DRAMConfig cfg;
    cfg.n_iterations = 20000;
    cfg.burn_in = 3000;
    Rng rng(9, 2);
    const ChainSet cs = dram_run(gauss_log_density, kWide, cfg, {0.0, 0.0, 0.0}, rng);
    REQUIRE(cs.n_chains == 1);
    REQUIRE(cs.n_iterations == 23000);
    CHECK(cs.burn_in == 3000);
    CHECK(cs.accept_stage1 + cs.accept_stage2 + cs.rejections == 23000);

    // Mean and covariance over the retained part.
    Vec3 mean{};
    long n = 0;
    for (long i = cs.burn_in; i < cs.n_iterations; ++i, ++n)
        for (int c = 0; c < 3; ++c) mean[c] += cs.at(0, i)[c];
    for (int c = 0; c < 3; ++c) mean[c] /= static_cast<double>(n);
    Vec3 var{};
    for (long i = cs.burn_in; i < cs.n_iterations; ++i)
        for (int c = 0; c < 3; ++c)
            var[c] += (cs.at(0, i)[c] - mean[c]) * (cs.at(0, i)[c] - mean[c]);
    for (int c = 0; c < 3; ++c) var[c] /= static_cast<double>(n - 1);

    for (int c = 0; c < 3; ++c) {
        // Loose bound: autocorrelated samples, effective size ~ n / 50.
        CHECK(std::abs(mean[c] - kMu[c]) < 5.0 * std::sqrt(kVar[c] / (n / 50.0)));
        CHECK(var[c] == doctest::Approx(kVar[c]).epsilon(0.15));
    }
    // Delayed rejection actually fires.
    CHECK(cs.accept_stage2 > 0);
}

TEST_CASE("sampler respects the box") {
    DRAMConfig cfg;
    cfg.n_iterations = 3000;
    cfg.burn_in = 500;
    const FeasibleBox tight{{1.5, -1.2, 0.3}, {2.5, -0.8, 0.7}};
    Rng rng(3, 2);
    const ChainSet cs = dram_run(gauss_log_density, tight, cfg, {2.0, -1.0, 0.5}, rng);
    for (long i = 0; i < cs.n_iterations; ++i)
        for (int c = 0; c < 3; ++c) {
            REQUIRE(cs.at(0, i)[c] >= tight.lower[c]);
            REQUIRE(cs.at(0, i)[c] <= tight.upper[c]);
        }
}

TEST_CASE("stored log posterior matches the density") {
    DRAMConfig cfg;
    cfg.n_iterations = 500;
    cfg.burn_in = 100;
    Rng rng(5, 2);
    const ChainSet cs = dram_run(gauss_log_density, kWide, cfg, {1.0, 1.0, 1.0}, rng);
    for (long i = 0; i < cs.n_iterations; i += 37)
        CHECK(cs.log_posterior_at(0, i) ==
              doctest::Approx(gauss_log_density(cs.at(0, i))).epsilon(1e-12));
}

TEST_CASE("multi-chain sampler recovers a Gaussian and mixes") {
    DREAMConfig cfg;
    cfg.n_iterations = 6000;
    Rng rng(9, 2);
    const ChainSet cs = dream_run(gauss_log_density, kWide, cfg, rng);
    REQUIRE(cs.n_chains == cfg.n_chains);
    const Vec3 mean = cs.posterior_mean(0.5);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(mean[c] - kMu[c]) < 0.25 * std::sqrt(kVar[c]));

    REQUIRE(!cs.r_stat_trace.empty());
    const Vec3 r_final = cs.r_stat_trace.back().second;
    for (int c = 0; c < 3; ++c) CHECK(r_final[c] < 1.1);

    for (long i = 0; i < cs.n_iterations; i += 101)
        for (int ch = 0; ch < cs.n_chains; ++ch)
            CHECK(cs.log_posterior_at(ch, i) ==
                  doctest::Approx(gauss_log_density(cs.at(ch, i))).epsilon(1e-12));
}

TEST_CASE("stationarity diagnostic") {
    SUBCASE("iid draws look stationary for almost every seed") {
        int ok = 0;
        for (uint64_t s = 1; s <= 100; ++s) {
            Rng rng(s, 3);
            std::vector<double> chain(2000);
            for (double& v : chain) v = rng.normal();
            const GewekeResult g = geweke(chain);
            CHECK(!g.degenerate);
            if (std::abs(g.z) < 3.0) ++ok;
        }
        CHECK(ok >= 99);
    }
    SUBCASE("a mean shift is flagged") {
        Rng rng(1, 3);
        std::vector<double> chain(2000);
        for (size_t i = 0; i < chain.size(); ++i)
            chain[i] = rng.normal() + (i < 400 ? 4.0 : 0.0);
        CHECK(std::abs(geweke(chain).z) > 10.0);
    }
    SUBCASE("a constant chain is degenerate") {
        CHECK(geweke(std::vector<double>(500, 1.3)).degenerate);
    }
}

TEST_CASE("scale-reduction diagnostic") {
    SUBCASE("chains from one distribution score near 1") {
        std::vector<std::vector<double>> chains(4, std::vector<double>(4000));
        Rng rng(2, 3);
        for (auto& ch : chains)
            for (double& v : ch) v = rng.normal(5.0, 2.0);
        const GelmanRubinResult r = gelman_rubin(chains);
        CHECK(!r.degenerate);
        CHECK(r.r < 1.05);
    }
    SUBCASE("separated chains score far above 1") {
        std::vector<std::vector<double>> chains(4, std::vector<double>(1000));
        Rng rng(2, 3);
        for (size_t k = 0; k < chains.size(); ++k)
            for (double& v : chains[k]) v = rng.normal(10.0 * static_cast<double>(k), 1.0);
        CHECK(gelman_rubin(chains).r > 1.2);
    }
    SUBCASE("identical constant chains are degenerate") {
        std::vector<std::vector<double>> chains(3, std::vector<double>(100, 2.0));
        CHECK(gelman_rubin(chains).degenerate);
    }
}

TEST_CASE("posterior mean over the final fraction") {
    ChainSet cs;
    cs.n_chains = 2;
    cs.n_iterations = 4;
    // Chain 0: constants 1; chain 1: last half is 3.
    cs.samples = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1},
                  {9, 9, 9}, {9, 9, 9}, {3, 3, 3}, {3, 3, 3}};
    const Vec3 m = cs.posterior_mean(0.5);
    for (int c = 0; c < 3; ++c) CHECK(m[c] == doctest::Approx(2.0));
}

TEST_CASE("diagnostics on the sampler output") {
    DREAMConfig cfg;
    cfg.n_iterations = 4000;
    Rng rng(4, 2);
    const ChainSet cs = dream_run(gauss_log_density, kWide, cfg, rng);
    const long from = cs.n_iterations / 2;
    std::vector<std::vector<double>> per_chain;
    for (int ch = 0; ch < cs.n_chains; ++ch)
        per_chain.push_back(coordinate(cs, ch, 0, from));
    CHECK(gelman_rubin(per_chain).r < 1.1);
    const GewekeResult g = geweke(coordinate(cs, 0, 0, from));
    CHECK(!g.degenerate);
}
