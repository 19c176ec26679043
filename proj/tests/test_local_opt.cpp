#include <doctest.h>

#include <cmath>

#include "radloc/local_opt.hpp"

using namespace radloc;

namespace {

const FeasibleBox kBox{{0.0, 0.0, 0.0}, {10.0, 10.0, 10.0}};

double dist(const Vec3& a, const Vec3& b) {
    return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                     (a[2] - b[2]) * (a[2] - b[2]));
}

Objective bowl(const Vec3& c) {
    return [c](const Vec3& t) { return dist(t, c) * dist(t, c); };
}

}  // namespace

TEST_CASE("projection onto the box") {
    CHECK(project({5, 5, 5}, kBox) == Vec3{5, 5, 5});
    CHECK(project({-1, 11, 5}, kBox) == Vec3{0, 10, 5});
    CHECK(project({10.0, 0.0, 12.5}, kBox) == Vec3{10, 0, 10});
    // Idempotence.
    const Vec3 p = project({-3, 4, 99}, kBox);
    CHECK(project(p, kBox) == p);
}

TEST_CASE("stencil gradient") {
    SUBCASE("central difference is exact on a quadratic") {
        const Objective f = [](const Vec3& t) { return t[0] * t[0]; };
        const Vec3 g = stencil_gradient(f, {3.0, 5.0, 5.0}, 0.25, kBox);
        CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-12));
        CHECK(g[1] == doctest::Approx(0.0));
        CHECK(g[2] == doctest::Approx(0.0));
    }
    SUBCASE("constant objective has zero gradient") {
        const Objective f = [](const Vec3&) { return 4.2; };
        const Vec3 g = stencil_gradient(f, {5, 5, 5}, 0.5, kBox);
        CHECK(g == Vec3{0, 0, 0});
    }
    SUBCASE("one-sided fallback at the boundary") {
        const Objective f = [](const Vec3& t) { return t[0]; };
        // theta - h e_1 is infeasible, so the slope comes from the right.
        const Vec3 g = stencil_gradient(f, {0.0, 5.0, 5.0}, 0.5, kBox);
        CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("inner loop at a fixed scale") {
    const Vec3 c{4.0, 6.0, 3.0};
    const Objective f = bowl(c);
    IFConfig cfg;
    SUBCASE("starting at the minimum reports stencil failure") {
        const InnerResult r = if_inner(f, c, 0.25, cfg, kBox);
        CHECK(r.reason == InnerTermination::StencilFailure);
        CHECK(r.objective == doctest::Approx(0.0));
        CHECK(dist(r.theta, c) < 1e-12);
    }
    SUBCASE("a nearby start contracts towards the minimum") {
        const Vec3 start{5.0, 5.0, 4.0};
        const InnerResult r = if_inner(f, start, 0.125, cfg, kBox);
        CHECK(r.objective < f(start));
        CHECK(dist(r.theta, c) < dist(start, c));
    }
}

TEST_CASE("implicit filtering minimizes a quadratic") {
    const Vec3 c{3.0, 7.0, 2.0};
    const Objective f = bowl(c);
    IFConfig cfg;
    const Vec3 start{8.0, 1.0, 9.0};
    const OptResult res = if_run(f, start, cfg, kBox);
    CHECK(dist(res.best_scaled, c) < 1e-3);
    CHECK(res.best_objective <= f(start));
    CHECK(res.n_evaluations <= cfg.budget + 8);  // one stencil may finish in flight
}

TEST_CASE("implicit filtering from the minimum is a no-op") {
    const Vec3 c{3.0, 7.0, 2.0};
    const OptResult res = if_run(bowl(c), c, IFConfig{}, kBox);
    CHECK(dist(res.best_scaled, c) < 1e-9);
    CHECK(res.best_objective == doctest::Approx(0.0));
}

TEST_CASE("implicit filtering respects the box") {
    // Minimum outside the box; the answer must sit on the boundary.
    const Objective f = bowl({12.0, 5.0, 5.0});
    const OptResult res = if_run(f, {5.0, 5.0, 5.0}, IFConfig{}, kBox);
    CHECK(res.best_scaled[0] == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(res.best_scaled[1] == doctest::Approx(5.0).epsilon(1e-3));
}

TEST_CASE("simplex search finds a bowl minimum") {
    const Vec3 c{6.0, 2.0, 8.0};
    const Vec3 out = nelder_mead(bowl(c), {1.0, 9.0, 1.0}, kBox, 1e-8, 5000);
    CHECK(dist(out, c) < 1e-4);
}

TEST_CASE("simplex search stays feasible with an exterior minimum") {
    const Objective f = bowl({-3.0, 5.0, 5.0});
    const Vec3 out = nelder_mead(f, {5.0, 5.0, 5.0}, kBox);
    for (int i = 0; i < 3; ++i) {
        CHECK(out[i] >= kBox.lower[i]);
        CHECK(out[i] <= kBox.upper[i]);
    }
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-3));
}
