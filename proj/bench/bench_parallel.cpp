// Compares the serial reference batch kernel against the OpenMP one on the
// synthetic-city objective and checks they agree bit for bit.

#include <chrono>
#include <cstdio>
#include <vector>

#include "radloc/parallel.hpp"
#include "radloc/scenario_io.hpp"

using namespace radloc;

namespace {

double time_run(void (*kernel)(const Objective&, const std::vector<Vec3>&,
                               std::vector<double>&),
                const Objective& obj, const std::vector<Vec3>& pts,
                std::vector<double>& out, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        kernel(obj, pts, out);
        const double dt =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (dt < best) best = dt;
    }
    return best;
}

}  // namespace

int main() {
    CityOptions opt;
    opt.seed = 42;
    const Scenario scn = generate_city(opt);
    Rng rng(7, uint64_t{1} << 32);
    const ObservationSet obs = simulate_observations(scn, scn.true_source, 4, rng);
    ObjectiveContext ctx(scn, obs);
    const Objective obj = make_objective(ctx);
    const FeasibleBox box = scaled_box(scn);

    Rng prng(7, 5);
    std::printf("workers: %d\n", worker_count());
    std::printf("%8s %12s %12s %8s\n", "batch", "serial_s", "parallel_s", "speedup");
    for (int n : {64, 256, 1024, 4096}) {
        std::vector<Vec3> pts(n);
        for (Vec3& p : pts)
            for (int i = 0; i < 3; ++i) p[i] = prng.uniform(box.lower[i], box.upper[i]);
        std::vector<double> ref, par;
        const double ts = time_run(evaluate_batch_serial, obj, pts, ref, 3);
        const double tp = time_run(evaluate_batch_parallel, obj, pts, par, 3);
        for (int i = 0; i < n; ++i)
            if (ref[i] != par[i]) {
                std::fprintf(stderr, "mismatch at %d: %.17g vs %.17g\n", i, ref[i], par[i]);
                return 1;
            }
        std::printf("%8d %12.6f %12.6f %8.2f\n", n, ts, tp, ts / tp);
    }
    return 0;
}
