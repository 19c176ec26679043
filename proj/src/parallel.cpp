#include "radloc/parallel.hpp"

#include <cstdlib>
#include <thread>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace radloc {

int worker_count() {
    static const int n = [] {
        if (const char* env = std::getenv("RADLOC_THREADS")) {
            const int v = std::atoi(env);
            if (v == 1) return 1;
            if (v > 1) return v;
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }();
    return n;
}

void evaluate_batch_serial(const Objective& obj, const std::vector<Vec3>& points,
                           std::vector<double>& out) {
    out.resize(points.size());
    for (size_t i = 0; i < points.size(); ++i) out[i] = obj(points[i]);
}

void evaluate_batch_parallel(const Objective& obj, const std::vector<Vec3>& points,
                             std::vector<double>& out) {
    out.resize(points.size());
    const int n = static_cast<int>(points.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
#endif
    for (int i = 0; i < n; ++i) out[i] = obj(points[i]);
}

void evaluate_batch(const Objective& obj, const std::vector<Vec3>& points,
                    std::vector<double>& out) {
    if (worker_count() > 1 && points.size() > 1)
        evaluate_batch_parallel(obj, points, out);
    else
        evaluate_batch_serial(obj, points, out);
}

}  // namespace radloc
