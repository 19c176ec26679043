#pragma once

#include <vector>

#include "radloc/likelihood.hpp"

namespace radloc {

/// Serial reference kernel: out[i] = obj(points[i]).
void evaluate_batch_serial(const Objective& obj, const std::vector<Vec3>& points,
                           std::vector<double>& out);

/// OpenMP kernel; bit-identical to the serial reference for any thread
/// count since evaluations are independent and pure.
void evaluate_batch_parallel(const Objective& obj, const std::vector<Vec3>& points,
                             std::vector<double>& out);

/// Dispatches to the parallel kernel when worthwhile. Worker count is
/// controlled by the RADLOC_THREADS environment variable (0 = all cores,
/// 1 = force serial).
void evaluate_batch(const Objective& obj, const std::vector<Vec3>& points,
                    std::vector<double>& out);

int worker_count();

}  // namespace radloc
