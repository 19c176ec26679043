#pragma once

#include <cstdint>

namespace radloc {

/// Seeded, splittable generator (xoshiro256++ seeded through splitmix64).
/// A stream is a pure function of (root seed, stream id), so sub-streams
/// handed to population members or chains never interleave.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0);

    /// Derive an independent stream from the same root seed.
    Rng split(uint64_t stream) const { return Rng(root_, stream); }

    uint64_t next();

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n).
    int uniform_int(int n);

    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Poisson draw; sequential inversion for small means, transformed
    /// rejection (PTRS) for large ones.
    long poisson(double mean);

    uint64_t root_seed() const { return root_; }

private:
    uint64_t root_;
    uint64_t s_[4];
    double spare_normal_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace radloc
