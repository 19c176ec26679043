#pragma once

#include <array>
#include <vector>

#include "radloc/geometry.hpp"
#include "radloc/rng.hpp"

namespace radloc {

struct Detector {
    Point2 position;
    double face_area = 4.560e-3;  // m^2, 3-inch circular face
    double efficiency = 0.62;
    double dwell_time = 1.0;  // s
};

/// The unknown: planar position (m) and intensity (decays/s).
struct SourceParams {
    double x = 0.0;
    double y = 0.0;
    double s0 = 0.0;
};

/// Per-coordinate box [lower, upper] for (x, y, intensity-like).
struct FeasibleBox {
    std::array<double, 3> lower{};
    std::array<double, 3> upper{};
};

struct Scenario {
    DomainGeometry geometry;
    std::vector<Detector> detectors;
    double background = 0.0;  // counts/s
    FeasibleBox feasible_box{{0.0, 0.0, 5e8}, {250.0, 180.0, 5e10}};
    double intensity_scale = 5e8;  // decays/s per scaled unit
    bool has_true_source = false;
    SourceParams true_source;
    uint64_t rng_seed = 0;
};

/// Poisson count matrix, n_det rows x n_rep columns.
struct ObservationSet {
    int n_det = 0;
    int n_rep = 0;
    std::vector<long> counts;  // row-major

    long at(int det, int rep) const { return counts[det * n_rep + rep]; }
    long& at(int det, int rep) { return counts[det * n_rep + rep]; }
};

/// Expected source counts over the dwell: S0*dt*eps*A / (4*pi*r^2) * exp(-depth).
double detector_response(const Detector& d, const SourceParams& theta,
                         const DomainGeometry& geom);

/// Source counts plus background counts over the dwell.
double mean_count(const Detector& d, const SourceParams& theta,
                  const DomainGeometry& geom, double background);

ObservationSet simulate_observations(const Scenario& scn, const SourceParams& theta_true,
                                     int n_rep, Rng& rng);

/// Sample per-building optical thicknesses in [mfp_lo, mfp_hi], biased so
/// larger footprints get larger thicknesses, and convert to cross-sections
/// via sigma_t = tau / sqrt(area).
void assign_cross_sections(std::vector<Building>& buildings, double mfp_lo,
                           double mfp_hi, Rng& rng);

}  // namespace radloc
