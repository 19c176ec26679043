#include "radloc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace radloc {

double detector_response(const Detector& d, const SourceParams& theta,
                         const DomainGeometry& geom) {
    const Point2 src{theta.x, theta.y};
    const double r = distance(src, d.position);
    if (r < 1e-6)
        throw std::domain_error("detector_response: source coincides with detector");
    if (theta.s0 == 0.0) return 0.0;
    const double depth = optical_depth(trace_path(geom, src, d.position));
    const double solid = d.face_area / (4.0 * std::numbers::pi * r * r);
    return theta.s0 * d.dwell_time * d.efficiency * solid * std::exp(-depth);
}

double mean_count(const Detector& d, const SourceParams& theta,
                  const DomainGeometry& geom, double background) {
    return detector_response(d, theta, geom) + background * d.dwell_time;
}

ObservationSet simulate_observations(const Scenario& scn, const SourceParams& theta_true,
                                     int n_rep, Rng& rng) {
    if (n_rep < 1) throw std::invalid_argument("simulate_observations: n_rep < 1");
    ObservationSet obs;
    obs.n_det = static_cast<int>(scn.detectors.size());
    obs.n_rep = n_rep;
    obs.counts.resize(static_cast<size_t>(obs.n_det) * n_rep);
    for (int i = 0; i < obs.n_det; ++i) {
        const double mu =
            mean_count(scn.detectors[i], theta_true, scn.geometry, scn.background);
        for (int j = 0; j < n_rep; ++j) obs.at(i, j) = rng.poisson(mu);
    }
    return obs;
}

void assign_cross_sections(std::vector<Building>& buildings, double mfp_lo,
                           double mfp_hi, Rng& rng) {
    if (buildings.empty()) throw std::invalid_argument("assign_cross_sections: no buildings");
    const size_t n = buildings.size();
    std::vector<double> areas(n);
    for (size_t i = 0; i < n; ++i) {
        areas[i] = polygon_area(buildings[i].vertices);
        if (areas[i] <= 0.0)
            throw std::invalid_argument("assign_cross_sections: zero-area polygon");
    }
    // Area rank -> sampling weight. tau = lo + (hi-lo)*u^(1/w) has mean
    // lo + (hi-lo)*w/(w+1), monotone in w, so bigger buildings are biased
    // towards bigger optical thicknesses.
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return areas[a] < areas[b]; });
    for (size_t rank = 0; rank < n; ++rank) {
        const size_t idx = order[rank];
        const double w =
            n > 1 ? 0.5 + 2.0 * static_cast<double>(rank) / static_cast<double>(n - 1)
                  : 1.0;
        const double tau = mfp_lo + (mfp_hi - mfp_lo) * std::pow(rng.uniform(), 1.0 / w);
        buildings[idx].sigma_t = tau / std::sqrt(areas[idx]);
    }
}

}  // namespace radloc
