#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace radloc {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point2& a, const Point2& b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

/// A building footprint: simple polygon with a macroscopic total
/// cross-section (1/m) for 662 keV photons.
struct Building {
    std::vector<Point2> vertices;
    double sigma_t = 0.0;
};

/// The urban block: axis-aligned bounds [0,width] x [0,height],
/// interior-disjoint building polygons, dry air in between.
struct DomainGeometry {
    double width = 0.0;
    double height = 0.0;
    std::vector<Building> buildings;
    double air_sigma_t = 0.0;
};

/// Piecewise path between two points: (length, sigma_t) per material region.
struct PathSegments {
    std::vector<std::pair<double, double>> segments;
    double total_length = 0.0;
};

/// Parametric sub-interval of a segment, 0 <= t_in <= t_out <= 1.
struct ClipInterval {
    double t_in = 0.0;
    double t_out = 0.0;
};

double polygon_area(const std::vector<Point2>& vertices);

/// Even-odd rule point-in-polygon test.
bool point_in_polygon(const Point2& p, const std::vector<Point2>& vertices);

/// True if the polygon is simple (no self intersections) with nonzero area.
bool polygon_is_simple(const std::vector<Point2>& vertices);

bool polygons_interior_disjoint(const std::vector<Point2>& a,
                                const std::vector<Point2>& b);

void validate(const Building& b);
void validate(const DomainGeometry& g);

/// Portions of the segment p0->p1 inside building b, as disjoint sorted
/// parameter intervals. Grazing contacts of zero measure are dropped.
std::vector<ClipInterval> segment_polygon_clip(const Point2& p0, const Point2& p1,
                                               const Building& b);

/// Full material decomposition of the segment src->dst: building pieces with
/// their cross-sections, air pieces in between.
PathSegments trace_path(const DomainGeometry& geom, const Point2& src,
                        const Point2& dst);

/// Sum of length * sigma_t over the path (dimensionless, in mean free paths).
double optical_depth(const PathSegments& path);

}  // namespace radloc
