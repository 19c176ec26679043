#include "radloc/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace radloc {

namespace {

constexpr double kMergeTol = 1e-9;

double cross(double ax, double ay, double bx, double by) {
    return ax * by - ay * bx;
}

// Crossing parameters of segment p0->p1 with one polygon edge a->b.
// The edge parameter uses a half-open convention s in [0,1) so that a
// segment passing exactly through a shared vertex counts one crossing,
// not two.
bool edge_crossing(const Point2& p0, const Point2& p1, const Point2& a,
                   const Point2& b, double& t_out) {
    const double dx = p1.x - p0.x, dy = p1.y - p0.y;
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double denom = cross(dx, dy, ex, ey);
    if (denom == 0.0) return false;  // parallel or collinear: zero measure
    const double wx = a.x - p0.x, wy = a.y - p0.y;
    const double t = cross(wx, wy, ex, ey) / denom;
    const double s = cross(wx, wy, dx, dy) / denom;
    if (s < 0.0 || s >= 1.0) return false;
    if (t < 0.0 || t > 1.0) return false;
    t_out = t;
    return true;
}

}  // namespace

double polygon_area(const std::vector<Point2>& v) {
    double a = 0.0;
    const size_t n = v.size();
    for (size_t i = 0; i < n; ++i) {
        const Point2& p = v[i];
        const Point2& q = v[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * std::abs(a);
}

bool point_in_polygon(const Point2& p, const std::vector<Point2>& v) {
    const size_t n = v.size();
    bool inside = false;
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const bool cond = (v[i].y > p.y) != (v[j].y > p.y);
        if (cond) {
            const double xint =
                v[j].x + (v[i].x - v[j].x) * (p.y - v[j].y) / (v[i].y - v[j].y);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

bool polygon_is_simple(const std::vector<Point2>& v) {
    const size_t n = v.size();
    if (n < 3) return false;
    if (polygon_area(v) <= 0.0) return false;
    // Pairwise edge intersection check; adjacent edges share one endpoint.
    for (size_t i = 0; i < n; ++i) {
        const Point2& a0 = v[i];
        const Point2& a1 = v[(i + 1) % n];
        for (size_t j = i + 1; j < n; ++j) {
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Point2& b0 = v[j];
            const Point2& b1 = v[(j + 1) % n];
            const double dx = a1.x - a0.x, dy = a1.y - a0.y;
            const double ex = b1.x - b0.x, ey = b1.y - b0.y;
            const double denom = cross(dx, dy, ex, ey);
            if (denom == 0.0) continue;
            const double wx = b0.x - a0.x, wy = b0.y - a0.y;
            const double t = cross(wx, wy, ex, ey) / denom;
            const double s = cross(wx, wy, dx, dy) / denom;
            if (t > 0.0 && t < 1.0 && s > 0.0 && s < 1.0) return false;
        }
    }
    return true;
}

bool polygons_interior_disjoint(const std::vector<Point2>& a,
                                const std::vector<Point2>& b) {
    const size_t na = a.size(), nb = b.size();
    for (size_t i = 0; i < na; ++i) {
        const Point2& a0 = a[i];
        const Point2& a1 = a[(i + 1) % na];
        for (size_t j = 0; j < nb; ++j) {
            const Point2& b0 = b[j];
            const Point2& b1 = b[(j + 1) % nb];
            const double dx = a1.x - a0.x, dy = a1.y - a0.y;
            const double ex = b1.x - b0.x, ey = b1.y - b0.y;
            const double denom = cross(dx, dy, ex, ey);
            if (denom == 0.0) continue;
            const double wx = b0.x - a0.x, wy = b0.y - a0.y;
            const double t = cross(wx, wy, ex, ey) / denom;
            const double s = cross(wx, wy, dx, dy) / denom;
            if (t > 0.0 && t < 1.0 && s > 0.0 && s < 1.0) return false;
        }
    }
    // No edge crossings: containment is the only remaining overlap mode.
    if (point_in_polygon(a[0], b)) return false;
    if (point_in_polygon(b[0], a)) return false;
    return true;
}

void validate(const Building& b) {
    if (b.vertices.size() < 3) throw std::invalid_argument("building needs >= 3 vertices");
    if (!polygon_is_simple(b.vertices)) throw std::invalid_argument("building polygon not simple");
    if (b.sigma_t < 0.0) throw std::invalid_argument("building sigma_t < 0");
}

void validate(const DomainGeometry& g) {
    if (g.width <= 0.0 || g.height <= 0.0) throw std::invalid_argument("empty domain bounds");
    if (g.air_sigma_t < 0.0) throw std::invalid_argument("air_sigma_t < 0");
    for (const Building& b : g.buildings) {
        validate(b);
        for (const Point2& p : b.vertices) {
            if (p.x < 0.0 || p.x > g.width || p.y < 0.0 || p.y > g.height)
                throw std::invalid_argument("building vertex outside bounds");
        }
    }
    for (size_t i = 0; i < g.buildings.size(); ++i)
        for (size_t j = i + 1; j < g.buildings.size(); ++j)
            if (!polygons_interior_disjoint(g.buildings[i].vertices, g.buildings[j].vertices))
                throw std::invalid_argument("buildings overlap");
}

std::vector<ClipInterval> segment_polygon_clip(const Point2& p0, const Point2& p1,
                                               const Building& b) {
    if (p0.x == p1.x && p0.y == p1.y)
        throw std::invalid_argument("degenerate segment");

    const size_t n = b.vertices.size();
    std::vector<double> ts;
    ts.reserve(8);
    double t;
    for (size_t i = 0; i < n; ++i) {
        if (edge_crossing(p0, p1, b.vertices[i], b.vertices[(i + 1) % n], t))
            ts.push_back(t);
    }
    ts.push_back(0.0);
    ts.push_back(1.0);
    std::sort(ts.begin(), ts.end());
    // Merge boundaries closer than the tolerance; a grazing contact then
    // contributes no interval.
    std::vector<double> cuts;
    for (double v : ts) {
        if (cuts.empty() || v - cuts.back() > kMergeTol) cuts.push_back(v);
    }

    // Classify each sub-interval by its midpoint rather than crossing
    // parity; this stays consistent for vertex grazes and non-convex
    // footprints alike.
    std::vector<ClipInterval> out;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double tm = 0.5 * (cuts[i] + cuts[i + 1]);
        const Point2 mid{p0.x + tm * (p1.x - p0.x), p0.y + tm * (p1.y - p0.y)};
        if (point_in_polygon(mid, b.vertices)) {
            if (!out.empty() && cuts[i] - out.back().t_out <= kMergeTol)
                out.back().t_out = cuts[i + 1];
            else
                out.push_back({cuts[i], cuts[i + 1]});
        }
    }
    return out;
}

PathSegments trace_path(const DomainGeometry& geom, const Point2& src,
                        const Point2& dst) {
    if (src.x == dst.x && src.y == dst.y)
        throw std::invalid_argument("trace_path: src == dst");

    const double len = distance(src, dst);
    struct Piece {
        double t_in, t_out, sigma;
    };
    std::vector<Piece> pieces;
    for (const Building& b : geom.buildings) {
        for (const ClipInterval& iv : segment_polygon_clip(src, dst, b))
            pieces.push_back({iv.t_in, iv.t_out, b.sigma_t});
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& a, const Piece& b) { return a.t_in < b.t_in; });

    PathSegments path;
    path.total_length = len;
    double cursor = 0.0;
    for (const Piece& p : pieces) {
        const double t0 = std::max(p.t_in, cursor);
        const double t1 = std::max(p.t_out, cursor);
        if (t0 > cursor)
            path.segments.emplace_back((t0 - cursor) * len, geom.air_sigma_t);
        if (t1 > t0) path.segments.emplace_back((t1 - t0) * len, p.sigma);
        cursor = std::max(cursor, t1);
    }
    if (cursor < 1.0)
        path.segments.emplace_back((1.0 - cursor) * len, geom.air_sigma_t);
    return path;
}

double optical_depth(const PathSegments& path) {
    double d = 0.0;
    for (const auto& [len, sigma] : path.segments) d += len * sigma;
    return d;
}

}  // namespace radloc
