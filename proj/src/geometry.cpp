#include "mvxray/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvxray/errors.hpp"

namespace mvx {

namespace {

constexpr double kParamTol = 1e-9;

// Liang-Barsky: does the segment a-b pass through the open rectangle?
bool segment_enters_interior(Point2 a, Point2 b, const Rect& r)
{
    double t0 = 0.0;
    double t1 = 1.0;
    const Point2 d = b - a;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {a.x - r.min.x, r.max.x - a.x, a.y - r.min.y, r.max.y - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0) t0 = std::max(t0, t);
        else t1 = std::min(t1, t);
        if (t0 > t1) return false;
    }
    if (t1 <= t0) return r.strictly_contains(a + t0 * d);
    return r.strictly_contains(a + (0.5 * (t0 + t1)) * d);
}

std::string view_label(const ViewGeometry& v)
{
    return v.name.empty() ? std::string("<unnamed view>") : v.name;
}

}  // namespace

void ViewGeometry::validate() const
{
    if (image_width_px < 1) {
        throw ConfigError(view_label(*this) + ": image_width_px must be >= 1");
    }
    if (detector_p0 == detector_p1) {
        throw ConfigError(view_label(*this) + ": detector endpoints coincide");
    }
    const Point2 e = detector_p1 - detector_p0;
    const Point2 rel = source - detector_p0;
    const double len2 = dot(e, e);
    const double along = dot(rel, e) / len2;
    if (std::abs(cross(e, rel)) <= 1e-12 * len2 && along >= 0.0 && along <= 1.0) {
        throw ConfigError(view_label(*this) + ": source lies on the detector segment");
    }
    if (std::abs(cross(e, rel)) <= 1e-12 * len2) {
        throw ConfigError(view_label(*this) + ": source is collinear with the detector");
    }
}

void ScannerGeometry::validate() const
{
    if (views.empty()) throw ConfigError("geometry needs at least one view");
    if (!(tunnel.width() > 0.0 && tunnel.height() > 0.0)) {
        throw ConfigError("tunnel rectangle must have positive area");
    }
    if (!(belt_mm_per_px > 0.0) || !std::isfinite(belt_mm_per_px)) {
        throw ConfigError("belt_mm_per_px must be positive");
    }
    for (const auto& v : views) {
        v.validate();
        if (tunnel.strictly_contains(v.source)) {
            throw ConfigError(view_label(v) + ": source inside the tunnel");
        }
        if (segment_enters_interior(v.detector_p0, v.detector_p1, tunnel)) {
            throw ConfigError(view_label(v) + ": detector crosses the tunnel");
        }
    }
}

bool ScannerGeometry::supports_lifting() const
{
    for (std::size_t i = 0; i < views.size(); ++i) {
        for (std::size_t j = i + 1; j < views.size(); ++j) {
            if (!(views[i].source == views[j].source)) return true;
        }
    }
    return false;
}

void VoxelGrid::validate() const
{
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1) throw ConfigError("grid dims must be positive");
        if (!(cell_size[a] > 0.0) || !std::isfinite(cell_size[a])) {
            throw ConfigError("grid cell_size must be positive");
        }
    }
}

void VoxelGrid::validate_against(const ScannerGeometry& geom) const
{
    validate();
    const Rect xs = cross_section();
    const Rect& t = geom.tunnel;
    constexpr double tol = 1e-9;
    if (xs.min.x < t.min.x - tol || xs.min.y < t.min.y - tol || xs.max.x > t.max.x + tol ||
        xs.max.y > t.max.y + tol) {
        std::ostringstream os;
        os << "grid cross-section [" << xs.min.x << ", " << xs.max.x << "] x [" << xs.min.y << ", "
           << xs.max.y << "] is not inside the tunnel";
        throw ConfigError(os.str());
    }
    if (origin.z < -tol) throw ConfigError("grid z-range must start at z >= 0");
}

Point2 detector_point(const ViewGeometry& view, double x_px)
{
    if (!(x_px >= 0.0 && x_px <= view.image_width_px)) {
        std::ostringstream os;
        os << "detector pixel " << x_px << " outside [0, " << view.image_width_px << "]";
        throw DomainError(os.str());
    }
    const double t = x_px / view.image_width_px;
    return view.detector_p0 + t * (view.detector_p1 - view.detector_p0);
}

ConvexPolygon beam_triangle(const ViewGeometry& view, double x_lo_px, double x_hi_px)
{
    if (!(x_lo_px < x_hi_px)) throw DomainError("beam bin must satisfy x_lo < x_hi");
    const Point2 a = detector_point(view, x_lo_px);
    const Point2 b = detector_point(view, x_hi_px);
    ConvexPolygon tri({view.source, a, b});
    if (tri.empty()) throw DomainError("beam triangle is degenerate");
    return tri;
}

bool project_to_detector_line(const ViewGeometry& view, Point2 p, double& x_px)
{
    const Point2 r = p - view.source;
    const Point2 e = view.detector_p1 - view.detector_p0;
    const double denom = cross(r, e);
    if (denom == 0.0) return false;
    const Point2 w = view.detector_p0 - view.source;
    const double lambda = cross(w, e) / denom;  // ray parameter
    if (!(lambda > 0.0)) return false;
    const double t = cross(w, r) / denom;  // detector parameter
    x_px = t * view.image_width_px;
    return true;
}

double project_point(const ViewGeometry& view, Point2 p)
{
    if (p == view.source) throw DegenerateError("cannot project the source itself");
    double x_px = 0.0;
    if (!project_to_detector_line(view, p, x_px)) {
        throw ProjectionError("ray from the source through the point misses the detector of " +
                              view_label(view));
    }
    const double w = view.image_width_px;
    if (x_px < -kParamTol * w || x_px > w * (1.0 + kParamTol)) {
        std::ostringstream os;
        os << "ray hits the detector line of " << view_label(view) << " at pixel " << x_px
           << ", outside [0, " << view.image_width_px << "]";
        throw ProjectionError(os.str());
    }
    return std::clamp(x_px, 0.0, w);
}

}  // namespace mvx
