#include "mvxray/annotate3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "mvxray/errors.hpp"

namespace mvx {

namespace {

// Tolerance for x-limits that sit on the image border after float round-off.
constexpr double kEdgeTol = 1e-9;

double clamp_px(double x, const ViewGeometry& view)
{
    const double w = view.image_width_px;
    if (x < -kEdgeTol * w || x > w * (1.0 + kEdgeTol)) {
        std::ostringstream os;
        os << "box x-limit " << x << " outside the image of " << view.name << " [0, " << w << "]";
        throw DomainError(os.str());
    }
    return std::clamp(x, 0.0, w);
}

}  // namespace

ConvexPolygon wedge_polygon(const ViewGeometry& view, const Rect& tunnel, const Box2& box2)
{
    if (!(box2.w > 0.0)) throw DegenerateError("annotation box has zero width");
    const double x0 = clamp_px(box2.x_min(), view);
    const double x1 = clamp_px(box2.x_max(), view);
    if (!(x0 < x1)) throw DegenerateError("annotation box has zero width");
    const ConvexPolygon tri = beam_triangle(view, x0, x1);
    return clip_to_rect(tri.vertices(), tunnel);
}

Box3 gen_box3(const ScannerGeometry& geom, std::span<const ViewAnnotation> anns)
{
    if (anns.empty()) throw InsufficientViewsError("no annotations given");
    std::set<int> seen;
    for (const auto& a : anns) {
        if (a.view_index < 0 || static_cast<std::size_t>(a.view_index) >= geom.view_count()) {
            throw DomainError("annotation refers to unknown view " + std::to_string(a.view_index));
        }
        if (!seen.insert(a.view_index).second) {
            throw InconsistentAnnotationError("two annotations for view " +
                                              std::to_string(a.view_index) +
                                              "; cross-view matching is not supported");
        }
        if (a.class_label != anns.front().class_label) {
            throw InconsistentAnnotationError("annotations of one object disagree on the class (" +
                                              anns.front().class_label + " vs " + a.class_label + ")");
        }
        if (!a.box2.valid()) throw DegenerateError("annotation box must have positive size");
    }

    bool distinct_sources = false;
    for (const auto& a : anns) {
        if (!(geom.views[a.view_index].source == geom.views[anns.front().view_index].source)) {
            distinct_sources = true;
        }
    }
    if (anns.size() < 2 || !distinct_sources) {
        throw InsufficientViewsError("lifting needs annotations from at least two views with "
                                     "distinct sources");
    }

    std::vector<ConvexPolygon> wedges;
    wedges.reserve(anns.size());
    for (const auto& a : anns) {
        wedges.push_back(wedge_polygon(geom.views[a.view_index], geom.tunnel, a.box2));
    }
    const ConvexPolygon region = intersect_convex(wedges);
    if (region.empty()) {
        throw InconsistentAnnotationError("the annotated views do not intersect in the tunnel");
    }
    const Rect xy = region.bounding_rect();

    double y0 = 0.0;
    double y1 = 0.0;
    for (const auto& a : anns) {
        y0 += a.box2.y_min();
        y1 += a.box2.y_max();
    }
    const double n = static_cast<double>(anns.size());
    const double z0 = y0 / n * geom.belt_mm_per_px;
    const double z1 = y1 / n * geom.belt_mm_per_px;
    return Box3::from_corners({xy.min.x, xy.min.y, z0}, {xy.max.x, xy.max.y, z1});
}

std::vector<Box2> reproject_box3(const ScannerGeometry& geom, const Box3& box)
{
    if (!box.valid()) throw DomainError("invalid 3D box");
    const Point2 corners[4] = {{box.lo(0), box.lo(1)},
                               {box.hi(0), box.lo(1)},
                               {box.hi(0), box.hi(1)},
                               {box.lo(0), box.hi(1)}};
    const double y0 = box.lo(2) / geom.belt_mm_per_px;
    const double y1 = box.hi(2) / geom.belt_mm_per_px;
    std::vector<Box2> out;
    out.reserve(geom.view_count());
    for (const auto& view : geom.views) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& c : corners) {
            const double x = project_point(view, c);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        out.push_back(Box2::from_corners(lo, y0, hi, y1));
    }
    return out;
}

}  // namespace mvx
