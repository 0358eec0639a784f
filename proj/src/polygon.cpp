#include "mvxray/polygon.hpp"

#include <algorithm>
#include <limits>

namespace mvx {

namespace {

std::vector<Point2> dedup(std::vector<Point2> pts)
{
    std::vector<Point2> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        if (out.empty() || !(out.back() == p)) out.push_back(p);
    }
    while (out.size() > 1 && out.front() == out.back()) out.pop_back();
    return out;
}

// One Sutherland-Hodgman pass against an axis-aligned boundary.
// Keeps points with sign * (coord(p) - bound) >= 0.
template <int Axis>
void clip_axis(const std::vector<Point2>& in, std::vector<Point2>& out, double bound, double sign)
{
    out.clear();
    const std::size_t n = in.size();
    if (n == 0) return;
    auto coord = [](Point2 p) { return Axis == 0 ? p.x : p.y; };
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 cur = in[i];
        const Point2 nxt = in[(i + 1) % n];
        const double dc = sign * (coord(cur) - bound);
        const double dn = sign * (coord(nxt) - bound);
        if (dc >= 0) out.push_back(cur);
        if ((dc >= 0) != (dn >= 0)) {
            const double t = dc / (dc - dn);
            Point2 p = cur + t * (nxt - cur);
            // Snap onto the boundary to keep the output exactly on the edge.
            if constexpr (Axis == 0) p.x = bound; else p.y = bound;
            out.push_back(p);
        }
    }
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point2> vertices) : vertices_(dedup(std::move(vertices)))
{
    if (vertices_.size() < 3) {
        vertices_.clear();
        return;
    }
    const double a = signed_area(vertices_);
    if (a == 0.0) {
        vertices_.clear();
    } else if (a < 0.0) {
        std::reverse(vertices_.begin(), vertices_.end());
    }
}

ConvexPolygon ConvexPolygon::from_rect(const Rect& r)
{
    return ConvexPolygon({r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}});
}

double ConvexPolygon::area() const
{
    return empty() ? 0.0 : signed_area(vertices_);
}

Rect ConvexPolygon::bounding_rect() const
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    Rect r{{inf, inf}, {-inf, -inf}};
    for (const auto& p : vertices_) {
        r.min.x = std::min(r.min.x, p.x);
        r.min.y = std::min(r.min.y, p.y);
        r.max.x = std::max(r.max.x, p.x);
        r.max.y = std::max(r.max.y, p.y);
    }
    return r;
}

bool ConvexPolygon::contains(Point2 p) const
{
    if (empty()) return false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = vertices_[i];
        const Point2 b = vertices_[(i + 1) % n];
        if (cross(b - a, p - a) < 0) return false;
    }
    return true;
}

double signed_area(std::span<const Point2> pts)
{
    const std::size_t n = pts.size();
    if (n < 3) return 0.0;
    // Shifted to the first vertex to limit cancellation for far-off polygons.
    const Point2 o = pts[0];
    double twice = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        twice += cross(pts[i] - o, pts[i + 1] - o);
    }
    return 0.5 * twice;
}

std::vector<Point2> clip_half_plane(std::span<const Point2> poly, Point2 a, Point2 b)
{
    std::vector<Point2> out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    out.reserve(n + 1);
    const Point2 dir = b - a;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 cur = poly[i];
        const Point2 nxt = poly[(i + 1) % n];
        const double dc = cross(dir, cur - a);
        const double dn = cross(dir, nxt - a);
        if (dc >= 0) out.push_back(cur);
        if ((dc >= 0) != (dn >= 0)) {
            const double t = dc / (dc - dn);
            out.push_back(cur + t * (nxt - cur));
        }
    }
    return out;
}

ConvexPolygon clip_convex(const ConvexPolygon& subject, const ConvexPolygon& clip)
{
    if (subject.empty() || clip.empty()) return {};
    std::vector<Point2> cur = subject.vertices();
    const auto& cv = clip.vertices();
    const std::size_t n = cv.size();
    for (std::size_t i = 0; i < n && !cur.empty(); ++i) {
        cur = clip_half_plane(cur, cv[i], cv[(i + 1) % n]);
    }
    return ConvexPolygon(std::move(cur));
}

ConvexPolygon clip_to_rect(std::span<const Point2> poly, const Rect& r)
{
    std::vector<Point2> a(poly.begin(), poly.end());
    std::vector<Point2> b;
    b.reserve(a.size() + 4);
    clip_axis<0>(a, b, r.min.x, 1.0);
    clip_axis<0>(b, a, r.max.x, -1.0);
    clip_axis<1>(a, b, r.min.y, 1.0);
    clip_axis<1>(b, a, r.max.y, -1.0);
    return ConvexPolygon(std::move(a));
}

double clipped_area(std::span<const Point2> poly, const Rect& r)
{
    thread_local std::vector<Point2> a;
    thread_local std::vector<Point2> b;
    a.assign(poly.begin(), poly.end());
    clip_axis<0>(a, b, r.min.x, 1.0);
    clip_axis<0>(b, a, r.max.x, -1.0);
    clip_axis<1>(a, b, r.min.y, 1.0);
    clip_axis<1>(b, a, r.max.y, -1.0);
    return std::max(0.0, signed_area(a));
}

ConvexPolygon intersect_convex(std::span<const ConvexPolygon> polys)
{
    if (polys.empty()) return {};
    ConvexPolygon acc = polys.front();
    for (std::size_t i = 1; i < polys.size() && !acc.empty(); ++i) {
        acc = clip_convex(acc, polys[i]);
    }
    return acc;
}

}  // namespace mvx
