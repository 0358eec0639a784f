#pragma once

#include <span>
#include <vector>

#include "mvxray/vec.hpp"

namespace mvx {

// Convex polygon with counter-clockwise vertices. An empty vertex list is the
// empty set; anything with fewer than three vertices is treated as empty.
class ConvexPolygon {
public:
    ConvexPolygon() = default;
    explicit ConvexPolygon(std::vector<Point2> vertices);

    static ConvexPolygon from_rect(const Rect& r);

    const std::vector<Point2>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    bool empty() const { return vertices_.size() < 3; }

    double area() const;
    Rect bounding_rect() const;
    bool contains(Point2 p) const;

private:
    std::vector<Point2> vertices_;
};

// Shoelace formula; positive for counter-clockwise order.
double signed_area(std::span<const Point2> pts);

// Keeps the part of `poly` on the left of the directed line a->b
// (Sutherland-Hodgman single-edge pass). Input and output are vertex loops.
std::vector<Point2> clip_half_plane(std::span<const Point2> poly, Point2 a, Point2 b);

// Intersection of two convex polygons.
ConvexPolygon clip_convex(const ConvexPolygon& subject, const ConvexPolygon& clip);

// Intersection with an axis-aligned rectangle; the hot path of weight
// construction, so it avoids building a polygon for the rectangle.
ConvexPolygon clip_to_rect(std::span<const Point2> poly, const Rect& r);
double clipped_area(std::span<const Point2> poly, const Rect& r);

// Sequential intersection of all inputs; empty input yields an empty polygon.
ConvexPolygon intersect_convex(std::span<const ConvexPolygon> polys);

}  // namespace mvx
