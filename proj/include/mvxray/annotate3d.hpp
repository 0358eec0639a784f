#pragma once

#include <span>
#include <string>
#include <vector>

#include "mvxray/boxes.hpp"
#include "mvxray/geometry.hpp"
#include "mvxray/polygon.hpp"

namespace mvx {

/// 2D box of one view in image pixels (x along the detector, y along the belt).
struct ViewAnnotation {
    int view_index = 0;
    Box2 box2;
    std::string class_label;
};

/// Region of the cross-section consistent with the x-limits of `box2`:
/// the beam between those detector pixels, clipped to the tunnel.
ConvexPolygon wedge_polygon(const ViewGeometry& view, const Rect& tunnel, const Box2& box2);

/// Lifts one object's per-view boxes to a 3D box. The cross-section extent is
/// the bounding rectangle of the intersected wedges; the belt extent is the
/// mean of the per-view y-limits converted to mm.
Box3 gen_box3(const ScannerGeometry& geom, std::span<const ViewAnnotation> anns);

/// Projects a 3D box into every view (pixel coordinates).
std::vector<Box2> reproject_box3(const ScannerGeometry& geom, const Box3& box);

}  // namespace mvx
