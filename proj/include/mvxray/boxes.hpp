#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvxray/vec.hpp"

namespace mvx {

/// Center-size 2D box (pixels or mm).
struct Box2 {
    double cx = 0.0;
    double cy = 0.0;
    double w = 1.0;
    double h = 1.0;

    static Box2 from_corners(double x0, double y0, double x1, double y1)
    {
        return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
    }
    double x_min() const { return cx - 0.5 * w; }
    double x_max() const { return cx + 0.5 * w; }
    double y_min() const { return cy - 0.5 * h; }
    double y_max() const { return cy + 0.5 * h; }
    double area() const { return w * h; }
    bool valid() const;
};

/// Center-size 3D box in mm; (w, h, d) extend along (x, y, z).
struct Box3 {
    Point3 center;
    Vec3 size{1.0, 1.0, 1.0};

    static Box3 from_corners(Point3 lo, Point3 hi)
    {
        return {{0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y), 0.5 * (lo.z + hi.z)},
                {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z}};
    }
    double lo(int axis) const { return center[axis] - 0.5 * size[axis]; }
    double hi(int axis) const { return center[axis] + 0.5 * size[axis]; }
    double volume() const { return size[0] * size[1] * size[2]; }
    bool valid() const;
};

/// Box regression offsets relative to an anchor.
struct Regression6 {
    double tx = 0.0, ty = 0.0, tz = 0.0;
    double tw = 0.0, th = 0.0, td = 0.0;
};

double iou(const Box2& a, const Box2& b);
double iou(const Box3& a, const Box3& b);

Regression6 encode_regression(const Box3& box, const Box3& anchor);
Box3 decode_regression(const Regression6& t, const Box3& anchor);

/// Relative per-axis shift that keeps a 2D IoU of exactly `t2`.
double shift_for_threshold(double t2);
/// 3D IoU of a box shifted by relative `s` along every axis.
double threshold_3d_from_shift(double s);
/// 3D IoU threshold with the same per-axis shift tolerance as `t2` in 2D.
double convert_threshold_2d_to_3d(double t2);

struct ScoredBox3 {
    Box3 box;
    double score = 0.0;
};

/// Greedy NMS. Returns kept input indices in descending score order; equal
/// scores keep input order. A box is suppressed when its IoU with a kept box
/// is strictly above `iou_thresh`.
std::vector<std::size_t> nms_3d(std::span<const ScoredBox3> dets, double iou_thresh);

}  // namespace mvx
