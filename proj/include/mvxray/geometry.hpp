#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mvxray/polygon.hpp"
#include "mvxray/vec.hpp"

namespace mvx {

/// One X-ray source with its line detector, in the tunnel cross-section
/// plane (mm). Detector pixels run linearly from `detector_p0` (x_px = 0) to
/// `detector_p1` (x_px = image_width_px) and form the image x-axis.
struct ViewGeometry {
    std::string name;
    Point2 source;
    Point2 detector_p0;
    Point2 detector_p1;
    int image_width_px = 1;

    /// Throws ConfigError when the view is degenerate.
    void validate() const;
};

/// The fixed imaging setup. The image y-axis maps to the belt (z) axis via
/// z = y_px * belt_mm_per_px for every view.
struct ScannerGeometry {
    std::vector<ViewGeometry> views;
    Rect tunnel;
    double belt_mm_per_px = 1.0;

    std::size_t view_count() const { return views.size(); }

    /// Checks view invariants, tunnel area, and that no source or detector
    /// segment enters the tunnel interior. Throws ConfigError.
    void validate() const;

    /// True when at least two views have distinct source positions.
    bool supports_lifting() const;
};

/// Regular cell lattice; x and y span the cross-section, z is the belt axis.
struct VoxelGrid {
    Point3 origin;
    Vec3 cell_size{1.0, 1.0, 1.0};
    std::array<int, 3> dims{1, 1, 1};

    std::size_t cell_count() const
    {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    double lo(int axis) const { return origin[axis]; }
    double hi(int axis) const { return origin[axis] + cell_size[axis] * dims[axis]; }
    double cell_lo(int axis, int i) const { return origin[axis] + cell_size[axis] * i; }
    double cell_center(int axis, int i) const { return origin[axis] + cell_size[axis] * (i + 0.5); }
    Rect cell_rect(int ix, int iy) const
    {
        return {{cell_lo(0, ix), cell_lo(1, iy)}, {cell_lo(0, ix + 1), cell_lo(1, iy + 1)}};
    }
    Rect cross_section() const { return {{lo(0), lo(1)}, {hi(0), hi(1)}}; }

    void validate() const;
    /// Validates the grid and requires its cross-section inside the tunnel
    /// and its z-range at or after the start of the images (z >= 0).
    void validate_against(const ScannerGeometry& geom) const;
};

/// Maps a detector pixel coordinate in [0, image_width_px] to the detector.
Point2 detector_point(const ViewGeometry& view, double x_px);

/// Counter-clockwise triangle {source, detector(x_lo), detector(x_hi)}.
ConvexPolygon beam_triangle(const ViewGeometry& view, double x_lo_px, double x_hi_px);

/// Detector pixel coordinate hit by the ray from the source through `p`.
double project_point(const ViewGeometry& view, Point2 p);

/// Same as project_point but against the infinite detector line and without
/// range checks; returns false when the ray is parallel to or points away
/// from the detector line.
bool project_to_detector_line(const ViewGeometry& view, Point2 p, double& x_px);

}  // namespace mvx
