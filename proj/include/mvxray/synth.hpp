#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvxray/boxes.hpp"
#include "mvxray/geometry.hpp"
#include "mvxray/tensor.hpp"

namespace mvx {

/// Example four-view layout: three sources below the tunnel, one at the side.
/// Plausible numbers, not measured from any real machine.
ScannerGeometry default_geometry();

/// Grid of `cells` per axis covering the tunnel cross-section and a belt
/// window of the same cell count along z.
VoxelGrid default_grid(const ScannerGeometry& geom, int cells);

struct ClassWeight {
    std::string label;
    double weight = 1.0;
};

struct SceneSpec {
    int n_objects = 1;
    Vec3 size_min{40.0, 40.0, 40.0};  // mm
    Vec3 size_max{200.0, 160.0, 200.0};
    std::vector<ClassWeight> classes{{"weapon", 1.0}, {"glassbottle", 1.0}};
    double density_min = 0.5;
    double density_max = 1.0;
    std::uint64_t seed = 0;
    /// Image rows; 0 picks the rows needed to cover the grid along the belt.
    int image_height_px = 0;
    int max_attempts = 1000;
    std::string recording_id = "rec0000";
};

struct SceneObject {
    Box3 box;
    std::string class_label;
    double density = 0.0;
};

struct Recording {
    std::string recording_id;
    std::vector<SceneObject> objects;
    std::vector<Tensor> images;             // per view, [1, H, W]
    std::vector<std::vector<Box2>> gt2d;    // per view, per object (same order as objects)
};

/// Samples disjoint boxes inside the grid and renders every view as additive
/// line integrals of box density along the ray through each pixel center.
Recording gen_recording(const ScannerGeometry& geom, const VoxelGrid& grid, const SceneSpec& spec);

/// Length of the part of segment a-b inside `r`.
double chord_length(Point2 a, Point2 b, const Rect& r);

/// Average-pools an image [C, H, W] into [C, rows, cols] bins of bin_px.
/// Partial bins average their available pixels; bins past the image are 0.
Tensor bin_average(const Tensor& image, int bin_px, std::size_t rows, std::size_t cols);

}  // namespace mvx
