#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvxray/boxes.hpp"
#include "mvxray/geometry.hpp"

namespace mvx {

using Size3 = Vec3;

struct AnchorSet {
    std::vector<Size3> sizes;

    void validate() const;
};

struct ClusterConfig {
    int k = 10;
    std::uint64_t seed = 0;
    int restarts = 8;
    int max_iters = 300;
    double tol = 1e-12;
};

struct ClusterResult {
    AnchorSet anchors;
    double total_distance = 0.0;   // sum over points of distance to own centroid
    std::vector<double> history;   // total distance after each accepted iteration
    int best_restart = 0;
};

/// 1 - IoU of two boxes sharing a center.
double jaccard_distance(const Size3& a, const Size3& b);

/// Lloyd k-means on box sizes under jaccard_distance with mean centroids.
/// Seeding is k-means++ style; the best of `restarts` runs wins, ties going
/// to the earlier restart. An update that fails to lower the total distance
/// ends the run with the previous centroids, so `history` never increases.
ClusterResult kmeans_anchors(std::span<const Size3> dims, const ClusterConfig& cfg);

/// Mean over ground truths of the best IoU with any anchor placed on the
/// ground-truth center.
double avg_best_iou_centered(const AnchorSet& anchors, std::span<const Box3> gts);

/// Like avg_best_iou_centered, but every anchor is moved to the feature
/// position nearest the ground-truth center first. Feature positions sit at
/// grid.origin + (i + 0.5) * stride per axis, limited to the grid extent.
double avg_best_iou_grid(const AnchorSet& anchors, std::span<const Box3> gts,
                         const VoxelGrid& grid, const Vec3& stride);

/// Feature position nearest `center` along every axis.
Point3 snap_to_feature_grid(const Point3& center, const VoxelGrid& grid, const Vec3& stride);

/// One box per (anchor, cell), anchor-major then (ix, iy, iz), centered on
/// the cell centers.
std::vector<Box3> gen_anchor_grid(const AnchorSet& anchors, const VoxelGrid& grid);

/// The hand-picked 3D reference set: every size ratio drawn from {1, 2}
/// per axis (7 distinct shapes) at each scale, with volume scale^3.
AnchorSet expand_standard_anchors(std::span<const double> scales);

}  // namespace mvx
