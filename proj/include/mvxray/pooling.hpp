#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "mvxray/boxes.hpp"
#include "mvxray/geometry.hpp"
#include "mvxray/tensor.hpp"

namespace mvx {

/// Weights below this are dropped from the sparse matrix.
inline constexpr double kWeightEpsilon = 1e-12;

/// Cross-section weight of feature column `beam` on cell (ix, iy).
struct XsecEntry {
    std::uint32_t beam = 0;
    std::uint32_t ix = 0;
    std::uint32_t iy = 0;
    double w = 0.0;
};

/// Belt-axis weight of feature row `ybin` on cell layer `iz`.
struct ZEntry {
    std::uint32_t ybin = 0;
    std::uint32_t iz = 0;
    double w = 0.0;
};

/// Separable weights of one view. The weight of feature bin (ybin, beam) on
/// cell (ix, iy, iz) is the product of the matching xsec and zmap entries.
struct ViewWeights {
    std::uint32_t n_xbins = 0;
    std::uint32_t n_ybins = 0;
    std::vector<XsecEntry> xsec;  // sorted by (ix, iy, beam)
    std::vector<ZEntry> zmap;     // sorted by (iz, ybin)

    // Row offsets into xsec per cell column (ix * ny + iy) and into zmap per
    // layer iz. Rebuilt by SparseWeights::build_index().
    std::vector<std::uint32_t> xsec_offsets;
    std::vector<std::uint32_t> z_offsets;
};

struct SparseWeights {
    VoxelGrid grid;
    int bin_px = 1;
    std::vector<ViewWeights> views;

    std::size_t view_count() const { return views.size(); }
    /// Sorts entries and rebuilds the row offsets.
    void build_index();
    /// Full weight of (view, ybin, beam) on a cell; 0 when absent.
    double weight(std::size_t view, std::uint32_t ybin, std::uint32_t beam, int ix, int iy,
                  int iz) const;
};

struct WeightOptions {
    /// Rescale each partially covered cell so its weights sum to one per view.
    bool renormalize_partial = false;
};

SparseWeights compute_weights(const ScannerGeometry& geom, const VoxelGrid& grid, int bin_px,
                              const WeightOptions& opts = {});

/// Feature columns per view at stride `bin_px`; the last one may be partial.
std::uint32_t feature_columns(const ViewGeometry& view, int bin_px);
/// Feature rows needed to cover the grid's belt extent.
std::uint32_t feature_rows(const ScannerGeometry& geom, const VoxelGrid& grid, int bin_px);

struct ViewMask {
    std::vector<bool> active;

    static ViewMask all(std::size_t n) { return {std::vector<bool>(n, true)}; }
    std::size_t active_count() const;
    /// Throws DomainError when no view is active, ShapeError on size mismatch.
    void validate(std::size_t n_views) const;
};

struct FeatureVolume {
    Tensor data;  // [C, nx, ny, nz]
    VoxelGrid grid;
};

/// Winning candidate per (channel, cell) of the max variant; -1 where the
/// cell has no covering beam. `beam` is the flat feature index ybin * W + x.
struct ArgmaxIndex {
    std::size_t channels = 0;
    std::size_t cells = 0;
    std::vector<std::int32_t> view;
    std::vector<std::int32_t> beam;
};

// Feature maps are indexed by view and shaped [C, n_ybins, n_xbins]; entries
// for inactive views are ignored and may be empty.

FeatureVolume pool_avg(const SparseWeights& weights, std::span<const Tensor> maps,
                       const ViewMask& mask);

/// Adjoint of pool_avg. Returns one gradient per view; inactive views get an
/// empty tensor.
std::vector<Tensor> pool_avg_backward(const SparseWeights& weights, const Tensor& grad_out,
                                      const ViewMask& mask);

struct MaxPoolResult {
    FeatureVolume volume;
    ArgmaxIndex argmax;
};

MaxPoolResult pool_max(const SparseWeights& weights, std::span<const Tensor> maps,
                       const ViewMask& mask);

std::vector<Tensor> pool_max_backward(const SparseWeights& weights, const ArgmaxIndex& argmax,
                                      const Tensor& grad_out, const ViewMask& mask);

/// Max-pools the cells covered by `box` into an [C, a, b, c] tensor.
Tensor roi_pool_3d(const FeatureVolume& volume, const Box3& box, std::array<int, 3> out_dims);

// MXW1 weight files, little-endian:
//   "MXW1", u32 view count, u32 bin_px, u32 nx, ny, nz, f64 origin[3], f64 cell_size[3],
//   per view: u32 n_xbins, u32 n_ybins,
//             u32 n, u32 beam[n], u32 ix[n], u32 iy[n], f64 w[n],
//             u32 m, u32 ybin[m], u32 iz[m], f64 w[m]
void write_weights(std::ostream& os, const SparseWeights& w);
SparseWeights read_weights(std::istream& is);
void save_weights(const std::filesystem::path& path, const SparseWeights& w);
SparseWeights load_weights(const std::filesystem::path& path);

}  // namespace mvx
