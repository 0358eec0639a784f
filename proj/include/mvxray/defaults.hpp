#pragma once

// Every numeric default of the library and CLI lives here.

namespace mvx::defaults {

/// Cells per axis of the fused feature volume.
inline constexpr int kGridDim = 96;
/// Image pixels per feature bin (backbone stride after four ResNet stages).
inline constexpr int kBinPx = 16;
/// RoI pooling output size per axis.
inline constexpr int kRoiDim = 7;

inline constexpr double kIouThreshold2D = 0.5;
/// 3D counterpart of kIouThreshold2D under equal per-axis shift tolerance;
/// equals convert_threshold_2d_to_3d(0.5) rounded to three digits.
inline constexpr double kIouThreshold3D = 0.374;

inline constexpr double kNmsIou = 0.3;

inline constexpr int kAnchorK = 10;
inline constexpr int kKmeansRestarts = 8;
inline constexpr int kKmeansMaxIters = 300;
inline constexpr double kKmeansTol = 1e-12;

inline constexpr unsigned long long kSeed = 0;

}  // namespace mvx::defaults
