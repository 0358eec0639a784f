#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvxray/boxes.hpp"
#include "mvxray/defaults.hpp"

namespace mvx {

// Detection evaluation in the every-point interpolated VOC style. Units are
// images for 2D evaluation and recordings for 3D evaluation; a detection can
// only match ground truth of the same unit.

template <class Box>
struct Detection {
    Box box;
    std::string class_label;
    double confidence = 0.0;
    std::string unit_id;
};

template <class Box>
struct GroundTruth {
    Box box;
    std::string class_label;
    std::string unit_id;
};

enum class Dimensionality { k2D, k3D };

struct EvalConfig {
    double iou_threshold = defaults::kIouThreshold2D;
    Dimensionality dimensionality = Dimensionality::k2D;

    static EvalConfig for_dims(Dimensionality d)
    {
        return {d == Dimensionality::k2D ? defaults::kIouThreshold2D : defaults::kIouThreshold3D, d};
    }
};

enum class MatchLabel : std::uint8_t { kTruePositive, kFalsePositive };

struct MatchResult {
    std::vector<std::size_t> order;  // detection indices by descending confidence (stable)
    std::vector<MatchLabel> labels;  // labels[i] belongs to detections[order[i]]
};

/// Greedy matching in confidence order: each detection claims the unmatched
/// same-unit ground truth with the highest IoU if that IoU reaches the
/// threshold. Class filtering is the caller's job.
template <class Box>
MatchResult match_detections(std::span<const Detection<Box>> dets,
                             std::span<const GroundTruth<Box>> gts, double iou_threshold);

/// Every-point interpolated AP of a confidence-ordered label sequence.
/// Requires n_gt >= 1.
double average_precision(std::span<const MatchLabel> labels, std::size_t n_gt);

struct PrPoint {
    double recall = 0.0;
    double precision = 0.0;
    double interpolated_precision = 0.0;  // max precision at recall >= this recall
};

std::vector<PrPoint> pr_curve(std::span<const MatchLabel> labels, std::size_t n_gt);

struct ClassReport {
    std::string class_label;
    std::size_t n_gt = 0;
    std::size_t n_det = 0;
    std::size_t n_tp = 0;
    double ap = 0.0;
    std::vector<PrPoint> curve;
};

struct EvalReport {
    double iou_threshold = 0.0;
    Dimensionality dimensionality = Dimensionality::k2D;
    std::vector<ClassReport> classes;  // classes present in ground truth, sorted by name
    double mean_ap = 0.0;
    /// Detection classes with no ground truth, with their detection counts.
    std::vector<std::pair<std::string, std::size_t>> unknown_classes;
};

template <class Box>
EvalReport evaluate_run(std::span<const Detection<Box>> dets, std::span<const GroundTruth<Box>> gts,
                        const EvalConfig& cfg);

/// PR curves as CSV with columns class,recall,precision,interpolated_precision.
std::string pr_curves_csv(const EvalReport& report);

}  // namespace mvx
