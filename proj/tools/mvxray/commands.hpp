#pragma once

#include <CLI11.hpp>

namespace mvx::cli {

// Each function registers one subcommand on `app`; the callback runs the
// command and throws mvx errors on failure.
void add_synth_gen(CLI::App& app);
void add_compute_weights(CLI::App& app);
void add_pool(CLI::App& app);
void add_roi_pool(CLI::App& app);
void add_cluster_anchors(CLI::App& app);
void add_anchor_quality(CLI::App& app);
void add_gen3d(CLI::App& app);
void add_reproject(CLI::App& app);
void add_eval(CLI::App& app);
void add_iou_convert(CLI::App& app);
void add_nms3d(CLI::App& app);
void add_bench(CLI::App& app);

}  // namespace mvx::cli
