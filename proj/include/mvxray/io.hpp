#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvxray/anchors.hpp"
#include "mvxray/boxes.hpp"
#include "mvxray/eval.hpp"
#include "mvxray/geometry.hpp"

namespace mvx {

using Json = nlohmann::json;

// Geometry:
//   { "belt_mm_per_px": f, "tunnel": {"min":[x,y],"max":[x,y]},
//     "views": [{"name":s,"source":[x,y],"detector":[[x,y],[x,y]],"image_width_px":n}] }
ScannerGeometry geometry_from_json(const Json& j);
Json geometry_to_json(const ScannerGeometry& g);

// Grid: { "origin":[x,y,z], "cell_size":[x,y,z], "dims":[nx,ny,nz] }
VoxelGrid grid_from_json(const Json& j);
Json grid_to_json(const VoxelGrid& g);

// Annotations, one object per recording:
//   { "id": s,
//     "views": [{"view":n,"boxes":[{"class":s,"cx":f,"cy":f,"w":f,"h":f}]}],
//     "boxes3d": [{"class":s,"center":[x,y,z],"size":[w,h,d]}] }
// Detection files use the same layout with an extra "score" per box. A 2D box
// may carry an "object" id tying boxes of one object across views.
struct Box2Record {
    std::string class_label;
    Box2 box;
    std::optional<double> score;
    std::optional<int> object;
};

struct ViewBoxes {
    int view = 0;
    std::vector<Box2Record> boxes;
};

struct Box3Record {
    std::string class_label;
    Box3 box;
    std::optional<double> score;
};

struct RecordingAnnotations {
    std::string id;
    std::vector<ViewBoxes> views;
    std::vector<Box3Record> boxes3d;
};

RecordingAnnotations recording_from_json(const Json& j);
Json recording_to_json(const RecordingAnnotations& r);
/// Accepts a single recording object or an array of them.
std::vector<RecordingAnnotations> recordings_from_json(const Json& j);
Json recordings_to_json(const std::vector<RecordingAnnotations>& rs);

AnchorSet anchors_from_json(const Json& j);  // {"anchors":[[w,h,d],...]} or [[w,h,d],...]
Json anchors_to_json(const AnchorSet& a);

Json report_to_json(const EvalReport& r);

Json read_json_file(const std::filesystem::path& path);
/// Writes with 2-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

/// Flattens per-view boxes and boxes3d into evaluation records. 2D units are
/// "<recording id>/<view>"; 3D units are the recording id. Boxes without a
/// score get confidence 1.
std::vector<Detection<Box2>> detections_2d(const std::vector<RecordingAnnotations>& rs);
std::vector<Detection<Box3>> detections_3d(const std::vector<RecordingAnnotations>& rs);
std::vector<GroundTruth<Box2>> ground_truth_2d(const std::vector<RecordingAnnotations>& rs);
std::vector<GroundTruth<Box3>> ground_truth_3d(const std::vector<RecordingAnnotations>& rs);

}  // namespace mvx
