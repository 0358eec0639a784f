#include "mvxray/io.hpp"

#include <fstream>

#include "mvxray/errors.hpp"

namespace mvx {

namespace {

Point2 point2(const Json& j)
{
    if (!j.is_array() || j.size() != 2) throw ConfigError("expected [x, y], got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>()};
}

Point3 point3(const Json& j)
{
    if (!j.is_array() || j.size() != 3) throw ConfigError("expected [x, y, z], got " + j.dump());
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json arr(Point2 p) { return Json::array({p.x, p.y}); }
Json arr(Point3 p) { return Json::array({p.x, p.y, p.z}); }
Json arr(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

// Runs `f`, turning JSON type/key errors into ConfigError with context.
template <class F>
auto parse(const char* what, F&& f)
{
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed ") + what + ": " + e.what());
    }
}

}  // namespace

ScannerGeometry geometry_from_json(const Json& j)
{
    auto g = parse("geometry", [&] {
        ScannerGeometry g;
        g.belt_mm_per_px = j.at("belt_mm_per_px").get<double>();
        g.tunnel = {point2(j.at("tunnel").at("min")), point2(j.at("tunnel").at("max"))};
        for (const auto& v : j.at("views")) {
            ViewGeometry vg;
            vg.name = v.value("name", std::string{});
            vg.source = point2(v.at("source"));
            const auto& det = v.at("detector");
            if (!det.is_array() || det.size() != 2) throw ConfigError("detector needs two endpoints");
            vg.detector_p0 = point2(det[0]);
            vg.detector_p1 = point2(det[1]);
            vg.image_width_px = v.at("image_width_px").get<int>();
            g.views.push_back(std::move(vg));
        }
        return g;
    });
    g.validate();
    return g;
}

Json geometry_to_json(const ScannerGeometry& g)
{
    Json views = Json::array();
    for (const auto& v : g.views) {
        views.push_back({{"name", v.name},
                         {"source", arr(v.source)},
                         {"detector", Json::array({arr(v.detector_p0), arr(v.detector_p1)})},
                         {"image_width_px", v.image_width_px}});
    }
    return {{"belt_mm_per_px", g.belt_mm_per_px},
            {"tunnel", {{"min", arr(g.tunnel.min)}, {"max", arr(g.tunnel.max)}}},
            {"views", views}};
}

VoxelGrid grid_from_json(const Json& j)
{
    auto g = parse("grid", [&] {
        VoxelGrid g;
        g.origin = point3(j.at("origin"));
        const Point3 c = point3(j.at("cell_size"));
        g.cell_size = {c.x, c.y, c.z};
        const auto& d = j.at("dims");
        if (!d.is_array() || d.size() != 3) throw ConfigError("grid dims need three entries");
        g.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
        return g;
    });
    g.validate();
    return g;
}

Json grid_to_json(const VoxelGrid& g)
{
    return {{"origin", arr(g.origin)},
            {"cell_size", arr(g.cell_size)},
            {"dims", Json::array({g.dims[0], g.dims[1], g.dims[2]})}};
}

RecordingAnnotations recording_from_json(const Json& j)
{
    return parse("annotations", [&] {
        RecordingAnnotations r;
        r.id = j.at("id").get<std::string>();
        for (const auto& v : j.value("views", Json::array())) {
            ViewBoxes vb;
            vb.view = v.at("view").get<int>();
            for (const auto& b : v.value("boxes", Json::array())) {
                Box2Record rec;
                rec.class_label = b.at("class").get<std::string>();
                rec.box = {b.at("cx").get<double>(), b.at("cy").get<double>(),
                           b.at("w").get<double>(), b.at("h").get<double>()};
                if (b.contains("score")) rec.score = b["score"].get<double>();
                if (b.contains("object")) rec.object = b["object"].get<int>();
                if (!rec.box.valid()) throw ConfigError("2D box with non-positive size in " + r.id);
                vb.boxes.push_back(std::move(rec));
            }
            r.views.push_back(std::move(vb));
        }
        for (const auto& b : j.value("boxes3d", Json::array())) {
            Box3Record rec;
            rec.class_label = b.at("class").get<std::string>();
            const Point3 s = point3(b.at("size"));
            rec.box = {point3(b.at("center")), {s.x, s.y, s.z}};
            if (b.contains("score")) rec.score = b["score"].get<double>();
            if (!rec.box.valid()) throw ConfigError("3D box with non-positive size in " + r.id);
            r.boxes3d.push_back(std::move(rec));
        }
        return r;
    });
}

Json recording_to_json(const RecordingAnnotations& r)
{
    Json views = Json::array();
    for (const auto& v : r.views) {
        Json boxes = Json::array();
        for (const auto& b : v.boxes) {
            Json jb = {{"class", b.class_label},
                       {"cx", b.box.cx},
                       {"cy", b.box.cy},
                       {"w", b.box.w},
                       {"h", b.box.h}};
            if (b.object) jb["object"] = *b.object;
            if (b.score) jb["score"] = *b.score;
            boxes.push_back(std::move(jb));
        }
        views.push_back({{"view", v.view}, {"boxes", boxes}});
    }
    Json boxes3d = Json::array();
    for (const auto& b : r.boxes3d) {
        Json jb = {{"class", b.class_label}, {"center", arr(b.box.center)}, {"size", arr(b.box.size)}};
        if (b.score) jb["score"] = *b.score;
        boxes3d.push_back(std::move(jb));
    }
    return {{"id", r.id}, {"views", views}, {"boxes3d", boxes3d}};
}

std::vector<RecordingAnnotations> recordings_from_json(const Json& j)
{
    std::vector<RecordingAnnotations> out;
    if (j.is_array()) {
        for (const auto& r : j) out.push_back(recording_from_json(r));
    } else {
        out.push_back(recording_from_json(j));
    }
    return out;
}

Json recordings_to_json(const std::vector<RecordingAnnotations>& rs)
{
    Json j = Json::array();
    for (const auto& r : rs) j.push_back(recording_to_json(r));
    return j;
}

AnchorSet anchors_from_json(const Json& j)
{
    auto a = parse("anchors", [&] {
        const Json& list = j.is_object() ? j.at("anchors") : j;
        AnchorSet a;
        for (const auto& s : list) {
            const Point3 p = point3(s);
            a.sizes.push_back({p.x, p.y, p.z});
        }
        return a;
    });
    a.validate();
    return a;
}

Json anchors_to_json(const AnchorSet& a)
{
    Json list = Json::array();
    for (const auto& s : a.sizes) list.push_back(arr(s));
    return {{"anchors", list}};
}

Json report_to_json(const EvalReport& r)
{
    Json classes = Json::array();
    for (const auto& c : r.classes) {
        classes.push_back({{"class", c.class_label},
                           {"n_gt", c.n_gt},
                           {"n_det", c.n_det},
                           {"n_tp", c.n_tp},
                           {"ap", c.ap}});
    }
    Json unknown = Json::array();
    for (const auto& [cls, n] : r.unknown_classes) {
        unknown.push_back({{"class", cls}, {"n_det", n}});
    }
    return {{"dimensionality", r.dimensionality == Dimensionality::k2D ? "2d" : "3d"},
            {"iou_threshold", r.iou_threshold},
            {"classes", classes},
            {"mean_ap", r.mean_ap},
            {"unknown_classes", unknown}};
}

Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path.string());
    try {
        return Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j)
{
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << j.dump(2) << '\n';
}

std::vector<Detection<Box2>> detections_2d(const std::vector<RecordingAnnotations>& rs)
{
    std::vector<Detection<Box2>> out;
    for (const auto& r : rs) {
        for (const auto& v : r.views) {
            const std::string unit = r.id + "/" + std::to_string(v.view);
            for (const auto& b : v.boxes) {
                out.push_back({b.box, b.class_label, b.score.value_or(1.0), unit});
            }
        }
    }
    return out;
}

std::vector<Detection<Box3>> detections_3d(const std::vector<RecordingAnnotations>& rs)
{
    std::vector<Detection<Box3>> out;
    for (const auto& r : rs) {
        for (const auto& b : r.boxes3d) out.push_back({b.box, b.class_label, b.score.value_or(1.0), r.id});
    }
    return out;
}

std::vector<GroundTruth<Box2>> ground_truth_2d(const std::vector<RecordingAnnotations>& rs)
{
    std::vector<GroundTruth<Box2>> out;
    for (const auto& r : rs) {
        for (const auto& v : r.views) {
            const std::string unit = r.id + "/" + std::to_string(v.view);
            for (const auto& b : v.boxes) out.push_back({b.box, b.class_label, unit});
        }
    }
    return out;
}

std::vector<GroundTruth<Box3>> ground_truth_3d(const std::vector<RecordingAnnotations>& rs)
{
    std::vector<GroundTruth<Box3>> out;
    for (const auto& r : rs) {
        for (const auto& b : r.boxes3d) out.push_back({b.box, b.class_label, r.id});
    }
    return out;
}

}  // namespace mvx
