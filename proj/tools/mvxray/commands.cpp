#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "mvxray/anchors.hpp"
#include "mvxray/annotate3d.hpp"
#include "mvxray/boxes.hpp"
#include "mvxray/defaults.hpp"
#include "mvxray/errors.hpp"
#include "mvxray/eval.hpp"
#include "mvxray/io.hpp"
#include "mvxray/parallel.hpp"
#include "mvxray/pooling.hpp"
#include "mvxray/random.hpp"
#include "mvxray/synth.hpp"

namespace fs = std::filesystem;

namespace mvx::cli {

namespace {

ScannerGeometry load_geometry(const std::string& path)
{
    if (path.empty()) return default_geometry();
    auto g = geometry_from_json(read_json_file(path));
    g.validate();
    return g;
}

VoxelGrid load_grid(const std::string& path, const ScannerGeometry& geom, int cells)
{
    VoxelGrid grid = path.empty() ? default_grid(geom, cells) : grid_from_json(read_json_file(path));
    grid.validate_against(geom);
    return grid;
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << text;
    if (!os) throw Error("failed writing " + path);
}

void write_json(const std::string& path, const Json& j)
{
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    write_json_file(path, j);
}

std::uint64_t derive_seed(std::uint64_t seed, std::size_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    return rng();
}

std::string recording_name(std::size_t i)
{
    std::ostringstream os;
    os << "rec" << std::setw(4) << std::setfill('0') << i;
    return os.str();
}

// Groups the 2D boxes of one recording into objects. Boxes carrying an
// "object" id are grouped by it; without ids, a recording with at most one
// box per view is one object.
std::map<int, std::vector<ViewAnnotation>> group_objects(const RecordingAnnotations& rec)
{
    std::map<int, std::vector<ViewAnnotation>> groups;
    bool any_id = false;
    bool any_plain = false;
    for (const auto& vb : rec.views) {
        for (const auto& b : vb.boxes) {
            (b.object ? any_id : any_plain) = true;
        }
    }
    if (any_id && any_plain) {
        throw InconsistentAnnotationError("recording " + rec.id + " mixes boxes with and without object ids");
    }
    for (const auto& vb : rec.views) {
        if (!any_id && vb.boxes.size() > 1) {
            throw InconsistentAnnotationError("recording " + rec.id + " has several boxes in view " +
                                              std::to_string(vb.view) + " but no object ids");
        }
        for (const auto& b : vb.boxes) {
            groups[b.object.value_or(0)].push_back({vb.view, b.box, b.class_label});
        }
    }
    return groups;
}

}  // namespace

void add_synth_gen(CLI::App& app)
{
    struct Opts {
        std::string out;
        std::string geometry;
        int cells = defaults::kGridDim;
        int bin_px = defaults::kBinPx;
        int recordings = 1;
        int objects = 1;
        std::uint64_t seed = defaults::kSeed;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("synth-gen", "Generate synthetic recordings with known ground truth");
    cmd->add_option("--out", o->out, "Output directory")->required();
    cmd->add_option("--geometry", o->geometry, "Geometry JSON (default: built-in four-view layout)");
    cmd->add_option("--cells", o->cells, "Grid cells per axis")->check(CLI::PositiveNumber);
    cmd->add_option("--bin-px", o->bin_px, "Image pixels per feature bin")->check(CLI::PositiveNumber);
    cmd->add_option("--recordings", o->recordings, "Number of recordings")->check(CLI::NonNegativeNumber);
    cmd->add_option("--objects", o->objects, "Objects per recording")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", o->seed, "Random seed");
    cmd->callback([o] {
        const auto geom = load_geometry(o->geometry);
        const auto grid = default_grid(geom, o->cells);
        grid.validate_against(geom);
        fs::create_directories(o->out);
        write_json_file(fs::path(o->out) / "geometry.json", geometry_to_json(geom));
        write_json_file(fs::path(o->out) / "grid.json", grid_to_json(grid));

        const auto rows = feature_rows(geom, grid, o->bin_px);
        std::vector<RecordingAnnotations> anns;
        for (int r = 0; r < o->recordings; ++r) {
            SceneSpec spec;
            spec.n_objects = o->objects;
            spec.seed = derive_seed(o->seed, static_cast<std::size_t>(r));
            spec.recording_id = recording_name(static_cast<std::size_t>(r));
            const Recording rec = gen_recording(geom, grid, spec);

            const fs::path dir = fs::path(o->out) / rec.recording_id;
            fs::create_directories(dir);
            for (std::size_t v = 0; v < geom.view_count(); ++v) {
                const auto& image = rec.images[v];
                save_tensor(dir / ("image_" + std::to_string(v) + ".mxt"), image);
                const auto cols = feature_columns(geom.views[v], o->bin_px);
                save_tensor(dir / ("features_" + std::to_string(v) + ".mxt"),
                            bin_average(image, o->bin_px, rows, cols));
            }

            RecordingAnnotations a;
            a.id = rec.recording_id;
            for (std::size_t v = 0; v < geom.view_count(); ++v) {
                ViewBoxes vb;
                vb.view = static_cast<int>(v);
                for (std::size_t i = 0; i < rec.objects.size(); ++i) {
                    vb.boxes.push_back({rec.objects[i].class_label, rec.gt2d[v][i], std::nullopt,
                                        static_cast<int>(i)});
                }
                a.views.push_back(std::move(vb));
            }
            for (const auto& obj : rec.objects) a.boxes3d.push_back({obj.class_label, obj.box, std::nullopt});
            anns.push_back(std::move(a));
        }
        write_json_file(fs::path(o->out) / "annotations.json", recordings_to_json(anns));
    });
}

void add_compute_weights(CLI::App& app)
{
    struct Opts {
        std::string geometry;
        std::string grid;
        std::string out;
        int cells = defaults::kGridDim;
        int bin_px = defaults::kBinPx;
        bool renormalize = false;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("compute-weights", "Build the sparse beam/cell weight matrices");
    cmd->add_option("--geometry", o->geometry, "Geometry JSON (default: built-in layout)");
    cmd->add_option("--grid", o->grid, "Grid JSON (default: --cells over the tunnel)");
    cmd->add_option("--cells", o->cells, "Grid cells per axis when no grid file is given")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--bin-px", o->bin_px, "Image pixels per feature bin")->check(CLI::PositiveNumber);
    cmd->add_flag("--renormalize-partial", o->renormalize, "Rescale partially covered cells to sum 1");
    cmd->add_option("--out", o->out, "Output weights file (.mxw)")->required();
    cmd->callback([o] {
        const auto geom = load_geometry(o->geometry);
        const auto grid = load_grid(o->grid, geom, o->cells);
        const auto w = compute_weights(geom, grid, o->bin_px, {.renormalize_partial = o->renormalize});
        save_weights(o->out, w);
        std::size_t nnz = 0;
        for (const auto& v : w.views) nnz += v.xsec.size();
        std::cerr << "weights: " << w.view_count() << " views, " << nnz << " cross-section entries\n";
    });
}

void add_pool(CLI::App& app)
{
    struct Opts {
        std::string weights;
        std::vector<std::string> maps;
        std::string variant = "avg";
        std::vector<int> disabled;
        std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("pool", "Fuse per-view feature maps into a 3D feature volume");
    cmd->add_option("--weights", o->weights, "Weights file from compute-weights")->required();
    cmd->add_option("--maps", o->maps, "Per-view feature tensors [C,rows,cols], in view order")->required();
    cmd->add_option("--variant", o->variant, "Pooling variant")->check(CLI::IsMember({"avg", "max"}));
    cmd->add_option("--disable-view", o->disabled, "View index to leave out (repeatable)");
    cmd->add_option("--out", o->out, "Output volume tensor [C,nx,ny,nz]")->required();
    cmd->callback([o] {
        const auto w = load_weights(o->weights);
        if (o->maps.size() != w.view_count()) {
            throw ConfigError("expected " + std::to_string(w.view_count()) + " feature maps, got " +
                              std::to_string(o->maps.size()));
        }
        ViewMask mask = ViewMask::all(w.view_count());
        for (int v : o->disabled) {
            if (v < 0 || static_cast<std::size_t>(v) >= w.view_count()) {
                throw ConfigError("--disable-view " + std::to_string(v) + " is not a view index");
            }
            mask.active[v] = false;
        }
        std::vector<Tensor> maps(w.view_count());
        for (std::size_t v = 0; v < maps.size(); ++v) {
            if (mask.active[v]) maps[v] = load_tensor(o->maps[v]);
        }
        const Tensor out = o->variant == "avg" ? pool_avg(w, maps, mask).data : pool_max(w, maps, mask).volume.data;
        save_tensor(o->out, out);
    });
}

void add_roi_pool(CLI::App& app)
{
    struct Opts {
        std::string volume;
        std::string grid;
        std::vector<double> box;
        std::vector<int> out_dims{defaults::kRoiDim, defaults::kRoiDim, defaults::kRoiDim};
        std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("roi-pool", "Max-pool a 3D box of a feature volume to a fixed size");
    cmd->add_option("--volume", o->volume, "Feature volume tensor [C,nx,ny,nz]")->required();
    cmd->add_option("--grid", o->grid, "Grid JSON of the volume")->required();
    cmd->add_option("--box", o->box, "Box as cx cy cz w h d (mm)")->required()->expected(6);
    cmd->add_option("--out-dims", o->out_dims, "Output cells per axis")->expected(3);
    cmd->add_option("--out", o->out, "Output tensor [C,a,b,c]")->required();
    cmd->callback([o] {
        const auto grid = grid_from_json(read_json_file(o->grid));
        FeatureVolume vol{load_tensor(o->volume), grid};
        const Box3 box{{o->box[0], o->box[1], o->box[2]}, {o->box[3], o->box[4], o->box[5]}};
        save_tensor(o->out, roi_pool_3d(vol, box, {o->out_dims[0], o->out_dims[1], o->out_dims[2]}));
    });
}

namespace {

// Box sizes and boxes from either a plain list of [w,h,d] or annotation JSON.
struct SizeInput {
    std::vector<Size3> dims;
    std::vector<Box3> boxes;  // empty for plain size lists
};

SizeInput read_sizes(const std::string& path)
{
    const Json j = read_json_file(path);
    SizeInput in;
    const bool plain = j.is_array() && (j.empty() || j.front().is_array());
    if (plain || (j.is_object() && j.contains("anchors"))) {
        in.dims = anchors_from_json(j).sizes;
        return in;
    }
    for (const auto& rec : recordings_from_json(j)) {
        for (const auto& b : rec.boxes3d) {
            in.dims.push_back(b.box.size);
            in.boxes.push_back(b.box);
        }
    }
    return in;
}

Json quality_json(const AnchorSet& anchors, const SizeInput& in, const std::string& grid_path,
                  const std::vector<double>& stride)
{
    Json q;
    std::vector<Box3> centered = in.boxes;
    if (centered.empty()) {
        for (const auto& d : in.dims) centered.push_back({{0, 0, 0}, d});
    }
    q["avg_iou_centered"] = avg_best_iou_centered(anchors, centered);
    if (!grid_path.empty() && !in.boxes.empty()) {
        const auto grid = grid_from_json(read_json_file(grid_path));
        const Vec3 s = stride.empty() ? grid.cell_size : Vec3{stride[0], stride[1], stride[2]};
        q["avg_iou_grid"] = avg_best_iou_grid(anchors, in.boxes, grid, s);
        q["stride"] = s;
    }
    return q;
}

}  // namespace

void add_cluster_anchors(CLI::App& app)
{
    struct Opts {
        std::string input;
        std::string out;
        std::string grid;
        std::vector<double> stride;
        ClusterConfig cfg{defaults::kAnchorK, defaults::kSeed, defaults::kKmeansRestarts,
                          defaults::kKmeansMaxIters, defaults::kKmeansTol};
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("cluster-anchors", "k-means anchor sizes under Jaccard distance");
    cmd->add_option("--input", o->input, "JSON list of [w,h,d] or annotation JSON with boxes3d")->required();
    cmd->add_option("--k", o->cfg.k, "Number of anchors")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o->cfg.seed, "Random seed");
    cmd->add_option("--restarts", o->cfg.restarts, "Independent seedings")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", o->cfg.max_iters, "Iteration cap per run")->check(CLI::PositiveNumber);
    cmd->add_option("--tol", o->cfg.tol, "Stop when the distance drops by less than this");
    cmd->add_option("--grid", o->grid, "Grid JSON for the grid-shifted metric");
    cmd->add_option("--stride", o->stride, "Feature stride per axis in mm (default: grid cell size)")->expected(3);
    cmd->add_option("--out", o->out, "Output anchor JSON (default: stdout)");
    cmd->callback([o] {
        const auto in = read_sizes(o->input);
        const auto res = kmeans_anchors(in.dims, o->cfg);
        Json j = anchors_to_json(res.anchors);
        j["total_distance"] = res.total_distance;
        j["iterations"] = res.history.size() - 1;
        j["best_restart"] = res.best_restart;
        j["quality"] = quality_json(res.anchors, in, o->grid, o->stride);
        write_json(o->out, j);
    });
}

void add_anchor_quality(CLI::App& app)
{
    struct Opts {
        std::string anchors;
        std::string input;
        std::string grid;
        std::vector<double> stride;
        std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("anchor-quality", "Average best IoU of anchors, centered and grid-shifted");
    cmd->add_option("--anchors", o->anchors, "Anchor JSON")->required();
    cmd->add_option("--input", o->input, "Annotation JSON with boxes3d (or a list of sizes)")->required();
    cmd->add_option("--grid", o->grid, "Grid JSON for the grid-shifted metric");
    cmd->add_option("--stride", o->stride, "Feature stride per axis in mm (default: grid cell size)")->expected(3);
    cmd->add_option("--out", o->out, "Output JSON (default: stdout)");
    cmd->callback([o] {
        const auto anchors = anchors_from_json(read_json_file(o->anchors));
        write_json(o->out, quality_json(anchors, read_sizes(o->input), o->grid, o->stride));
    });
}

void add_gen3d(CLI::App& app)
{
    struct Opts {
        std::string geometry;
        std::string input;
        std::string out;
        bool skip_invalid = false;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("gen3d", "Lift per-view 2D annotations to 3D boxes");
    cmd->add_option("--geometry", o->geometry, "Geometry JSON (default: built-in layout)");
    cmd->add_option("--input", o->input, "Annotation JSON with per-view 2D boxes")->required();
    cmd->add_option("--out", o->out, "Output annotation JSON with boxes3d (default: stdout)");
    cmd->add_flag("--skip-invalid", o->skip_invalid, "Warn and skip objects that cannot be lifted");
    cmd->callback([o] {
        const auto geom = load_geometry(o->geometry);
        auto recs = recordings_from_json(read_json_file(o->input));
        for (auto& rec : recs) {
            rec.boxes3d.clear();
            for (const auto& [id, anns] : group_objects(rec)) {
                try {
                    rec.boxes3d.push_back({anns.front().class_label, gen_box3(geom, anns), std::nullopt});
                } catch (const Error& e) {
                    if (!o->skip_invalid) throw;
                    std::cerr << "warning: " << rec.id << " object " << id << ": " << e.what() << '\n';
                }
            }
        }
        write_json(o->out, recordings_to_json(recs));
    });
}

void add_reproject(CLI::App& app)
{
    struct Opts {
        std::string geometry;
        std::string input;
        std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("reproject", "Project 3D boxes back into every view");
    cmd->add_option("--geometry", o->geometry, "Geometry JSON (default: built-in layout)");
    cmd->add_option("--input", o->input, "Annotation JSON with boxes3d")->required();
    cmd->add_option("--out", o->out, "Output annotation JSON (default: stdout)");
    cmd->callback([o] {
        const auto geom = load_geometry(o->geometry);
        auto recs = recordings_from_json(read_json_file(o->input));
        for (auto& rec : recs) {
            rec.views.assign(geom.view_count(), {});
            for (std::size_t v = 0; v < geom.view_count(); ++v) rec.views[v].view = static_cast<int>(v);
            for (std::size_t i = 0; i < rec.boxes3d.size(); ++i) {
                const auto& b = rec.boxes3d[i];
                const auto boxes = reproject_box3(geom, b.box);
                for (std::size_t v = 0; v < boxes.size(); ++v) {
                    rec.views[v].boxes.push_back({b.class_label, boxes[v], b.score, static_cast<int>(i)});
                }
            }
        }
        write_json(o->out, recordings_to_json(recs));
    });
}

void add_eval(CLI::App& app)
{
    struct Opts {
        std::string dims = "2d";
        std::string detections;
        std::string annotations;
        std::optional<double> iou;
        std::string report;
        std::string pr_csv;
        std::string format = "json";
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("eval", "VOC-style average precision of detections");
    cmd->add_option("--dims", o->dims, "Evaluate 2D boxes per image or 3D boxes per recording")
        ->check(CLI::IsMember({"2d", "3d"}));
    cmd->add_option("--detections", o->detections, "Detection JSON (annotation layout plus score)")->required();
    cmd->add_option("--annotations", o->annotations, "Ground-truth annotation JSON")->required();
    cmd->add_option("--iou", o->iou, "IoU threshold (default 0.5 in 2D, 0.374 in 3D)")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--report", o->report, "Write the report JSON here");
    cmd->add_option("--pr-csv", o->pr_csv, "Write PR curves as CSV here");
    cmd->add_option("--output-format", o->format, "Format printed to stdout")->check(CLI::IsMember({"json", "csv"}));
    cmd->callback([o] {
        const auto dets = recordings_from_json(read_json_file(o->detections));
        const auto gts = recordings_from_json(read_json_file(o->annotations));
        const auto d = o->dims == "2d" ? Dimensionality::k2D : Dimensionality::k3D;
        EvalConfig cfg = EvalConfig::for_dims(d);
        if (o->iou) {
            if (!(*o->iou > 0.0)) throw ConfigError("--iou must be in (0, 1]");
            cfg.iou_threshold = *o->iou;
        }
        const EvalReport report = d == Dimensionality::k2D
                                      ? evaluate_run<Box2>(detections_2d(dets), ground_truth_2d(gts), cfg)
                                      : evaluate_run<Box3>(detections_3d(dets), ground_truth_3d(gts), cfg);
        for (const auto& [label, count] : report.unknown_classes) {
            std::cerr << "warning: " << count << " detections of class '" << label
                      << "' have no ground truth and were not scored\n";
        }
        const Json j = report_to_json(report);
        const std::string csv = pr_curves_csv(report);
        if (!o->report.empty()) write_json_file(o->report, j);
        if (!o->pr_csv.empty()) write_text(o->pr_csv, csv);
        if (o->format == "json") {
            std::cout << j.dump(2) << '\n';
        } else {
            std::cout << csv;
        }
    });
}

void add_iou_convert(CLI::App& app)
{
    struct Opts {
        double t2 = defaults::kIouThreshold2D;
        int precision = 3;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("iou-convert", "3D IoU threshold with the per-axis shift tolerance of a 2D one");
    cmd->add_option("--t2", o->t2, "2D IoU threshold in (0, 1]");
    cmd->add_option("--precision", o->precision, "Digits after the decimal point")->check(CLI::Range(0, 17));
    cmd->callback([o] {
        std::cout << std::fixed << std::setprecision(o->precision) << convert_threshold_2d_to_3d(o->t2) << '\n';
    });
}

void add_nms3d(CLI::App& app)
{
    struct Opts {
        std::string input;
        std::string out;
        double iou = defaults::kNmsIou;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("nms3d", "Greedy non-maximum suppression of scored 3D boxes");
    cmd->add_option("--input", o->input, "Detection JSON with scored boxes3d")->required();
    cmd->add_option("--iou", o->iou, "Suppress boxes overlapping a kept one by more than this")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--out", o->out, "Output JSON (default: stdout)");
    cmd->callback([o] {
        auto recs = recordings_from_json(read_json_file(o->input));
        for (auto& rec : recs) {
            // Suppression runs per class; the kept boxes keep their input order.
            std::set<std::string> classes;
            for (const auto& b : rec.boxes3d) classes.insert(b.class_label);
            std::vector<char> keep(rec.boxes3d.size(), 0);
            for (const auto& c : classes) {
                std::vector<std::size_t> idx;
                std::vector<ScoredBox3> scored;
                for (std::size_t i = 0; i < rec.boxes3d.size(); ++i) {
                    if (rec.boxes3d[i].class_label != c) continue;
                    idx.push_back(i);
                    scored.push_back({rec.boxes3d[i].box, rec.boxes3d[i].score.value_or(1.0)});
                }
                for (auto k : nms_3d(scored, o->iou)) keep[idx[k]] = 1;
            }
            std::vector<Box3Record> kept;
            for (std::size_t i = 0; i < keep.size(); ++i) {
                if (keep[i]) kept.push_back(rec.boxes3d[i]);
            }
            rec.boxes3d = std::move(kept);
        }
        write_json(o->out, recordings_to_json(recs));
    });
}

void add_bench(CLI::App& app)
{
    struct Opts {
        int cells = 48;
        int bin_px = defaults::kBinPx;
        int channels = 16;
        int repeats = 3;
        std::uint64_t seed = defaults::kSeed;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = app.add_subcommand("bench", "Time weight construction and pooling kernels");
    cmd->add_option("--cells", o->cells, "Grid cells per axis")->check(CLI::PositiveNumber);
    cmd->add_option("--bin-px", o->bin_px, "Image pixels per feature bin")->check(CLI::PositiveNumber);
    cmd->add_option("--channels", o->channels, "Feature channels")->check(CLI::PositiveNumber);
    cmd->add_option("--repeats", o->repeats, "Timed repetitions per kernel (best is reported)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o->seed, "Random seed for the features");
    cmd->callback([o] {
        using Clock = std::chrono::steady_clock;
        auto best_ms = [&](auto&& fn) {
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < o->repeats; ++r) {
                const auto t0 = Clock::now();
                fn();
                best = std::min(best, std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
            }
            return best;
        };
        const auto geom = default_geometry();
        const auto grid = default_grid(geom, o->cells);
        SparseWeights w;
        const double t_weights = best_ms([&] { w = compute_weights(geom, grid, o->bin_px); });

        Rng rng(o->seed);
        std::vector<Tensor> maps;
        for (const auto& vw : w.views) {
            Tensor t({static_cast<std::size_t>(o->channels), vw.n_ybins, vw.n_xbins});
            for (auto& x : t.data()) x = uniform(rng, -1.0, 1.0);
            maps.push_back(std::move(t));
        }
        const auto mask = ViewMask::all(w.view_count());
        FeatureVolume avg;
        MaxPoolResult mx;
        const double t_avg = best_ms([&] { avg = pool_avg(w, maps, mask); });
        const double t_avg_b = best_ms([&] { (void)pool_avg_backward(w, avg.data, mask); });
        const double t_max = best_ms([&] { mx = pool_max(w, maps, mask); });
        const double t_max_b = best_ms([&] { (void)pool_max_backward(w, mx.argmax, mx.volume.data, mask); });

        std::size_t nnz = 0;
        for (const auto& v : w.views) nnz += v.xsec.size();
        Json j;
        j["grid"] = grid.dims;
        j["bin_px"] = o->bin_px;
        j["channels"] = o->channels;
        j["threads"] = thread_count();
        j["xsec_entries"] = nnz;
        j["ms"] = {{"compute_weights", t_weights},  {"pool_avg", t_avg}, {"pool_avg_backward", t_avg_b},
                   {"pool_max", t_max},             {"pool_max_backward", t_max_b}};
        std::cout << j.dump(2) << '\n';
    });
}

}  // namespace mvx::cli
