#include "mvxray/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvxray/annotate3d.hpp"
#include "mvxray/errors.hpp"
#include "mvxray/parallel.hpp"
#include "mvxray/random.hpp"

namespace mvx {

ScannerGeometry default_geometry()
{
    ScannerGeometry g;
    g.tunnel = {{-400.0, 0.0}, {400.0, 500.0}};
    g.belt_mm_per_px = 1.5;
    g.views = {
        {"below_left", {-600.0, -900.0}, {-440.0, 650.0}, {1180.0, 650.0}, 1280},
        {"below_center", {0.0, -1100.0}, {-690.0, 650.0}, {690.0, 650.0}, 1280},
        {"below_right", {600.0, -900.0}, {-1180.0, 650.0}, {440.0, 650.0}, 1280},
        {"side", {1600.0, 250.0}, {-550.0, 740.0}, {-550.0, -240.0}, 1280},
    };
    return g;
}

VoxelGrid default_grid(const ScannerGeometry& geom, int cells)
{
    if (cells < 1) throw ConfigError("grid needs at least one cell per axis");
    VoxelGrid grid;
    const Rect& t = geom.tunnel;
    const double cx = t.width() / cells;
    const double cy = t.height() / cells;
    grid.origin = {t.min.x, t.min.y, 0.0};
    grid.cell_size = {cx, cy, 0.5 * (cx + cy)};
    grid.dims = {cells, cells, cells};
    return grid;
}

double chord_length(Point2 a, Point2 b, const Rect& r)
{
    double t0 = 0.0;
    double t1 = 1.0;
    const Point2 d = b - a;
    const double lo[2] = {r.min.x, r.min.y};
    const double hi[2] = {r.max.x, r.max.y};
    const double o[2] = {a.x, a.y};
    const double dir[2] = {d.x, d.y};
    for (int ax = 0; ax < 2; ++ax) {
        if (dir[ax] == 0.0) {
            if (o[ax] < lo[ax] || o[ax] > hi[ax]) return 0.0;
            continue;
        }
        double s0 = (lo[ax] - o[ax]) / dir[ax];
        double s1 = (hi[ax] - o[ax]) / dir[ax];
        if (s0 > s1) std::swap(s0, s1);
        t0 = std::max(t0, s0);
        t1 = std::min(t1, s1);
        if (t1 <= t0) return 0.0;
    }
    return (t1 - t0) * norm(d);
}

namespace {

bool overlaps(const Box3& a, const Box3& b)
{
    for (int ax = 0; ax < 3; ++ax) {
        if (a.hi(ax) <= b.lo(ax) || b.hi(ax) <= a.lo(ax)) return false;
    }
    return true;
}

const std::string& pick_class(const std::vector<ClassWeight>& classes, Rng& rng)
{
    double total = 0.0;
    for (const auto& c : classes) total += c.weight;
    const double r = uniform01(rng) * total;
    double run = 0.0;
    for (const auto& c : classes) {
        run += c.weight;
        if (r < run) return c.label;
    }
    return classes.back().label;
}

void validate_spec(const SceneSpec& spec)
{
    if (spec.n_objects < 0) throw ConfigError("n_objects must be >= 0");
    for (int a = 0; a < 3; ++a) {
        if (!(spec.size_min[a] > 0.0) || spec.size_max[a] < spec.size_min[a]) {
            throw ConfigError("object size range must be positive and ordered");
        }
    }
    if (spec.n_objects > 0) {
        if (spec.classes.empty()) throw ConfigError("scene needs at least one class");
        for (const auto& c : spec.classes) {
            if (!(c.weight > 0.0)) throw ConfigError("class weights must be positive");
        }
    }
    if (spec.density_max < spec.density_min) throw ConfigError("density range is reversed");
    if (spec.image_height_px < 0) throw ConfigError("image_height_px must be >= 0");
}

}  // namespace

Recording gen_recording(const ScannerGeometry& geom, const VoxelGrid& grid, const SceneSpec& spec)
{
    geom.validate();
    grid.validate_against(geom);
    validate_spec(spec);

    Recording rec;
    rec.recording_id = spec.recording_id;
    Rng rng(spec.seed);

    for (int n = 0; n < spec.n_objects; ++n) {
        bool placed = false;
        for (int attempt = 0; attempt < spec.max_attempts && !placed; ++attempt) {
            Box3 box;
            bool fits = true;
            for (int a = 0; a < 3; ++a) {
                box.size[a] = uniform(rng, spec.size_min[a], spec.size_max[a]);
                const double room = grid.hi(a) - grid.lo(a) - box.size[a];
                if (room < 0.0) {
                    fits = false;
                    break;
                }
                const double lo = grid.lo(a) + uniform01(rng) * room;
                if (a == 0) box.center.x = lo + 0.5 * box.size[a];
                if (a == 1) box.center.y = lo + 0.5 * box.size[a];
                if (a == 2) box.center.z = lo + 0.5 * box.size[a];
            }
            if (!fits) continue;
            if (std::any_of(rec.objects.begin(), rec.objects.end(),
                            [&](const SceneObject& o) { return overlaps(o.box, box); })) {
                continue;
            }
            SceneObject obj;
            obj.box = box;
            obj.class_label = pick_class(spec.classes, rng);
            obj.density = uniform(rng, spec.density_min, spec.density_max);
            rec.objects.push_back(std::move(obj));
            placed = true;
        }
        if (!placed) {
            throw GenerationError("could not place object " + std::to_string(n) + " after " +
                                  std::to_string(spec.max_attempts) + " attempts");
        }
    }

    const int rows = spec.image_height_px > 0
                         ? spec.image_height_px
                         : static_cast<int>(std::ceil(grid.hi(2) / geom.belt_mm_per_px - 1e-9));

    rec.images.reserve(geom.view_count());
    for (const auto& view : geom.views) {
        const int cols = view.image_width_px;
        Tensor img({1, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)});
        auto px = img.data();
#pragma omp parallel for schedule(static) num_threads(thread_count())
        for (int x = 0; x < cols; ++x) {
            const Point2 det = detector_point(view, x + 0.5);
            for (const auto& obj : rec.objects) {
                const Rect xs{{obj.box.lo(0), obj.box.lo(1)}, {obj.box.hi(0), obj.box.hi(1)}};
                const double chord = chord_length(view.source, det, xs);
                if (chord <= 0.0) continue;
                const double v = obj.density * chord;
                for (int y = 0; y < rows; ++y) {
                    const double z = (y + 0.5) * geom.belt_mm_per_px;
                    if (z >= obj.box.lo(2) && z < obj.box.hi(2)) {
                        px[static_cast<std::size_t>(y) * cols + x] += v;
                    }
                }
            }
        }
        rec.images.push_back(std::move(img));
    }

    rec.gt2d.assign(geom.view_count(), {});
    for (const auto& obj : rec.objects) {
        const auto boxes = reproject_box3(geom, obj.box);
        for (std::size_t v = 0; v < boxes.size(); ++v) rec.gt2d[v].push_back(boxes[v]);
    }
    return rec;
}

Tensor bin_average(const Tensor& image, int bin_px, std::size_t rows, std::size_t cols)
{
    if (image.rank() != 3) throw ShapeError("image must have shape [C, H, W]");
    if (bin_px < 1) throw DomainError("bin_px must be >= 1");
    const std::size_t c = image.dim(0);
    const std::size_t h = image.dim(1);
    const std::size_t w = image.dim(2);
    Tensor out({c, rows, cols});
    const auto b = static_cast<std::size_t>(bin_px);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t y0 = r * b;
            const std::size_t y1 = std::min(h, y0 + b);
            for (std::size_t q = 0; q < cols; ++q) {
                const std::size_t x0 = q * b;
                const std::size_t x1 = std::min(w, x0 + b);
                if (y0 >= y1 || x0 >= x1) continue;
                double s = 0.0;
                for (std::size_t y = y0; y < y1; ++y) {
                    for (std::size_t x = x0; x < x1; ++x) s += image[(ch * h + y) * w + x];
                }
                out[(ch * rows + r) * cols + q] = s / static_cast<double>((y1 - y0) * (x1 - x0));
            }
        }
    }
    return out;
}

}  // namespace mvx
