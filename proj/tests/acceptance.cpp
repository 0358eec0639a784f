// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
// Usage: acceptance <path-to-mvxray-cli> [work-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mvxray/anchors.hpp"
#include "mvxray/annotate3d.hpp"
#include "mvxray/boxes.hpp"
#include "mvxray/defaults.hpp"
#include "mvxray/eval.hpp"
#include "mvxray/io.hpp"
#include "mvxray/pooling.hpp"
#include "mvxray/random.hpp"
#include "mvxray/synth.hpp"
#include "oracles.hpp"

using namespace mvx;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failures of one criterion; only the first few are reported.
class Checker {
public:
    void expect(bool ok, const std::string& what)
    {
        if (ok) return;
        ++failures_;
        if (failures_ <= 3) notes_.push_back(what);
    }
    void note(const std::string& s) { info_.push_back(s); }
    bool ok() const { return failures_ == 0; }

    Outcome outcome(double seconds, double budget) const
    {
        Outcome o;
        std::ostringstream os;
        for (const auto& s : info_) os << s << "; ";
        os << std::fixed << std::setprecision(2) << seconds << " s";
        if (budget > 0) os << " (budget " << budget << " s)";
        if (failures_ > 0) {
            os << "; " << failures_ << " failed checks";
            for (const auto& n : notes_) os << "; " << n;
        }
        o.pass = failures_ == 0 && (budget <= 0 || seconds < budget);
        o.detail = os.str();
        return o;
    }

private:
    int failures_ = 0;
    std::vector<std::string> notes_;
    std::vector<std::string> info_;
};

std::string fmt(double x, int prec = 6)
{
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

double max_abs_diff(const Tensor& a, const Tensor& b)
{
    if (a.dims() != b.dims()) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------- 1

void threshold_conversion(Checker& c)
{
    const double t3 = convert_threshold_2d_to_3d(0.5);
    c.note("t3(0.5) = " + fmt(t3, 9));
    c.expect(std::abs(t3 - 0.374) <= 5e-4, "t3(0.5) off by " + fmt(std::abs(t3 - 0.374)));
}

// ---------------------------------------------------------------- 2

// Per-point beam lookup by intersecting the ray source -> p with the
// detector line: p lies in the fan when the hit parameter u is in [0, 1] and
// the detector is at or beyond p along the ray.
struct FastBeam {
    Point2 s;
    Point2 p0;
    Point2 d;
    double s_p0_x_d;  // cross(p0 - s, d)
    double px_per_unit;
    int bin_px;
    int n;

    explicit FastBeam(const ViewGeometry& v, int bin)
        : s(v.source), p0(v.detector_p0), d(v.detector_p1 - v.detector_p0),
          s_p0_x_d(cross(v.detector_p0 - v.source, v.detector_p1 - v.detector_p0)),
          px_per_unit(v.image_width_px), bin_px(bin), n((v.image_width_px + bin - 1) / bin)
    {
    }

    int operator()(Point2 p) const
    {
        const Point2 r = p - s;
        const double den = cross(r, d);
        if (den == 0.0) return -1;
        const double t = s_p0_x_d / den;
        if (t < 1.0) return -1;
        const double u = cross(s - p0, r) / cross(d, r);
        if (u < 0.0 || u > 1.0) return -1;
        const int b = static_cast<int>(u * px_per_unit / bin_px);
        return std::min(b, n - 1);
    }
};

void weight_matrix(Checker& c)
{
    constexpr int kCells = 64;
    constexpr int kSamples = 20000;
    constexpr int kLayers = 4;
    const int bin_px = defaults::kBinPx;
    double worst = 0.0;
    double worst_sum = 0.0;
    std::size_t inside = 0;
    for (std::uint64_t seed : {101ULL, 202ULL, 303ULL}) {
        const auto geom = test::random_geometry(seed, true);
        const auto grid = test::tunnel_grid(geom, kCells, kCells, kLayers, 25.0);
        const auto w = compute_weights(geom, grid, bin_px);
        c.expect(w.view_count() == 4, "view count");
        Rng rng(seed);
        for (std::size_t v = 0; v < w.view_count(); ++v) {
            const auto& view = geom.views[v];
            const auto& vw = w.views[v];
            const FastBeam beam_of(view, bin_px);
            c.expect(static_cast<int>(vw.n_xbins) == beam_of.n, "beam count of view " + std::to_string(v));

            std::vector<double> dense(static_cast<std::size_t>(kCells) * kCells * vw.n_xbins, 0.0);
            for (const auto& e : vw.xsec) {
                dense[(static_cast<std::size_t>(e.ix) * kCells + e.iy) * vw.n_xbins + e.beam] += e.w;
            }
            std::vector<double> frac(vw.n_xbins);
            for (int ix = 0; ix < kCells; ++ix) {
                for (int iy = 0; iy < kCells; ++iy) {
                    const Rect cell = grid.cell_rect(ix, iy);
                    std::fill(frac.begin(), frac.end(), 0.0);
                    for (int k = 0; k < kSamples; ++k) {
                        const Point2 p{uniform(rng, cell.min.x, cell.max.x), uniform(rng, cell.min.y, cell.max.y)};
                        const int b = beam_of(p);
                        if (b >= 0) frac[b] += 1.0;
                    }
                    const double* row = &dense[(static_cast<std::size_t>(ix) * kCells + iy) * vw.n_xbins];
                    double sum = 0.0;
                    for (std::size_t b = 0; b < vw.n_xbins; ++b) {
                        const double err = std::abs(row[b] - frac[b] / kSamples);
                        worst = std::max(worst, err);
                        c.expect(err <= 0.02, "seed " + std::to_string(seed) + " view " + std::to_string(v) +
                                                  " cell (" + std::to_string(ix) + "," + std::to_string(iy) +
                                                  ") beam " + std::to_string(b) + " err " + fmt(err));
                        sum += row[b];
                    }
                    if (test::cell_strictly_inside_fan(view, cell)) {
                        ++inside;
                        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
                        c.expect(std::abs(sum - 1.0) <= 1e-9, "partition sum " + fmt(sum, 17));
                    }
                }
            }

            // Belt-axis weights against interval overlap.
            const double mm_per_bin = geom.belt_mm_per_px * bin_px;
            std::map<std::pair<std::uint32_t, std::uint32_t>, double> zw;
            for (const auto& e : vw.zmap) zw[{e.iz, e.ybin}] += e.w;
            for (int iz = 0; iz < kLayers; ++iz) {
                const double lo = grid.cell_lo(2, iz);
                const double hi = grid.cell_lo(2, iz + 1);
                for (std::uint32_t y = 0; y < vw.n_ybins; ++y) {
                    const double overlap = std::max(0.0, std::min(hi, (y + 1) * mm_per_bin) - std::max(lo, y * mm_per_bin));
                    const auto it = zw.find({static_cast<std::uint32_t>(iz), y});
                    const double got = it == zw.end() ? 0.0 : it->second;
                    c.expect(std::abs(got - overlap / (hi - lo)) <= 1e-12, "belt weight layer " + std::to_string(iz));
                }
            }
        }
    }
    c.note("max |w - MC| = " + fmt(worst, 4));
    c.note(std::to_string(inside) + " inside cells, max |sum - 1| = " + fmt(worst_sum, 3));
    c.expect(inside > 0, "no cell strictly inside a fan");
}

// ---------------------------------------------------------------- 3

struct PoolInstance {
    ScannerGeometry geom;
    SparseWeights weights;
    std::vector<Tensor> maps;
};

PoolInstance pool_instance(std::uint64_t seed, std::size_t channels)
{
    PoolInstance in;
    in.geom = test::random_geometry(seed, true);
    in.weights = compute_weights(in.geom, test::tunnel_grid(in.geom, 6, 5, 3, 30.0), 32);
    Rng rng(seed + 1000);
    for (const auto& vw : in.weights.views) {
        in.maps.push_back(test::random_tensor({channels, vw.n_ybins, vw.n_xbins}, rng));
    }
    return in;
}

void pooling(Checker& c)
{
    double worst_dense = 0.0;
    double worst_adj = 0.0;
    double worst_fd = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto in = pool_instance(500 + seed, 1 + seed % 3);
        std::vector<bool> active(4, true);
        if (seed % 4 == 1) active[seed % 3] = false;
        const ViewMask mask{active};
        const std::string tag = "instance " + std::to_string(seed);

        const auto avg = pool_avg(in.weights, in.maps, mask);
        const double d = max_abs_diff(avg.data, test::dense_pool_avg(in.weights, in.maps, active));
        worst_dense = std::max(worst_dense, d);
        c.expect(d <= 1e-6, tag + " dense mismatch " + fmt(d));

        Rng rng(seed);
        const Tensor g = test::random_tensor(avg.data.dims(), rng);
        const auto grads = pool_avg_backward(in.weights, g, mask);
        double rhs = 0.0;
        for (std::size_t v = 0; v < 4; ++v) {
            if (active[v]) rhs += dot(in.maps[v], grads[v]);
        }
        const double adj = std::abs(dot(avg.data, g) - rhs);
        worst_adj = std::max(worst_adj, adj);
        c.expect(adj <= 1e-9, tag + " adjoint gap " + fmt(adj));

        if (seed < 4) {
            const double h = 1e-3;
            for (std::size_t v = 0; v < 4; ++v) {
                if (!active[v]) continue;
                for (std::size_t i = 0; i < in.maps[v].size(); i += 5) {
                    const double keep = in.maps[v][i];
                    in.maps[v][i] = keep + h;
                    const double up = dot(pool_avg(in.weights, in.maps, mask).data, g);
                    in.maps[v][i] = keep - h;
                    const double down = dot(pool_avg(in.weights, in.maps, mask).data, g);
                    in.maps[v][i] = keep;
                    const double fd = (up - down) / (2 * h);
                    const double rel = std::abs(fd - grads[v][i]) / std::max(std::abs(grads[v][i]), 1e-3);
                    worst_fd = std::max(worst_fd, rel);
                    c.expect(rel <= 1e-5, tag + " finite difference rel err " + fmt(rel));
                }
            }
        }

        const auto mx = pool_max(in.weights, in.maps, mask);
        const auto want = test::dense_pool_max(in.weights, in.maps, active);
        c.expect(mx.volume.data == want.out, tag + " max values differ");
        c.expect(mx.argmax.view == want.view && mx.argmax.beam == want.beam, tag + " argmax differs");

        // Backward routing through the dense matrices, exact.
        const auto gm = pool_max_backward(in.weights, mx.argmax, g, mask);
        const std::size_t ncells = in.weights.grid.cell_count();
        const std::size_t channels = g.dim(0);
        std::vector<std::vector<std::vector<double>>> dense(4);
        std::vector<Tensor> route;
        for (std::size_t v = 0; v < 4; ++v) {
            route.emplace_back(in.maps[v].dims());
            if (active[v]) dense[v] = test::densify(in.weights, v);
        }
        for (std::size_t ch = 0; ch < channels; ++ch) {
            for (std::size_t cell = 0; cell < ncells; ++cell) {
                const auto v = want.view[ch * ncells + cell];
                if (v < 0) continue;
                const auto b = static_cast<std::size_t>(want.beam[ch * ncells + cell]);
                const std::size_t plane = dense[v][cell].size();
                route[v][ch * plane + b] += dense[v][cell][b] * g[ch * ncells + cell];
            }
        }
        for (std::size_t v = 0; v < 4; ++v) {
            if (!active[v]) continue;
            c.expect(gm[v] == route[v], tag + " max backward differs in view " + std::to_string(v));
        }
    }
    c.note("dense " + fmt(worst_dense, 3) + ", adjoint " + fmt(worst_adj, 3) + ", fd rel " + fmt(worst_fd, 3));
}

// ---------------------------------------------------------------- 4

void constant_field(Checker& c)
{
    const auto geom = default_geometry();
    const auto grid = default_grid(geom, 32);
    const int bin_px = defaults::kBinPx;
    const auto w = compute_weights(geom, grid, bin_px);
    const std::vector<double> value{0.75, -2.5, 13.0};
    std::vector<Tensor> maps;
    for (const auto& vw : w.views) {
        Tensor t({value.size(), vw.n_ybins, vw.n_xbins});
        const std::size_t plane = static_cast<std::size_t>(vw.n_ybins) * vw.n_xbins;
        for (std::size_t ch = 0; ch < value.size(); ++ch) {
            std::fill_n(t.data().begin() + ch * plane, plane, value[ch]);
        }
        maps.push_back(std::move(t));
    }
    const auto out = pool_avg(w, maps, ViewMask::all(w.view_count()));

    const std::size_t ncells = grid.cell_count();
    std::size_t covered = 0;
    double worst = 0.0;
    for (int ix = 0; ix < grid.dims[0]; ++ix) {
        for (int iy = 0; iy < grid.dims[1]; ++iy) {
            const Rect cell = grid.cell_rect(ix, iy);
            bool full = true;
            for (const auto& v : geom.views) full = full && test::cell_strictly_inside_fan(v, cell);
            if (!full) continue;
            for (int iz = 0; iz < grid.dims[2]; ++iz) {
                bool z_full = true;
                for (const auto& vw : w.views) {
                    z_full = z_full && grid.cell_lo(2, iz + 1) <= vw.n_ybins * bin_px * geom.belt_mm_per_px;
                }
                if (!z_full) continue;
                ++covered;
                const std::size_t idx = (static_cast<std::size_t>(ix) * grid.dims[1] + iy) * grid.dims[2] + iz;
                for (std::size_t ch = 0; ch < value.size(); ++ch) {
                    const double err = std::abs(out.data[ch * ncells + idx] - value[ch]);
                    worst = std::max(worst, err);
                    c.expect(err <= 1e-9, "cell error " + fmt(err));
                }
            }
        }
    }
    c.note(std::to_string(covered) + " fully covered cells, max err " + fmt(worst, 3));
    c.expect(covered > 0, "no fully covered cells");
}

// ---------------------------------------------------------------- 5

void annotation_lifting(Checker& c)
{
    const auto geom = default_geometry();
    const auto grid = default_grid(geom, defaults::kGridDim);
    std::vector<double> ious;
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SceneSpec spec;
        spec.n_objects = 1;
        spec.seed = seed;
        const auto rec = gen_recording(geom, grid, spec);
        const Box3& truth = rec.objects[0].box;
        std::vector<ViewAnnotation> anns;
        for (std::size_t v = 0; v < geom.view_count(); ++v) {
            anns.push_back({static_cast<int>(v), rec.gt2d[v][0], rec.objects[0].class_label});
        }
        const Box3 lifted = gen_box3(geom, anns);
        const double tol = 1e-9;
        const bool contains = lifted.lo(0) <= truth.lo(0) + tol && lifted.lo(1) <= truth.lo(1) + tol &&
                              lifted.hi(0) >= truth.hi(0) - tol && lifted.hi(1) >= truth.hi(1) - tol;
        violations += !contains;
        ious.push_back(test::reference_iou3(lifted, truth));
    }
    std::sort(ious.begin(), ious.end());
    const double median = 0.5 * (ious[49] + ious[50]);
    c.note("containment violations " + std::to_string(violations) + ", median IoU " + fmt(median, 4));
    c.expect(violations == 0, "containment violated");
    c.expect(median >= 0.7, "median IoU below 0.7");
}

// ---------------------------------------------------------------- 6

struct EvalInstance {
    std::vector<Detection<Box2>> dets;
    std::vector<GroundTruth<Box2>> gts;
};

EvalInstance eval_instance(Rng& rng)
{
    static const char* classes[] = {"weapon", "glassbottle"};
    static const char* units[] = {"r0/0", "r0/3", "r1/0"};
    EvalInstance in;
    const int n_gt = static_cast<int>(uniform01(rng) * 11);
    const int n_det = static_cast<int>(uniform01(rng) * 21);
    for (int i = 0; i < n_gt; ++i) {
        in.gts.push_back({{uniform(rng, 0, 40), uniform(rng, 0, 40), uniform(rng, 5, 20), uniform(rng, 5, 20)},
                          classes[i % 2],
                          units[static_cast<int>(uniform01(rng) * 3)]});
    }
    for (int i = 0; i < n_det; ++i) {
        Detection<Box2> d;
        if (!in.gts.empty() && uniform01(rng) < 0.7) {
            const auto& g = in.gts[static_cast<std::size_t>(uniform01(rng) * in.gts.size())];
            d.box = {g.box.cx + uniform(rng, -3, 3), g.box.cy + uniform(rng, -3, 3), g.box.w * uniform(rng, 0.8, 1.2),
                     g.box.h * uniform(rng, 0.8, 1.2)};
            d.class_label = uniform01(rng) < 0.9 ? g.class_label : classes[i % 2];
            d.unit_id = uniform01(rng) < 0.9 ? g.unit_id : units[i % 3];
        } else {
            d.box = {uniform(rng, 0, 40), uniform(rng, 0, 40), uniform(rng, 5, 20), uniform(rng, 5, 20)};
            d.class_label = classes[i % 2];
            d.unit_id = units[i % 3];
        }
        d.confidence = std::round(uniform01(rng) * 8) / 8;
        in.dets.push_back(d);
    }
    return in;
}

void evaluation(Checker& c)
{
    using L = MatchLabel;
    const std::vector<L> worked{L::kTruePositive, L::kFalsePositive, L::kTruePositive};
    const double ap = average_precision(worked, 2);
    c.note("[TP,FP,TP] n_gt=2 AP = " + fmt(ap, 17));
    c.expect(ap == 5.0 / 6.0, "worked example AP");

    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto in = eval_instance(rng);
        std::set<std::string> classes;
        for (const auto& g : in.gts) classes.insert(g.class_label);
        std::map<std::string, double> want;
        double sum = 0.0;
        for (const auto& cls : classes) {
            std::vector<Detection<Box2>> d;
            std::vector<GroundTruth<Box2>> g;
            for (const auto& x : in.dets) {
                if (x.class_label == cls) d.push_back(x);
            }
            for (const auto& x : in.gts) {
                if (x.class_label == cls) g.push_back(x);
            }
            want[cls] = test::reference_ap(test::brute_force_labels_2d(d, g, 0.5), g.size());
            sum += want[cls];
        }
        const double map = classes.empty() ? 0.0 : sum / static_cast<double>(classes.size());
        const auto report = evaluate_run<Box2>(in.dets, in.gts, EvalConfig::for_dims(Dimensionality::k2D));
        worst = std::max(worst, std::abs(report.mean_ap - map));
        c.expect(std::abs(report.mean_ap - map) <= 1e-9, "trial " + std::to_string(trial) + " mAP");
        c.expect(report.classes.size() == want.size(), "trial " + std::to_string(trial) + " class count");
        for (const auto& cr : report.classes) {
            c.expect(want.count(cr.class_label) && std::abs(cr.ap - want[cr.class_label]) <= 1e-9,
                     "trial " + std::to_string(trial) + " class " + cr.class_label);
        }
    }
    c.note("max mAP diff " + fmt(worst, 3));
}

// ---------------------------------------------------------------- 7

Size3 random_size(Rng& rng, double lo = 10, double hi = 200)
{
    return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

Box3 random_gt(Rng& rng)
{
    return {{uniform(rng, -100, 100), uniform(rng, 0, 200), uniform(rng, 0, 300)}, random_size(rng)};
}

double brute_centered(const AnchorSet& anchors, const std::vector<Box3>& gts)
{
    double sum = 0.0;
    for (const auto& gt : gts) {
        double best = 0.0;
        for (const auto& s : anchors.sizes) best = std::max(best, test::reference_iou3({gt.center, s}, gt));
        sum += best;
    }
    return sum / static_cast<double>(gts.size());
}

double brute_grid(const AnchorSet& anchors, const std::vector<Box3>& gts, const VoxelGrid& grid,
                  const Vec3& stride)
{
    double sum = 0.0;
    for (const auto& gt : gts) {
        Point3 c;
        for (int a = 0; a < 3; ++a) {
            const double lo = grid.origin[a];
            const double extent = grid.dims[a] * grid.cell_size[a];
            double best_pos = lo + 0.5 * stride[a];
            for (int k = 0; (k + 1) * stride[a] <= extent + 1e-9; ++k) {
                const double pos = lo + (k + 0.5) * stride[a];
                if (std::abs(pos - gt.center[a]) < std::abs(best_pos - gt.center[a])) best_pos = pos;
            }
            (a == 0 ? c.x : a == 1 ? c.y : c.z) = best_pos;
        }
        double best = 0.0;
        for (const auto& s : anchors.sizes) best = std::max(best, test::reference_iou3({c, s}, gt));
        sum += best;
    }
    return sum / static_cast<double>(gts.size());
}

void anchor_clustering(Checker& c)
{
    Rng rng(77);
    std::vector<Size3> small;
    std::vector<Size3> large;
    for (int i = 0; i < 40; ++i) {
        small.push_back({uniform(rng, 9, 11), uniform(rng, 9, 11), uniform(rng, 9, 11)});
        large.push_back({uniform(rng, 190, 210), uniform(rng, 95, 105), uniform(rng, 140, 160)});
    }
    std::vector<Size3> all = small;
    all.insert(all.end(), large.begin(), large.end());
    std::shuffle(all.begin(), all.end(), rng);
    auto mean = [](const std::vector<Size3>& pts) {
        Size3 m{0, 0, 0};
        for (const auto& p : pts) {
            for (int a = 0; a < 3; ++a) m[a] += p[a];
        }
        for (auto& v : m) v /= static_cast<double>(pts.size());
        return m;
    };
    const Size3 ms = mean(small);
    const Size3 ml = mean(large);
    const auto r = kmeans_anchors(all, {.k = 2, .seed = 5});
    double recovery = std::numeric_limits<double>::infinity();
    if (r.anchors.sizes.size() == 2) {
        recovery = 0.0;
        for (int a = 0; a < 3; ++a) {
            recovery = std::max({recovery, std::abs(r.anchors.sizes[0][a] - ms[a]),
                                 std::abs(r.anchors.sizes[1][a] - ml[a])});
        }
    }
    c.note("planted recovery err " + fmt(recovery, 3));
    c.expect(recovery <= 1e-9, "planted clusters not recovered");

    VoxelGrid grid;
    grid.origin = {-120, -10, 0};
    grid.cell_size = {20, 20, 25};
    grid.dims = {12, 12, 14};
    std::vector<Box3> gts;
    for (int i = 0; i < 80; ++i) gts.push_back(random_gt(rng));
    int metric_checks = 0;
    for (const Vec3& s : {Vec3{20, 20, 25}, Vec3{40, 40, 50}, Vec3{7, 13, 31}}) {
        for (int trial = 0; trial < 20; ++trial) {
            AnchorSet set;
            for (int i = 0; i < 1 + trial % 6; ++i) set.sizes.push_back(random_size(rng));
            c.expect(avg_best_iou_centered(set, gts) == brute_centered(set, gts), "centered metric");
            c.expect(avg_best_iou_grid(set, gts, grid, s) == brute_grid(set, gts, grid, s), "grid metric");
            metric_checks += 2;
        }
    }

    int monotone_fail = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Box3> g;
        for (int i = 0; i < 30; ++i) g.push_back(random_gt(rng));
        AnchorSet set;
        for (int i = 0; i < 1 + trial % 5; ++i) set.sizes.push_back(random_size(rng));
        const Vec3 stride{20, 20, 25};
        const double c0 = avg_best_iou_centered(set, g);
        const double g0 = avg_best_iou_grid(set, g, grid, stride);
        set.sizes.push_back(random_size(rng));
        monotone_fail += avg_best_iou_centered(set, g) < c0 || avg_best_iou_grid(set, g, grid, stride) < g0;
    }
    c.note(std::to_string(metric_checks) + " metric comparisons, " + std::to_string(monotone_fail) +
           "/100 monotonicity failures");
    c.expect(monotone_fail == 0, "metric decreased after adding an anchor");
}

// ---------------------------------------------------------------- 8

void nms(Checker& c)
{
    Rng rng(88);
    int kept_total = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ScoredBox3> dets;
        const int n = 1 + static_cast<int>(uniform01(rng) * 40);
        for (int i = 0; i < n; ++i) {
            const Box3 b{{uniform(rng, -4, 4), uniform(rng, -4, 4), uniform(rng, -4, 4)},
                         {uniform(rng, 0.5, 8), uniform(rng, 0.5, 8), uniform(rng, 0.5, 8)}};
            // Coarse scores so that ties occur.
            dets.push_back({b, std::round(uniform01(rng) * 20) / 20});
        }
        const double thr = uniform(rng, 0.1, 0.7);
        const auto got = nms_3d(dets, thr);
        kept_total += static_cast<int>(got.size());
        c.expect(got == test::reference_nms(dets, thr), "set " + std::to_string(trial));
    }
    c.note(std::to_string(kept_total) + " boxes kept over 100 sets");
}

// ---------------------------------------------------------------- 9

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

void run(Checker& c, const std::string& cmd)
{
    const int rc = std::system(cmd.c_str());
    c.expect(rc == 0, "command failed (" + std::to_string(rc) + "): " + cmd);
}

std::map<std::string, std::string> snapshot(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream is(e.path(), std::ios::binary);
        std::ostringstream os;
        os << is.rdbuf();
        files[fs::relative(e.path(), root).string()] = os.str();
    }
    return files;
}

void pipeline_once(Checker& c, const std::string& cli, const fs::path& dir)
{
    const std::string exe = quote(cli);
    const auto q = [&](const std::string& name) { return quote(dir / name); };
    fs::remove_all(dir);
    run(c, exe + " synth-gen --out " + quote(dir) + " --cells 48 --recordings 3 --objects 3 --seed 11");
    run(c, exe + " compute-weights --geometry " + q("geometry.json") + " --grid " + q("grid.json") + " --out " +
               q("weights.mxw") + " 2> /dev/null");
    for (const char* rec : {"rec0000", "rec0001", "rec0002"}) {
        std::string maps;
        for (int v = 0; v < 4; ++v) maps += " " + quote(dir / rec / ("features_" + std::to_string(v) + ".mxt"));
        run(c, exe + " pool --weights " + q("weights.mxw") + " --maps" + maps + " --out " +
                   quote(dir / rec / "volume.mxt"));
    }
    run(c, exe + " gen3d --geometry " + q("geometry.json") + " --input " + q("annotations.json") + " --out " +
               q("lifted.json"));
    run(c, exe + " reproject --geometry " + q("geometry.json") + " --input " + q("lifted.json") + " --out " +
               q("reprojected.json"));
    for (const char* d : {"2d", "3d"}) {
        run(c, exe + " eval --dims " + d + " --detections " + q("annotations.json") + " --annotations " +
                   q("annotations.json") + " --report " + q(std::string("eval_") + d + ".json") + " --pr-csv " +
                   q(std::string("pr_") + d + ".csv") + " > " + q(std::string("eval_") + d + ".stdout"));
    }
}

void end_to_end(Checker& c, const std::string& cli, const fs::path& work)
{
    if (cli.empty()) {
        c.expect(false, "no CLI path given");
        return;
    }
    const fs::path a = work / "run_a";
    const fs::path b = work / "run_b";
    pipeline_once(c, cli, a);
    pipeline_once(c, cli, b);
    if (!c.ok()) return;

    for (const char* d : {"2d", "3d"}) {
        const double m = read_json_file(a / (std::string("eval_") + d + ".json")).at("mean_ap").get<double>();
        c.note(std::string("mAP ") + d + " = " + fmt(m));
        c.expect(m == 1.0, std::string("mAP ") + d + " is not 1");
    }
    const auto fa = snapshot(a);
    const auto fb = snapshot(b);
    c.note(std::to_string(fa.size()) + " output files");
    c.expect(fa.size() == fb.size(), "different file sets");
    for (const auto& [name, bytes] : fa) {
        const auto it = fb.find(name);
        c.expect(it != fb.end() && it->second == bytes, name + " differs between runs");
    }
    fs::remove_all(work);
}

}  // namespace

int main(int argc, char** argv)
{
    const std::string cli = argc > 1 ? argv[1] : "";
    const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "mvxray_acceptance";

    struct Criterion {
        int id;
        std::string name;
        double budget;
        std::function<void(Checker&)> body;
    };
    const std::vector<Criterion> criteria{
        {1, "threshold conversion", 0, threshold_conversion},
        {2, "weight matrix vs Monte Carlo", 60, weight_matrix},
        {3, "pooling vs dense oracles", 30, pooling},
        {4, "constant field", 0, constant_field},
        {5, "annotation lifting", 30, annotation_lifting},
        {6, "evaluation vs brute force", 0, evaluation},
        {7, "anchor clustering and metrics", 0, anchor_clustering},
        {8, "NMS vs quadratic reference", 0, nms},
        {9, "end-to-end determinism", 120, [&](Checker& c) { end_to_end(c, cli, work); }},
    };

    int failed = 0;
    for (const auto& cr : criteria) {
        Checker c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cr.body(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const Outcome o = c.outcome(secs, cr.budget);
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << cr.id << " (" << cr.name << "): " << o.detail
                  << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
