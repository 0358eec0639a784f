#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "mvxray/binary_io.hpp"
#include "mvxray/errors.hpp"
#include "mvxray/parallel.hpp"
#include "mvxray/pooling.hpp"

namespace mvx {

namespace {

struct Beam {
    std::array<Point2, 3> tri;  // counter-clockwise
};

bool inside_triangle(const std::array<Point2, 3>& t, Point2 p)
{
    for (int i = 0; i < 3; ++i) {
        if (cross(t[(i + 1) % 3] - t[i], p - t[i]) < 0) return false;
    }
    return true;
}

std::vector<Beam> view_beams(const ViewGeometry& view, int bin_px, std::uint32_t n_xbins)
{
    std::vector<Beam> beams(n_xbins);
    for (std::uint32_t b = 0; b < n_xbins; ++b) {
        const double lo = static_cast<double>(b) * bin_px;
        const double hi = std::min<double>(lo + bin_px, view.image_width_px);
        const ConvexPolygon tri = beam_triangle(view, lo, hi);
        const auto& v = tri.vertices();
        beams[b].tri = {v[0], v[1], v[2]};
    }
    return beams;
}

// Beam columns that can intersect `cell`, from the detector footprint of its
// corners. Falls back to all columns if a corner ray cannot reach the
// detector line.
std::pair<std::uint32_t, std::uint32_t> candidate_range(const ViewGeometry& view, const Rect& cell,
                                                        int bin_px, std::uint32_t n_xbins)
{
    const Point2 corners[4] = {cell.min, {cell.max.x, cell.min.y}, cell.max, {cell.min.x, cell.max.y}};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& c : corners) {
        double x = 0.0;
        if (!project_to_detector_line(view, c, x)) return {0, n_xbins};
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    const double w = view.image_width_px;
    if (hi < 0.0 || lo > w) return {0, 0};
    const auto first = static_cast<long>(std::floor(lo / bin_px)) - 1;
    const auto last = static_cast<long>(std::floor(hi / bin_px)) + 1;
    const auto b0 = static_cast<std::uint32_t>(std::clamp<long>(first, 0, n_xbins));
    const auto b1 = static_cast<std::uint32_t>(std::clamp<long>(last + 1, 0, n_xbins));
    return {b0, b1};
}

ViewWeights view_weights(const ScannerGeometry& geom, const ViewGeometry& view,
                         const VoxelGrid& grid, int bin_px, const WeightOptions& opts)
{
    ViewWeights vw;
    vw.n_xbins = feature_columns(view, bin_px);
    vw.n_ybins = feature_rows(geom, grid, bin_px);
    const auto beams = view_beams(view, bin_px, vw.n_xbins);

    const int nx = grid.dims[0];
    const int ny = grid.dims[1];
    const int ncols = nx * ny;
    std::vector<std::vector<XsecEntry>> per_cell(ncols);

#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
    for (int c = 0; c < ncols; ++c) {
        const int ix = c / ny;
        const int iy = c % ny;
        const Rect cell = grid.cell_rect(ix, iy);
        const double cell_area = cell.area();
        auto& out = per_cell[c];
        const auto [b0, b1] = candidate_range(view, cell, bin_px, vw.n_xbins);
        const Point2 corners[4] = {cell.min, {cell.max.x, cell.min.y}, cell.max,
                                   {cell.min.x, cell.max.y}};
        for (std::uint32_t b = b0; b < b1; ++b) {
            const auto& tri = beams[b].tri;
            const bool contained = std::all_of(std::begin(corners), std::end(corners),
                                               [&](Point2 p) { return inside_triangle(tri, p); });
            if (contained) {
                out.assign(1, {b, static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy), 1.0});
                break;
            }
            const double w = std::min(1.0, clipped_area(tri, cell) / cell_area);
            if (w >= kWeightEpsilon) {
                out.push_back({b, static_cast<std::uint32_t>(ix), static_cast<std::uint32_t>(iy), w});
            }
        }
        if (opts.renormalize_partial && !out.empty()) {
            double s = 0.0;
            for (const auto& e : out) s += e.w;
            for (auto& e : out) e.w /= s;
        }
    }

    std::size_t total = 0;
    for (const auto& v : per_cell) total += v.size();
    vw.xsec.reserve(total);
    for (const auto& v : per_cell) vw.xsec.insert(vw.xsec.end(), v.begin(), v.end());

    // Belt axis: feature row j spans z in [j, j + 1) * row_mm.
    const double row_mm = bin_px * geom.belt_mm_per_px;
    const double cz = grid.cell_size[2];
    for (int iz = 0; iz < grid.dims[2]; ++iz) {
        const double z0 = grid.cell_lo(2, iz);
        const double z1 = z0 + cz;
        std::vector<ZEntry> layer;
        const auto j0 = static_cast<long>(std::floor(z0 / row_mm));
        const auto j1 = static_cast<long>(std::ceil(z1 / row_mm));
        for (long j = std::max(0L, j0); j < std::min<long>(j1, vw.n_ybins); ++j) {
            const double r0 = j * row_mm;
            const double ov = std::min(z1, r0 + row_mm) - std::max(z0, r0);
            const double w = std::min(1.0, ov / cz);
            if (w >= kWeightEpsilon) {
                layer.push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(iz), w});
            }
        }
        if (opts.renormalize_partial && !layer.empty()) {
            double s = 0.0;
            for (const auto& e : layer) s += e.w;
            for (auto& e : layer) e.w /= s;
        }
        vw.zmap.insert(vw.zmap.end(), layer.begin(), layer.end());
    }
    return vw;
}

}  // namespace

std::uint32_t feature_columns(const ViewGeometry& view, int bin_px)
{
    return static_cast<std::uint32_t>((view.image_width_px + bin_px - 1) / bin_px);
}

std::uint32_t feature_rows(const ScannerGeometry& geom, const VoxelGrid& grid, int bin_px)
{
    const double row_mm = bin_px * geom.belt_mm_per_px;
    const double rows = grid.hi(2) / row_mm;
    // Tolerate round-off when the grid ends exactly on a row boundary.
    return static_cast<std::uint32_t>(std::max(1.0, std::ceil(rows - 1e-9)));
}

SparseWeights compute_weights(const ScannerGeometry& geom, const VoxelGrid& grid, int bin_px,
                              const WeightOptions& opts)
{
    if (bin_px < 1) throw DomainError("bin_px must be >= 1");
    geom.validate();
    grid.validate_against(geom);

    SparseWeights sw;
    sw.grid = grid;
    sw.bin_px = bin_px;
    sw.views.reserve(geom.view_count());
    for (const auto& view : geom.views) {
        sw.views.push_back(view_weights(geom, view, grid, bin_px, opts));
    }
    sw.build_index();
    return sw;
}

void SparseWeights::build_index()
{
    const int nx = grid.dims[0];
    const int ny = grid.dims[1];
    const int nz = grid.dims[2];
    for (auto& v : views) {
        std::sort(v.xsec.begin(), v.xsec.end(), [](const XsecEntry& a, const XsecEntry& b) {
            return std::tie(a.ix, a.iy, a.beam) < std::tie(b.ix, b.iy, b.beam);
        });
        std::sort(v.zmap.begin(), v.zmap.end(), [](const ZEntry& a, const ZEntry& b) {
            return std::tie(a.iz, a.ybin) < std::tie(b.iz, b.ybin);
        });
        v.xsec_offsets.assign(static_cast<std::size_t>(nx) * ny + 1, 0);
        for (const auto& e : v.xsec) {
            if (e.ix >= static_cast<std::uint32_t>(nx) || e.iy >= static_cast<std::uint32_t>(ny) ||
                e.beam >= v.n_xbins) {
                throw FormatError("cross-section entry out of range");
            }
            ++v.xsec_offsets[e.ix * ny + e.iy + 1];
        }
        for (std::size_t i = 1; i < v.xsec_offsets.size(); ++i) {
            v.xsec_offsets[i] += v.xsec_offsets[i - 1];
        }
        v.z_offsets.assign(static_cast<std::size_t>(nz) + 1, 0);
        for (const auto& e : v.zmap) {
            if (e.iz >= static_cast<std::uint32_t>(nz) || e.ybin >= v.n_ybins) {
                throw FormatError("belt-axis entry out of range");
            }
            ++v.z_offsets[e.iz + 1];
        }
        for (std::size_t i = 1; i < v.z_offsets.size(); ++i) v.z_offsets[i] += v.z_offsets[i - 1];
    }
}

double SparseWeights::weight(std::size_t view, std::uint32_t ybin, std::uint32_t beam, int ix,
                             int iy, int iz) const
{
    const auto& v = views.at(view);
    const std::size_t col = static_cast<std::size_t>(ix) * grid.dims[1] + iy;
    double wxy = 0.0;
    for (auto k = v.xsec_offsets[col]; k < v.xsec_offsets[col + 1]; ++k) {
        if (v.xsec[k].beam == beam) {
            wxy = v.xsec[k].w;
            break;
        }
    }
    if (wxy == 0.0) return 0.0;
    for (auto k = v.z_offsets[iz]; k < v.z_offsets[iz + 1]; ++k) {
        if (v.zmap[k].ybin == ybin) return wxy * v.zmap[k].w;
    }
    return 0.0;
}

void write_weights(std::ostream& os, const SparseWeights& w)
{
    using detail::put_f64;
    using detail::put_le;
    os.write("MXW1", 4);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(w.views.size()));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(w.bin_px));
    for (int a = 0; a < 3; ++a) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(w.grid.dims[a]));
    for (int a = 0; a < 3; ++a) put_f64(os, w.grid.origin[a]);
    for (int a = 0; a < 3; ++a) put_f64(os, w.grid.cell_size[a]);
    for (const auto& v : w.views) {
        put_le<std::uint32_t>(os, v.n_xbins);
        put_le<std::uint32_t>(os, v.n_ybins);
        put_le<std::uint32_t>(os, static_cast<std::uint32_t>(v.xsec.size()));
        for (const auto& e : v.xsec) put_le(os, e.beam);
        for (const auto& e : v.xsec) put_le(os, e.ix);
        for (const auto& e : v.xsec) put_le(os, e.iy);
        for (const auto& e : v.xsec) put_f64(os, e.w);
        put_le<std::uint32_t>(os, static_cast<std::uint32_t>(v.zmap.size()));
        for (const auto& e : v.zmap) put_le(os, e.ybin);
        for (const auto& e : v.zmap) put_le(os, e.iz);
        for (const auto& e : v.zmap) put_f64(os, e.w);
    }
    if (!os) throw Error("failed writing weights");
}

SparseWeights read_weights(std::istream& is)
{
    using detail::get_f64;
    using U32 = std::uint32_t;
    detail::expect_magic(is, "MXW1");
    SparseWeights w;
    const U32 n_views = detail::get_le<U32>(is);
    w.bin_px = static_cast<int>(detail::get_le<U32>(is));
    for (int a = 0; a < 3; ++a) w.grid.dims[a] = static_cast<int>(detail::get_le<U32>(is));
    w.grid.origin = {get_f64(is), get_f64(is), get_f64(is)};
    for (int a = 0; a < 3; ++a) w.grid.cell_size[a] = get_f64(is);
    w.grid.validate();
    w.views.resize(n_views);
    for (auto& v : w.views) {
        v.n_xbins = detail::get_le<U32>(is);
        v.n_ybins = detail::get_le<U32>(is);
        v.xsec.resize(detail::get_le<U32>(is));
        for (auto& e : v.xsec) e.beam = detail::get_le<U32>(is);
        for (auto& e : v.xsec) e.ix = detail::get_le<U32>(is);
        for (auto& e : v.xsec) e.iy = detail::get_le<U32>(is);
        for (auto& e : v.xsec) e.w = get_f64(is);
        v.zmap.resize(detail::get_le<U32>(is));
        for (auto& e : v.zmap) e.ybin = detail::get_le<U32>(is);
        for (auto& e : v.zmap) e.iz = detail::get_le<U32>(is);
        for (auto& e : v.zmap) e.w = get_f64(is);
    }
    w.build_index();
    return w;
}

void save_weights(const std::filesystem::path& path, const SparseWeights& w)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_weights(os, w);
}

SparseWeights load_weights(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return read_weights(is);
}

}  // namespace mvx
