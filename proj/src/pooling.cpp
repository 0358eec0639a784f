#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mvxray/errors.hpp"
#include "mvxray/parallel.hpp"
#include "mvxray/pooling.hpp"

namespace mvx {

namespace {

std::string shape_str(const std::vector<std::size_t>& d)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < d.size(); ++i) os << (i ? "," : "") << d[i];
    os << ']';
    return os.str();
}

// Validates mask and maps; returns the shared channel count.
std::size_t check_maps(const SparseWeights& w, std::span<const Tensor> maps, const ViewMask& mask)
{
    mask.validate(w.view_count());
    if (maps.size() != w.view_count()) {
        throw ShapeError("expected " + std::to_string(w.view_count()) + " feature maps, got " +
                         std::to_string(maps.size()));
    }
    std::size_t channels = 0;
    for (std::size_t v = 0; v < maps.size(); ++v) {
        if (!mask.active[v]) continue;
        const auto& m = maps[v];
        const auto& vw = w.views[v];
        if (m.rank() != 3 || m.dim(1) != vw.n_ybins || m.dim(2) != vw.n_xbins || m.dim(0) == 0) {
            throw ShapeError("feature map of view " + std::to_string(v) + " has shape " +
                             shape_str(m.dims()) + ", expected [C," + std::to_string(vw.n_ybins) +
                             "," + std::to_string(vw.n_xbins) + "]");
        }
        if (channels == 0) channels = m.dim(0);
        if (m.dim(0) != channels) throw ShapeError("feature maps disagree on channel count");
    }
    return channels;
}

std::vector<std::size_t> volume_dims(std::size_t channels, const VoxelGrid& g)
{
    return {channels, static_cast<std::size_t>(g.dims[0]), static_cast<std::size_t>(g.dims[1]),
            static_cast<std::size_t>(g.dims[2])};
}

void check_grad(const SparseWeights& w, const Tensor& grad_out)
{
    const auto& g = w.grid;
    if (grad_out.rank() != 4 || grad_out.dim(0) == 0 ||
        grad_out.dim(1) != static_cast<std::size_t>(g.dims[0]) ||
        grad_out.dim(2) != static_cast<std::size_t>(g.dims[1]) ||
        grad_out.dim(3) != static_cast<std::size_t>(g.dims[2])) {
        throw ShapeError("gradient has shape " + shape_str(grad_out.dims()) +
                         ", expected [C," + std::to_string(g.dims[0]) + "," +
                         std::to_string(g.dims[1]) + "," + std::to_string(g.dims[2]) + "]");
    }
}

}  // namespace

std::size_t ViewMask::active_count() const
{
    return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

void ViewMask::validate(std::size_t n_views) const
{
    if (active.size() != n_views) {
        throw ShapeError("view mask has " + std::to_string(active.size()) + " entries for " +
                         std::to_string(n_views) + " views");
    }
    if (active_count() == 0) throw DomainError("view mask disables every view");
}

FeatureVolume pool_avg(const SparseWeights& weights, std::span<const Tensor> maps,
                       const ViewMask& mask)
{
    const std::size_t channels = check_maps(weights, maps, mask);
    const auto& g = weights.grid;
    const int ny = g.dims[1];
    const int nz = g.dims[2];
    const int ncols = g.dims[0] * ny;
    const std::size_t ncells = g.cell_count();
    const double inv_views = 1.0 / static_cast<double>(mask.active_count());

    FeatureVolume out{Tensor(volume_dims(channels, g)), g};
    auto dst = out.data.data();

#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count())
    for (int col = 0; col < ncols; ++col) {
        std::vector<double> acc(channels);
        for (int iz = 0; iz < nz; ++iz) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t v = 0; v < weights.view_count(); ++v) {
                if (!mask.active[v]) continue;
                const auto& vw = weights.views[v];
                const auto src = maps[v].data();
                const std::size_t plane = static_cast<std::size_t>(vw.n_ybins) * vw.n_xbins;
                for (auto k = vw.xsec_offsets[col]; k < vw.xsec_offsets[col + 1]; ++k) {
                    const auto& e = vw.xsec[k];
                    for (auto q = vw.z_offsets[iz]; q < vw.z_offsets[iz + 1]; ++q) {
                        const auto& z = vw.zmap[q];
                        const double wt = e.w * z.w;
                        const std::size_t off = static_cast<std::size_t>(z.ybin) * vw.n_xbins + e.beam;
                        for (std::size_t ch = 0; ch < channels; ++ch) {
                            acc[ch] += wt * src[ch * plane + off];
                        }
                    }
                }
            }
            const std::size_t cell = static_cast<std::size_t>(col) * nz + iz;
            for (std::size_t ch = 0; ch < channels; ++ch) dst[ch * ncells + cell] = acc[ch] * inv_views;
        }
    }
    return out;
}

std::vector<Tensor> pool_avg_backward(const SparseWeights& weights, const Tensor& grad_out,
                                      const ViewMask& mask)
{
    mask.validate(weights.view_count());
    check_grad(weights, grad_out);
    const auto& g = weights.grid;
    const std::size_t channels = grad_out.dim(0);
    const std::size_t ny = g.dims[1];
    const std::size_t nz = g.dims[2];
    const std::size_t ncells = g.cell_count();
    const double inv_views = 1.0 / static_cast<double>(mask.active_count());
    const auto src = grad_out.data();

    std::vector<Tensor> grads(weights.view_count());
    for (std::size_t v = 0; v < weights.view_count(); ++v) {
        if (!mask.active[v]) continue;
        const auto& vw = weights.views[v];
        grads[v] = Tensor({channels, vw.n_ybins, vw.n_xbins});
        auto dst = grads[v].data();
        const std::size_t plane = static_cast<std::size_t>(vw.n_ybins) * vw.n_xbins;
        // One channel per task: every gradient element has a single writer.
#pragma omp parallel for schedule(static) num_threads(thread_count())
        for (std::size_t ch = 0; ch < channels; ++ch) {
            double* gch = dst.data() + ch * plane;
            const double* och = src.data() + ch * ncells;
            for (const auto& e : vw.xsec) {
                const std::size_t col = (static_cast<std::size_t>(e.ix) * ny + e.iy) * nz;
                for (const auto& z : vw.zmap) {
                    gch[static_cast<std::size_t>(z.ybin) * vw.n_xbins + e.beam] +=
                        e.w * z.w * och[col + z.iz];
                }
            }
            for (std::size_t i = 0; i < plane; ++i) gch[i] *= inv_views;
        }
    }
    return grads;
}

MaxPoolResult pool_max(const SparseWeights& weights, std::span<const Tensor> maps,
                       const ViewMask& mask)
{
    const std::size_t channels = check_maps(weights, maps, mask);
    const auto& g = weights.grid;
    const int ny = g.dims[1];
    const int nz = g.dims[2];
    const int ncols = g.dims[0] * ny;
    const std::size_t ncells = g.cell_count();

    MaxPoolResult res{{Tensor(volume_dims(channels, g)), g}, {}};
    auto& am = res.argmax;
    am.channels = channels;
    am.cells = ncells;
    am.view.assign(channels * ncells, -1);
    am.beam.assign(channels * ncells, -1);
    auto dst = res.volume.data.data();

#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count())
    for (int col = 0; col < ncols; ++col) {
        std::vector<double> best(channels);
        std::vector<std::int32_t> best_v(channels);
        std::vector<std::int32_t> best_b(channels);
        for (int iz = 0; iz < nz; ++iz) {
            std::fill(best.begin(), best.end(), -std::numeric_limits<double>::infinity());
            std::fill(best_v.begin(), best_v.end(), -1);
            std::fill(best_b.begin(), best_b.end(), -1);
            for (std::size_t v = 0; v < weights.view_count(); ++v) {
                if (!mask.active[v]) continue;
                const auto& vw = weights.views[v];
                const auto src = maps[v].data();
                const std::size_t plane = static_cast<std::size_t>(vw.n_ybins) * vw.n_xbins;
                const auto vi = static_cast<std::int32_t>(v);
                for (auto k = vw.xsec_offsets[col]; k < vw.xsec_offsets[col + 1]; ++k) {
                    const auto& e = vw.xsec[k];
                    for (auto q = vw.z_offsets[iz]; q < vw.z_offsets[iz + 1]; ++q) {
                        const auto& z = vw.zmap[q];
                        const double wt = e.w * z.w;
                        const auto off = static_cast<std::int32_t>(z.ybin * vw.n_xbins + e.beam);
                        for (std::size_t ch = 0; ch < channels; ++ch) {
                            const double val = wt * src[ch * plane + off];
                            // Ties go to the lowest (view, beam).
                            if (val > best[ch] ||
                                (val == best[ch] && (vi < best_v[ch] ||
                                                     (vi == best_v[ch] && off < best_b[ch])))) {
                                best[ch] = val;
                                best_v[ch] = vi;
                                best_b[ch] = off;
                            }
                        }
                    }
                }
            }
            const std::size_t cell = static_cast<std::size_t>(col) * nz + iz;
            for (std::size_t ch = 0; ch < channels; ++ch) {
                const std::size_t idx = ch * ncells + cell;
                if (best_v[ch] < 0) {
                    dst[idx] = 0.0;
                } else {
                    dst[idx] = best[ch];
                    am.view[idx] = best_v[ch];
                    am.beam[idx] = best_b[ch];
                }
            }
        }
    }
    return res;
}

std::vector<Tensor> pool_max_backward(const SparseWeights& weights, const ArgmaxIndex& argmax,
                                      const Tensor& grad_out, const ViewMask& mask)
{
    mask.validate(weights.view_count());
    check_grad(weights, grad_out);
    const auto& g = weights.grid;
    const std::size_t channels = grad_out.dim(0);
    const std::size_t ncells = g.cell_count();
    if (argmax.channels != channels || argmax.cells != ncells ||
        argmax.view.size() != channels * ncells || argmax.beam.size() != channels * ncells) {
        throw ShapeError("argmax index does not match the gradient shape");
    }
    const int ny = g.dims[1];
    const int nz = g.dims[2];

    std::vector<Tensor> grads(weights.view_count());
    for (std::size_t v = 0; v < weights.view_count(); ++v) {
        if (mask.active[v]) {
            const auto& vw = weights.views[v];
            grads[v] = Tensor({channels, vw.n_ybins, vw.n_xbins});
        }
    }
    // Validate routing targets up front so the parallel loop cannot throw.
    for (std::size_t i = 0; i < argmax.view.size(); ++i) {
        const auto v = argmax.view[i];
        if (v < 0) continue;
        if (static_cast<std::size_t>(v) >= weights.view_count() || !mask.active[v]) {
            throw ShapeError("argmax refers to a view that is not active");
        }
        const auto& vw = weights.views[v];
        if (argmax.beam[i] < 0 ||
            static_cast<std::size_t>(argmax.beam[i]) >= std::size_t{vw.n_ybins} * vw.n_xbins) {
            throw ShapeError("argmax beam index out of range");
        }
    }

#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::size_t ch = 0; ch < channels; ++ch) {
        for (std::size_t cell = 0; cell < ncells; ++cell) {
            const std::size_t idx = ch * ncells + cell;
            const auto v = argmax.view[idx];
            if (v < 0) continue;
            const auto& vw = weights.views[v];
            const auto b = static_cast<std::uint32_t>(argmax.beam[idx]);
            const int iz = static_cast<int>(cell % nz);
            const int iy = static_cast<int>((cell / nz) % ny);
            const int ix = static_cast<int>(cell / (static_cast<std::size_t>(nz) * ny));
            const double w = weights.weight(v, b / vw.n_xbins, b % vw.n_xbins, ix, iy, iz);
            grads[v].data()[ch * vw.n_ybins * vw.n_xbins + b] += w * grad_out[idx];
        }
    }
    return grads;
}

Tensor roi_pool_3d(const FeatureVolume& volume, const Box3& box, std::array<int, 3> out_dims)
{
    const auto& g = volume.grid;
    const auto& t = volume.data;
    if (t.rank() != 4 || t.dim(1) != static_cast<std::size_t>(g.dims[0]) ||
        t.dim(2) != static_cast<std::size_t>(g.dims[1]) ||
        t.dim(3) != static_cast<std::size_t>(g.dims[2])) {
        throw ShapeError("volume tensor does not match its grid");
    }
    for (int d : out_dims) {
        if (d < 1) throw DomainError("RoI output dims must be >= 1");
    }
    if (!box.valid()) throw DomainError("invalid RoI box");

    // Snap to cell index space: [lo, hi) with floor/ceil, clamped to the grid.
    std::array<int, 3> lo{};
    std::array<int, 3> len{};
    for (int a = 0; a < 3; ++a) {
        const double f0 = (box.lo(a) - g.origin[a]) / g.cell_size[a];
        const double f1 = (box.hi(a) - g.origin[a]) / g.cell_size[a];
        const int i0 = std::max(0, static_cast<int>(std::floor(f0)));
        const int i1 = std::min(g.dims[a], static_cast<int>(std::ceil(f1)));
        if (f1 <= 0.0 || f0 >= g.dims[a] || i1 <= i0) {
            throw DomainError("RoI box lies outside the grid");
        }
        lo[a] = i0;
        len[a] = i1 - i0;
    }

    auto bounds = [&](int a, int k) {
        const int s = lo[a] + (k * len[a]) / out_dims[a];
        const int e = lo[a] + ((k + 1) * len[a] + out_dims[a] - 1) / out_dims[a];
        return std::pair{s, std::max(e, s + 1)};
    };

    const std::size_t channels = t.dim(0);
    const std::size_t ny = g.dims[1];
    const std::size_t nz = g.dims[2];
    const std::size_t ncells = g.cell_count();
    Tensor out({channels, static_cast<std::size_t>(out_dims[0]),
                static_cast<std::size_t>(out_dims[1]), static_cast<std::size_t>(out_dims[2])});
    std::size_t o = 0;
    for (std::size_t ch = 0; ch < channels; ++ch) {
        for (int a = 0; a < out_dims[0]; ++a) {
            const auto [x0, x1] = bounds(0, a);
            for (int b = 0; b < out_dims[1]; ++b) {
                const auto [y0, y1] = bounds(1, b);
                for (int c = 0; c < out_dims[2]; ++c) {
                    const auto [z0, z1] = bounds(2, c);
                    double m = -std::numeric_limits<double>::infinity();
                    for (int x = x0; x < x1; ++x) {
                        for (int y = y0; y < y1; ++y) {
                            for (int z = z0; z < z1; ++z) {
                                m = std::max(m, t[ch * ncells + (x * ny + y) * nz + z]);
                            }
                        }
                    }
                    out[o++] = m;
                }
            }
        }
    }
    return out;
}

}  // namespace mvx
