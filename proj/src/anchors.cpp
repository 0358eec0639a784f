#include "mvxray/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvxray/errors.hpp"
#include "mvxray/random.hpp"

namespace mvx {

namespace {

struct Assignment {
    std::vector<int> labels;
    std::vector<double> dist;
    double total = 0.0;
};

Assignment assign(std::span<const Size3> pts, const std::vector<Size3>& centroids)
{
    Assignment a;
    a.labels.resize(pts.size());
    a.dist.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            const double d = jaccard_distance(pts[i], centroids[c]);
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        a.labels[i] = arg;
        a.dist[i] = best;
        a.total += best;
    }
    return a;
}

std::vector<Size3> seed_centroids(std::span<const Size3> pts, int k, std::mt19937_64& rng)
{
    const std::size_t n = pts.size();
    std::vector<Size3> c;
    c.reserve(k);
    c.push_back(pts[std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * n))]);
    std::vector<double> d2(n);
    while (static_cast<int>(c.size()) < k) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& cc : c) best = std::min(best, jaccard_distance(pts[i], cc));
            d2[i] = best * best;
            sum += d2[i];
        }
        std::size_t pick = n - 1;
        if (sum > 0.0) {
            const double r = uniform01(rng) * sum;
            double run = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                run += d2[i];
                if (d2[i] > 0.0 && run > r) {
                    pick = i;
                    break;
                }
            }
            // Guard against r landing past the last positive mass through round-off.
            while (d2[pick] == 0.0 && pick > 0) --pick;
        } else {
            pick = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * n));
        }
        c.push_back(pts[pick]);
    }
    return c;
}

std::vector<Size3> update_centroids(std::span<const Size3> pts, const Assignment& a,
                                    const std::vector<Size3>& old)
{
    const std::size_t k = old.size();
    std::vector<Size3> sum(k, Size3{0.0, 0.0, 0.0});
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto l = static_cast<std::size_t>(a.labels[i]);
        for (int ax = 0; ax < 3; ++ax) sum[l][ax] += pts[i][ax];
        ++count[l];
    }
    std::vector<Size3> out(k);
    std::vector<char> taken(pts.size(), 0);
    for (std::size_t c = 0; c < k; ++c) {
        if (count[c] > 0) {
            for (int ax = 0; ax < 3; ++ax) out[c][ax] = sum[c][ax] / static_cast<double>(count[c]);
            continue;
        }
        // Empty cluster: take over the point farthest from its centroid.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!taken[i] && a.dist[i] > far_d) {
                far_d = a.dist[i];
                far = i;
            }
        }
        taken[far] = 1;
        out[c] = pts[far];
    }
    return out;
}

struct Run {
    std::vector<Size3> centroids;
    double total = 0.0;
    std::vector<double> history;
};

Run lloyd(std::span<const Size3> pts, const ClusterConfig& cfg, std::mt19937_64& rng)
{
    Run run;
    run.centroids = seed_centroids(pts, cfg.k, rng);
    Assignment a = assign(pts, run.centroids);
    run.total = a.total;
    run.history.push_back(a.total);
    for (int it = 0; it < cfg.max_iters; ++it) {
        auto next = update_centroids(pts, a, run.centroids);
        Assignment na = assign(pts, next);
        if (na.total > run.total) break;
        const double gain = run.total - na.total;
        run.centroids = std::move(next);
        run.total = na.total;
        run.history.push_back(na.total);
        const bool same = na.labels == a.labels;
        a = std::move(na);
        if (same || gain <= cfg.tol) break;
    }
    return run;
}

}  // namespace

void AnchorSet::validate() const
{
    if (sizes.empty()) throw DomainError("anchor set is empty");
    for (const auto& s : sizes) {
        for (double v : s) {
            if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("anchor sizes must be positive");
        }
    }
}

double jaccard_distance(const Size3& a, const Size3& b)
{
    const double inter =
        std::min(a[0], b[0]) * std::min(a[1], b[1]) * std::min(a[2], b[2]);
    const double uni = a[0] * a[1] * a[2] + b[0] * b[1] * b[2] - inter;
    return 1.0 - inter / uni;
}

ClusterResult kmeans_anchors(std::span<const Size3> dims, const ClusterConfig& cfg)
{
    if (cfg.k < 1) throw DomainError("k must be >= 1");
    if (dims.size() < static_cast<std::size_t>(cfg.k)) {
        throw DomainError("k = " + std::to_string(cfg.k) + " exceeds the number of boxes (" +
                          std::to_string(dims.size()) + ")");
    }
    if (cfg.restarts < 1 || cfg.max_iters < 1) {
        throw DomainError("restarts and max_iters must be >= 1");
    }
    for (const auto& d : dims) {
        for (double v : d) {
            if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("box sizes must be positive");
        }
    }

    ClusterResult best;
    best.total_distance = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        Run run = lloyd(dims, cfg, rng);
        if (run.total < best.total_distance) {
            best.anchors.sizes = std::move(run.centroids);
            best.total_distance = run.total;
            best.history = std::move(run.history);
            best.best_restart = r;
        }
    }
    std::stable_sort(best.anchors.sizes.begin(), best.anchors.sizes.end(),
                     [](const Size3& a, const Size3& b) {
                         return a[0] * a[1] * a[2] < b[0] * b[1] * b[2];
                     });
    return best;
}

double avg_best_iou_centered(const AnchorSet& anchors, std::span<const Box3> gts)
{
    anchors.validate();
    if (gts.empty()) throw DomainError("no ground-truth boxes");
    double sum = 0.0;
    for (const auto& gt : gts) {
        double best = 0.0;
        for (const auto& s : anchors.sizes) best = std::max(best, iou(Box3{gt.center, s}, gt));
        sum += best;
    }
    return sum / static_cast<double>(gts.size());
}

Point3 snap_to_feature_grid(const Point3& center, const VoxelGrid& grid, const Vec3& stride)
{
    double out[3];
    for (int a = 0; a < 3; ++a) {
        if (!(stride[a] > 0.0)) throw DomainError("grid stride must be positive");
        const double extent = grid.hi(a) - grid.lo(a);
        const long n = std::max(1L, static_cast<long>(std::floor(extent / stride[a] + 1e-9)));
        const long k = std::clamp(static_cast<long>(std::floor((center[a] - grid.lo(a)) / stride[a])),
                                  0L, n - 1);
        out[a] = grid.lo(a) + (static_cast<double>(k) + 0.5) * stride[a];
    }
    return {out[0], out[1], out[2]};
}

double avg_best_iou_grid(const AnchorSet& anchors, std::span<const Box3> gts,
                         const VoxelGrid& grid, const Vec3& stride)
{
    anchors.validate();
    if (gts.empty()) throw DomainError("no ground-truth boxes");
    double sum = 0.0;
    for (const auto& gt : gts) {
        const Point3 c = snap_to_feature_grid(gt.center, grid, stride);
        double best = 0.0;
        for (const auto& s : anchors.sizes) best = std::max(best, iou(Box3{c, s}, gt));
        sum += best;
    }
    return sum / static_cast<double>(gts.size());
}

std::vector<Box3> gen_anchor_grid(const AnchorSet& anchors, const VoxelGrid& grid)
{
    anchors.validate();
    grid.validate();
    std::vector<Box3> out;
    out.reserve(anchors.sizes.size() * grid.cell_count());
    for (const auto& s : anchors.sizes) {
        for (int ix = 0; ix < grid.dims[0]; ++ix) {
            for (int iy = 0; iy < grid.dims[1]; ++iy) {
                for (int iz = 0; iz < grid.dims[2]; ++iz) {
                    out.push_back({{grid.cell_center(0, ix), grid.cell_center(1, iy),
                                    grid.cell_center(2, iz)},
                                   s});
                }
            }
        }
    }
    return out;
}

AnchorSet expand_standard_anchors(std::span<const double> scales)
{
    static constexpr double kRatios[7][3] = {{1, 1, 1}, {2, 1, 1}, {1, 2, 1}, {1, 1, 2},
                                             {2, 2, 1}, {2, 1, 2}, {1, 2, 2}};
    AnchorSet set;
    for (double s : scales) {
        for (const auto& r : kRatios) {
            const double norm = std::cbrt(r[0] * r[1] * r[2]);
            set.sizes.push_back({s * r[0] / norm, s * r[1] / norm, s * r[2] / norm});
        }
    }
    set.validate();
    return set;
}

}  // namespace mvx
