#include "mvxray/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mvxray/errors.hpp"

namespace mvx {

namespace {

double overlap(double a_lo, double a_hi, double b_lo, double b_hi)
{
    return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

}  // namespace

bool Box2::valid() const
{
    return w > 0 && h > 0 && std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) &&
           std::isfinite(h);
}

bool Box3::valid() const
{
    for (int a = 0; a < 3; ++a) {
        if (!(size[a] > 0) || !std::isfinite(size[a]) || !std::isfinite(center[a])) return false;
    }
    return true;
}

double iou(const Box2& a, const Box2& b)
{
    const double inter = overlap(a.x_min(), a.x_max(), b.x_min(), b.x_max()) *
                         overlap(a.y_min(), a.y_max(), b.y_min(), b.y_max());
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

double iou(const Box3& a, const Box3& b)
{
    double inter = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        inter *= overlap(a.lo(ax), a.hi(ax), b.lo(ax), b.hi(ax));
        if (inter <= 0.0) return 0.0;
    }
    return inter / (a.volume() + b.volume() - inter);
}

Regression6 encode_regression(const Box3& box, const Box3& anchor)
{
    const auto& a = anchor;
    return {(box.center.x - a.center.x) / a.size[0],
            (box.center.y - a.center.y) / a.size[1],
            (box.center.z - a.center.z) / a.size[2],
            std::log(box.size[0] / a.size[0]),
            std::log(box.size[1] / a.size[1]),
            std::log(box.size[2] / a.size[2])};
}

Box3 decode_regression(const Regression6& t, const Box3& anchor)
{
    const auto& a = anchor;
    return {{a.center.x + t.tx * a.size[0], a.center.y + t.ty * a.size[1],
             a.center.z + t.tz * a.size[2]},
            {a.size[0] * std::exp(t.tw), a.size[1] * std::exp(t.th), a.size[2] * std::exp(t.td)}};
}

double shift_for_threshold(double t2)
{
    if (!(t2 > 0.0 && t2 <= 1.0)) {
        std::ostringstream os;
        os << "2D IoU threshold " << t2 << " outside (0, 1]";
        throw DomainError(os.str());
    }
    return 1.0 - std::sqrt(2.0 * t2 / (t2 + 1.0));
}

double threshold_3d_from_shift(double s)
{
    if (!(s >= 0.0 && s < 1.0)) {
        std::ostringstream os;
        os << "relative shift " << s << " outside [0, 1)";
        throw DomainError(os.str());
    }
    const double c = (1.0 - s) * (1.0 - s) * (1.0 - s);
    return c / (2.0 - c);
}

double convert_threshold_2d_to_3d(double t2)
{
    return threshold_3d_from_shift(shift_for_threshold(t2));
}

std::vector<std::size_t> nms_3d(std::span<const ScoredBox3> dets, double iou_thresh)
{
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });

    std::vector<std::size_t> kept;
    std::vector<char> suppressed(dets.size(), 0);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(i);
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (!suppressed[j] && iou(dets[i].box, dets[j].box) > iou_thresh) suppressed[j] = 1;
        }
    }
    return kept;
}

}  // namespace mvx
