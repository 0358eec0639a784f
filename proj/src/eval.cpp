#include "mvxray/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "mvxray/errors.hpp"

namespace mvx {

template <class Box>
MatchResult match_detections(std::span<const Detection<Box>> dets,
                             std::span<const GroundTruth<Box>> gts, double iou_threshold)
{
    MatchResult res;
    res.order.resize(dets.size());
    std::iota(res.order.begin(), res.order.end(), std::size_t{0});
    std::stable_sort(res.order.begin(), res.order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });

    std::unordered_map<std::string, std::vector<std::size_t>> by_unit;
    for (std::size_t g = 0; g < gts.size(); ++g) by_unit[gts[g].unit_id].push_back(g);

    std::vector<char> taken(gts.size(), 0);
    res.labels.reserve(dets.size());
    for (std::size_t i : res.order) {
        const auto& d = dets[i];
        double best = -1.0;
        std::size_t arg = 0;
        if (auto it = by_unit.find(d.unit_id); it != by_unit.end()) {
            for (std::size_t g : it->second) {
                if (taken[g]) continue;
                const double o = iou(d.box, gts[g].box);
                if (o > best) {
                    best = o;
                    arg = g;
                }
            }
        }
        if (best >= iou_threshold) {
            taken[arg] = 1;
            res.labels.push_back(MatchLabel::kTruePositive);
        } else {
            res.labels.push_back(MatchLabel::kFalsePositive);
        }
    }
    return res;
}

template MatchResult match_detections<Box2>(std::span<const Detection<Box2>>,
                                            std::span<const GroundTruth<Box2>>, double);
template MatchResult match_detections<Box3>(std::span<const Detection<Box3>>,
                                            std::span<const GroundTruth<Box3>>, double);

std::vector<PrPoint> pr_curve(std::span<const MatchLabel> labels, std::size_t n_gt)
{
    if (n_gt == 0) throw DomainError("precision/recall need at least one ground truth");
    std::vector<PrPoint> pts(labels.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == MatchLabel::kTruePositive) ++tp;
        pts[i].recall = static_cast<double>(tp) / static_cast<double>(n_gt);
        pts[i].precision = static_cast<double>(tp) / static_cast<double>(i + 1);
    }
    double env = 0.0;
    for (std::size_t i = pts.size(); i-- > 0;) {
        env = std::max(env, pts[i].precision);
        pts[i].interpolated_precision = env;
    }
    return pts;
}

double average_precision(std::span<const MatchLabel> labels, std::size_t n_gt)
{
    if (n_gt == 0) throw DomainError("average precision needs at least one ground truth");
    // Recall rises by 1/n_gt at each true positive, so AP is the mean of the
    // interpolated precision over true positives. Long double keeps the
    // result correctly rounded for short sequences.
    std::vector<long double> prec(labels.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        tp += labels[i] == MatchLabel::kTruePositive;
        prec[i] = static_cast<long double>(tp) / static_cast<long double>(i + 1);
    }
    if (tp > n_gt) throw DomainError("more true positives than ground truths");
    long double best = 0.0L;
    long double sum = 0.0L;
    for (std::size_t i = labels.size(); i-- > 0;) {
        best = std::max(best, prec[i]);
        if (labels[i] == MatchLabel::kTruePositive) sum += best;
    }
    return static_cast<double>(sum / static_cast<long double>(n_gt));
}

template <class Box>
EvalReport evaluate_run(std::span<const Detection<Box>> dets, std::span<const GroundTruth<Box>> gts,
                        const EvalConfig& cfg)
{
    if (!(cfg.iou_threshold > 0.0 && cfg.iou_threshold <= 1.0)) {
        throw DomainError("IoU threshold must lie in (0, 1]");
    }
    EvalReport rep;
    rep.iou_threshold = cfg.iou_threshold;
    rep.dimensionality = cfg.dimensionality;

    std::map<std::string, std::vector<GroundTruth<Box>>> gt_by_class;
    for (const auto& g : gts) gt_by_class[g.class_label].push_back(g);
    std::map<std::string, std::vector<Detection<Box>>> det_by_class;
    for (const auto& d : dets) det_by_class[d.class_label].push_back(d);

    for (const auto& [cls, cdets] : det_by_class) {
        if (!gt_by_class.contains(cls)) rep.unknown_classes.emplace_back(cls, cdets.size());
    }

    double sum = 0.0;
    for (const auto& [cls, cgts] : gt_by_class) {
        ClassReport cr;
        cr.class_label = cls;
        cr.n_gt = cgts.size();
        static const std::vector<Detection<Box>> kNone;
        const auto it = det_by_class.find(cls);
        const auto& cdets = it == det_by_class.end() ? kNone : it->second;
        cr.n_det = cdets.size();
        const auto m = match_detections<Box>(cdets, cgts, cfg.iou_threshold);
        cr.n_tp = static_cast<std::size_t>(
            std::count(m.labels.begin(), m.labels.end(), MatchLabel::kTruePositive));
        cr.ap = average_precision(m.labels, cr.n_gt);
        cr.curve = pr_curve(m.labels, cr.n_gt);
        sum += cr.ap;
        rep.classes.push_back(std::move(cr));
    }
    rep.mean_ap = rep.classes.empty() ? 0.0 : sum / static_cast<double>(rep.classes.size());
    return rep;
}

template EvalReport evaluate_run<Box2>(std::span<const Detection<Box2>>,
                                       std::span<const GroundTruth<Box2>>, const EvalConfig&);
template EvalReport evaluate_run<Box3>(std::span<const Detection<Box3>>,
                                       std::span<const GroundTruth<Box3>>, const EvalConfig&);

std::string pr_curves_csv(const EvalReport& report)
{
    std::ostringstream os;
    os.precision(17);
    os << "class,recall,precision,interpolated_precision\n";
    for (const auto& c : report.classes) {
        for (const auto& p : c.curve) {
            os << c.class_label << ',' << p.recall << ',' << p.precision << ','
               << p.interpolated_precision << '\n';
        }
    }
    return os.str();
}

}  // namespace mvx
