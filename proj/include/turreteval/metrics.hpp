#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "box.hpp"
#include "errors.hpp"

namespace turreteval {

struct MetricsDataset {
    std::vector<DetectionRecord> detections;
    std::vector<GroundTruthRecord> ground_truths;

    std::size_t gt_count() const { return ground_truths.size(); }
};

namespace detail {

// Detection indices grouped per image, ordered by descending confidence with
// stable input-order tie-breaking.
inline std::map<std::string, std::vector<std::size_t>> detections_by_image(
    const MetricsDataset& ds) {
    std::map<std::string, std::vector<std::size_t>> m;
    for (std::size_t i = 0; i < ds.detections.size(); ++i)
        m[ds.detections[i].image_id].push_back(i);
    for (auto& [id, idx] : m) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return ds.detections[a].confidence > ds.detections[b].confidence;
        });
    }
    return m;
}

inline std::map<std::string, std::vector<std::size_t>> ground_truths_by_image(
    const MetricsDataset& ds) {
    std::map<std::string, std::vector<std::size_t>> m;
    for (std::size_t i = 0; i < ds.ground_truths.size(); ++i)
        m[ds.ground_truths[i].image_id].push_back(i);
    return m;
}

} // namespace detail

struct MatchResult {
    double threshold = 0.5;
    std::vector<bool> is_tp;             // per detection, input order
    std::vector<double> gt_best_iou;     // per ground truth, best over all detections
    std::size_t tp_count = 0;
};

// Greedy per-image matching: detections in descending confidence each claim
// the unmatched ground truth of highest IoU; the claim consumes the ground
// truth only when the IoU clears the threshold. Confidence-prefix consistency
// follows: truncating the detection list at any confidence leaves the
// surviving flags unchanged.
inline MatchResult match_detections(const MetricsDataset& ds, double t) {
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("match threshold must lie in (0,1]");
    MatchResult res;
    res.threshold = t;
    res.is_tp.assign(ds.detections.size(), false);
    res.gt_best_iou.assign(ds.ground_truths.size(), 0.0);

    const auto dets = detail::detections_by_image(ds);
    const auto gts = detail::ground_truths_by_image(ds);

    for (const auto& [image, det_idx] : dets) {
        const auto git = gts.find(image);
        if (git == gts.end()) continue; // background image: all detections stay FP
        const std::vector<std::size_t>& gt_idx = git->second;
        std::vector<bool> used(gt_idx.size(), false);

        for (std::size_t di : det_idx) {
            double best = -1.0;
            std::size_t best_k = gt_idx.size();
            for (std::size_t k = 0; k < gt_idx.size(); ++k) {
                const double v = iou(ds.detections[di].box, ds.ground_truths[gt_idx[k]].box);
                res.gt_best_iou[gt_idx[k]] = std::max(res.gt_best_iou[gt_idx[k]], v);
                if (!used[k] && v > best) {
                    best = v;
                    best_k = k;
                }
            }
            if (best_k < gt_idx.size() && best >= t) {
                used[best_k] = true;
                res.is_tp[di] = true;
                ++res.tp_count;
            }
        }
    }
    return res;
}

// Best IoU each detection achieves against any ground truth of its image
// (0 when the image has none); used for stratification and correlations.
inline std::vector<double> detection_best_iou(const MetricsDataset& ds) {
    std::vector<double> best(ds.detections.size(), 0.0);
    const auto gts = detail::ground_truths_by_image(ds);
    for (std::size_t i = 0; i < ds.detections.size(); ++i) {
        const auto git = gts.find(ds.detections[i].image_id);
        if (git == gts.end()) continue;
        for (std::size_t gi : git->second)
            best[i] = std::max(best[i], iou(ds.detections[i].box, ds.ground_truths[gi].box));
    }
    return best;
}

struct PrPoint {
    std::optional<double> precision; // nullopt when no detection clears tau
    double recall = 0.0;
};

// P = S(tau)/N_d(tau), R = S(tau)/G over detections with confidence >= tau.
inline PrPoint precision_recall(const MetricsDataset& ds, double t, double tau) {
    if (ds.gt_count() == 0) throw ValidationError("precision_recall: no ground truths");
    const MatchResult m = match_detections(ds, t);
    std::size_t nd = 0, s = 0;
    for (std::size_t i = 0; i < ds.detections.size(); ++i) {
        if (ds.detections[i].confidence >= tau) {
            ++nd;
            if (m.is_tp[i]) ++s;
        }
    }
    PrPoint p;
    p.recall = static_cast<double>(s) / static_cast<double>(ds.gt_count());
    if (nd > 0) p.precision = static_cast<double>(s) / static_cast<double>(nd);
    return p;
}

struct PRCurve {
    struct Point {
        double tau = 0.0;
        double recall = 0.0;
        double precision = 0.0;
    };
    // Ascending tau, descending recall; first point is the forced (tau 0,
    // R 1, P 0), last the forced (tau 1, R 0, P 1).
    std::vector<Point> points;
};

// Sample (R, P) at every distinct confidence level, enforce strictly
// decreasing recall across the interior by keeping the best-precision pair of
// each equal-recall group, then add the two forced endpoints.
inline PRCurve build_pr_curve(const MetricsDataset& ds, double t) {
    if (ds.gt_count() == 0) throw ValidationError("build_pr_curve: no ground truths");
    const MatchResult m = match_detections(ds, t);

    std::vector<double> levels;
    levels.reserve(ds.detections.size());
    for (const auto& d : ds.detections) levels.push_back(d.confidence);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    PRCurve curve;
    curve.points.push_back({0.0, 1.0, 0.0});
    const double g = static_cast<double>(ds.gt_count());

    PRCurve::Point pending{};
    bool have_pending = false;
    for (double tau : levels) {
        std::size_t nd = 0, s = 0;
        for (std::size_t i = 0; i < ds.detections.size(); ++i) {
            if (ds.detections[i].confidence >= tau) {
                ++nd;
                if (m.is_tp[i]) ++s;
            }
        }
        // nd >= 1 because tau is itself a detection confidence
        PRCurve::Point pt{tau, static_cast<double>(s) / g,
                          static_cast<double>(s) / static_cast<double>(nd)};
        if (have_pending && pt.recall == pending.recall) {
            if (pt.precision >= pending.precision) pending = pt;
        } else {
            if (have_pending) curve.points.push_back(pending);
            pending = pt;
            have_pending = true;
        }
    }
    if (have_pending) curve.points.push_back(pending);
    curve.points.push_back({1.0, 0.0, 1.0});
    return curve;
}

// Upper envelope: max precision over curve points with recall >= R.
inline double interpolate_precision(const PRCurve& curve, double r) {
    double best = 0.0;
    for (const auto& p : curve.points)
        if (p.recall >= r) best = std::max(best, p.precision);
    return best;
}

// N reference recalls (N-k)/(N-1), k = 1..N; AP is their mean interpolated
// precision.
inline double ap_n_point(const PRCurve& curve, int n) {
    if (n < 2) throw ValidationError("ap_n_point: need at least two reference points");
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double r = static_cast<double>(n - k) / static_cast<double>(n - 1);
        acc += interpolate_precision(curve, r);
    }
    return acc / static_cast<double>(n);
}

// Area under the interpolated staircase across the curve's own recall levels.
inline double ap_all_point(const PRCurve& curve) {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < curve.points.size(); ++k) {
        const double dr = curve.points[k].recall - curve.points[k + 1].recall;
        if (dr != 0.0) acc += dr * interpolate_precision(curve, curve.points[k].recall);
    }
    return acc;
}

struct ApVariants {
    double ap50 = 0.0;
    double ap75 = 0.0;
    double ap_50_5_95 = 0.0;
};

inline ApVariants ap_variants(const MetricsDataset& ds) {
    if (ds.gt_count() == 0) throw ValidationError("ap_variants: no ground truths");
    ApVariants v;
    v.ap50 = ap_all_point(build_pr_curve(ds, 0.50));
    v.ap75 = ap_all_point(build_pr_curve(ds, 0.75));
    double acc = 0.0;
    for (int i = 0; i < 10; ++i) {
        const double t = static_cast<double>(50 + 5 * i) / 100.0;
        acc += ap_all_point(build_pr_curve(ds, t));
    }
    v.ap_50_5_95 = acc / 10.0;
    return v;
}

// AR = (2/G) sum over ground truths of max(IoU_i - 0.5, 0), where IoU_i is the
// best IoU against the image's top-`proposal_limit` detections by confidence.
inline double average_recall(const MetricsDataset& ds, std::size_t proposal_limit) {
    if (ds.gt_count() == 0) throw ValidationError("average_recall: no ground truths");
    if (proposal_limit == 0) throw ValidationError("average_recall: proposal limit must be >= 1");

    const auto dets = detail::detections_by_image(ds);
    double acc = 0.0;
    for (std::size_t gi = 0; gi < ds.ground_truths.size(); ++gi) {
        const auto dit = dets.find(ds.ground_truths[gi].image_id);
        double best = 0.0;
        if (dit != dets.end()) {
            const std::size_t limit = std::min(proposal_limit, dit->second.size());
            for (std::size_t k = 0; k < limit; ++k)
                best = std::max(best,
                                iou(ds.detections[dit->second[k]].box, ds.ground_truths[gi].box));
        }
        acc += std::max(best - 0.5, 0.0);
    }
    return 2.0 * acc / static_cast<double>(ds.gt_count());
}

struct ApReport {
    double ap50 = 0.0, ap75 = 0.0, ap_50_5_95 = 0.0;
    double ar1 = 0.0, ar10 = 0.0;
    double mean_confidence = 0.0;
    double mean_iou = 0.0; // mean per-detection best IoU
    std::size_t n_detections = 0;
    std::size_t n_ground_truths = 0;
};

inline ApReport make_ap_report(const MetricsDataset& ds) {
    ApReport r;
    r.n_detections = ds.detections.size();
    r.n_ground_truths = ds.gt_count();
    if (ds.gt_count() == 0 || ds.detections.empty()) return r;
    const ApVariants v = ap_variants(ds);
    r.ap50 = v.ap50;
    r.ap75 = v.ap75;
    r.ap_50_5_95 = v.ap_50_5_95;
    r.ar1 = average_recall(ds, 1);
    r.ar10 = average_recall(ds, 10);
    double sc = 0.0;
    for (const auto& d : ds.detections) sc += d.confidence;
    r.mean_confidence = sc / static_cast<double>(ds.detections.size());
    const std::vector<double> best = detection_best_iou(ds);
    double si = 0.0;
    for (double b : best) si += b;
    r.mean_iou = si / static_cast<double>(best.size());
    return r;
}

// IoU strata: half-open [lo, hi) except the last bin, which is closed.
struct Binning {
    std::vector<std::pair<double, double>> edges;

    std::optional<std::size_t> bin_of(double x) const {
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const bool last = (k + 1 == edges.size());
            if (x >= edges[k].first && (last ? x <= edges[k].second : x < edges[k].second))
                return k;
        }
        return std::nullopt;
    }
};

inline Binning default_binning() {
    return {{{0.0, 0.6}, {0.6, 0.7}, {0.7, 0.8}, {0.8, 0.9}, {0.9, 1.0}}};
}

inline std::string bin_label(std::size_t k) {
    return std::string(1, static_cast<char>('A' + k));
}

// Area rule applied to the associated ground-truth box: keep when its area is
// within `fraction` of the dataset's largest ground-truth area. The literal
// reading is the default; callers may substitute any predicate.
using AreaPredicate = bool (*)(double gt_area, double max_gt_area, double fraction);

inline bool default_area_predicate(double gt_area, double max_gt_area, double fraction) {
    return gt_area >= (1.0 - fraction) * max_gt_area;
}

struct StratifiedSample {
    std::vector<MetricsDataset> bins; // one per binning edge
    MetricsDataset excluded;          // IoU == 0 or failed area rule
    std::vector<std::size_t> bin_of_detection; // bins.size() means excluded
};

// Assign each detection to exactly one bin by its best-IoU ground truth;
// detections with zero IoU are excluded, as are those whose associated ground
// truth fails the area rule. Each bin's ground-truth set is the distinct
// associated ground truths, in first-association order.
inline StratifiedSample stratified_sample(const MetricsDataset& ds, const Binning& bins,
                                          double area_fraction = 0.025,
                                          AreaPredicate pred = default_area_predicate) {
    if (ds.detections.empty() && ds.ground_truths.empty())
        throw ValidationError("stratified_sample: empty dataset");
    StratifiedSample out;
    out.bins.resize(bins.edges.size());
    out.bin_of_detection.assign(ds.detections.size(), bins.edges.size());

    double max_area = 0.0;
    for (const auto& g : ds.ground_truths) max_area = std::max(max_area, g.box.area());

    const auto gts = detail::ground_truths_by_image(ds);
    std::vector<std::vector<bool>> gt_added(bins.edges.size(),
                                            std::vector<bool>(ds.ground_truths.size(), false));

    for (std::size_t i = 0; i < ds.detections.size(); ++i) {
        const auto git = gts.find(ds.detections[i].image_id);
        double best = 0.0;
        std::size_t assoc = ds.ground_truths.size();
        if (git != gts.end()) {
            for (std::size_t gi : git->second) {
                const double v = iou(ds.detections[i].box, ds.ground_truths[gi].box);
                if (v > best) {
                    best = v;
                    assoc = gi;
                }
            }
        }
        std::optional<std::size_t> bin;
        if (best > 0.0 && assoc < ds.ground_truths.size() &&
            pred(ds.ground_truths[assoc].box.area(), max_area, area_fraction)) {
            bin = bins.bin_of(best);
        }
        if (bin) {
            out.bins[*bin].detections.push_back(ds.detections[i]);
            if (!gt_added[*bin][assoc]) {
                gt_added[*bin][assoc] = true;
                out.bins[*bin].ground_truths.push_back(ds.ground_truths[assoc]);
            }
            out.bin_of_detection[i] = *bin;
        } else {
            out.excluded.detections.push_back(ds.detections[i]);
        }
    }
    return out;
}

} // namespace turreteval
