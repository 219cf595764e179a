#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "turreteval/metrics.hpp"
#include "turreteval/rng.hpp"

using namespace turreteval;
using Catch::Approx;

namespace {

// small randomized instances: 1-3 images, <= 10 ground truths, <= 20
// detections, coarse confidence grid so ties occur
MetricsDataset random_instance(Rng& rng) {
    MetricsDataset ds;
    const int images = 1 + static_cast<int>(rng.uniform() * 3);
    for (int im = 0; im < images; ++im) {
        const std::string id = "im" + std::to_string(im);
        const int gts = 1 + static_cast<int>(rng.uniform() * 3);
        std::vector<BoundingBox> boxes;
        for (int g = 0; g < gts; ++g) {
            const BoundingBox b = oracles::random_box(rng, 300.0, 20.0, 80.0);
            boxes.push_back(b);
            ds.ground_truths.push_back({id, b});
        }
        const int dets = static_cast<int>(rng.uniform() * 7);
        for (int d = 0; d < dets; ++d) {
            DetectionRecord det;
            det.image_id = id;
            const BoundingBox& target = boxes[static_cast<std::size_t>(
                rng.uniform() * static_cast<double>(boxes.size()))];
            const double jx = rng.normal(0.0, 12.0), jy = rng.normal(0.0, 12.0);
            det.box = {target.x1 + jx, target.y1 + jy, target.x2 + jx + rng.normal(0.0, 6.0),
                       target.y2 + jy + rng.normal(0.0, 6.0)};
            if (det.box.x2 < det.box.x1) std::swap(det.box.x1, det.box.x2);
            if (det.box.y2 < det.box.y1) std::swap(det.box.y1, det.box.y2);
            if (!(det.box.area() > 0.0)) det.box.x2 += 1.0;
            det.confidence = std::round(rng.uniform() * 10.0) / 10.0;
            ds.detections.push_back(det);
        }
    }
    return ds;
}

} // namespace

TEST_CASE("matching policy basics") {
    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 10, 10}});

    SECTION("exact hit") {
        ds.detections.push_back({"a", {0, 0, 10, 10}, 0.9});
        const MatchResult m = match_detections(ds, 0.5);
        CHECK(m.tp_count == 1);
        CHECK(m.is_tp[0]);
        CHECK(m.gt_best_iou[0] == 1.0);
    }
    SECTION("duplicate detection: one TP, one FP") {
        ds.detections.push_back({"a", {0, 0, 10, 10}, 0.9});
        ds.detections.push_back({"a", {0, 0, 10, 10}, 0.8});
        const MatchResult m = match_detections(ds, 0.5);
        CHECK(m.tp_count == 1);
        CHECK(m.is_tp[0]);
        CHECK_FALSE(m.is_tp[1]);
    }
    SECTION("below-threshold overlap is a miss that spares the ground truth") {
        ds.detections.push_back({"a", {0, 6, 10, 16}, 0.9}); // IoU = 4/16 = 0.25
        ds.detections.push_back({"a", {0, 0, 10, 10}, 0.5});
        const MatchResult m = match_detections(ds, 0.5);
        CHECK_FALSE(m.is_tp[0]);
        CHECK(m.is_tp[1]); // the ground truth was not consumed by the miss
        CHECK(m.tp_count == 1);
    }
    SECTION("detections on unknown images stay false positives") {
        ds.detections.push_back({"elsewhere", {0, 0, 10, 10}, 0.9});
        const MatchResult m = match_detections(ds, 0.5);
        CHECK(m.tp_count == 0);
    }
    SECTION("threshold domain") {
        CHECK_THROWS_AS(match_detections(ds, 0.0), ValidationError);
        CHECK_THROWS_AS(match_detections(ds, 1.5), ValidationError);
        CHECK_NOTHROW(match_detections(ds, 1.0));
    }
}

TEST_CASE("higher confidence claims the contested ground truth") {
    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 10, 10}});
    ds.detections.push_back({"a", {1, 1, 11, 11}, 0.6});
    ds.detections.push_back({"a", {0, 0, 10, 10}, 0.9});
    const MatchResult m = match_detections(ds, 0.5);
    CHECK(m.is_tp[1]); // processed first despite later input position
    CHECK_FALSE(m.is_tp[0]);
}

TEST_CASE("precision and recall at a confidence threshold") {
    MetricsDataset ds;
    for (int g = 0; g < 5; ++g)
        ds.ground_truths.push_back({"a", {g * 100.0, 0, g * 100.0 + 50, 50}});
    // three true positives and one clear false positive above tau
    for (int d = 0; d < 3; ++d)
        ds.detections.push_back({"a", {d * 100.0, 0, d * 100.0 + 50, 50}, 0.9});
    ds.detections.push_back({"a", {700, 700, 720, 720}, 0.8});
    ds.detections.push_back({"a", {300, 0, 350, 50}, 0.1}); // below tau

    const PrPoint p = precision_recall(ds, 0.5, 0.5);
    REQUIRE(p.precision.has_value());
    CHECK(*p.precision == Approx(0.75));
    CHECK(p.recall == Approx(0.6));

    // no detection clears tau = 1.0 here: precision undefined, recall zero
    const PrPoint q = precision_recall(ds, 0.5, 0.99);
    CHECK_FALSE(q.precision.has_value());
    CHECK(q.recall == 0.0);

    // recall never increases in tau
    double prev = 1.0;
    for (double tau : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
        const double r = precision_recall(ds, 0.5, tau).recall;
        CHECK(r <= prev + 1e-15);
        prev = r;
    }
}

TEST_CASE("pr curve endpoints and simple shapes") {
    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 10, 10}});

    const PRCurve empty = build_pr_curve(ds, 0.5);
    REQUIRE(empty.points.size() == 2);
    CHECK(empty.points.front().recall == 1.0);
    CHECK(empty.points.front().precision == 0.0);
    CHECK(empty.points.back().recall == 0.0);
    CHECK(empty.points.back().precision == 1.0);

    ds.detections.push_back({"a", {0, 0, 10, 10}, 0.7});
    const PRCurve one = build_pr_curve(ds, 0.5);
    bool has_perfect = false;
    for (const auto& p : one.points)
        if (p.recall == 1.0 && p.precision == 1.0) has_perfect = true;
    CHECK(has_perfect);

    MetricsDataset none;
    CHECK_THROWS_AS(build_pr_curve(none, 0.5), ValidationError);
}

TEST_CASE("interpolated precision and n-point averages on hand fixtures") {
    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 10, 10}});
    ds.detections.push_back({"a", {500, 500, 520, 520}, 0.9}); // FP ranked first
    ds.detections.push_back({"a", {0, 0, 10, 10}, 0.8});       // TP second

    const PRCurve curve = build_pr_curve(ds, 0.5);
    CHECK(interpolate_precision(curve, 0.0) == 1.0);
    CHECK(interpolate_precision(curve, 1.0) == Approx(0.5));
    CHECK(ap_all_point(curve) == Approx(0.5));

    // zero-TP detector: only the forced endpoint contributes
    MetricsDataset bad;
    bad.ground_truths.push_back({"a", {0, 0, 10, 10}});
    bad.detections.push_back({"a", {500, 500, 520, 520}, 0.9});
    const PRCurve zc = build_pr_curve(bad, 0.5);
    CHECK(ap_n_point(zc, 11) == Approx(1.0 / 11.0));
    CHECK(ap_n_point(zc, 101) == Approx(1.0 / 101.0));
    CHECK(ap_all_point(zc) == 0.0);

    // perfect detector
    MetricsDataset good;
    good.ground_truths.push_back({"a", {0, 0, 10, 10}});
    good.detections.push_back({"a", {0, 0, 10, 10}, 0.9});
    const PRCurve gc = build_pr_curve(good, 0.5);
    CHECK(ap_n_point(gc, 11) == Approx(1.0));
    CHECK(ap_all_point(gc) == Approx(1.0));

    CHECK_THROWS_AS(ap_n_point(gc, 1), ValidationError);
}

TEST_CASE("interpolated precision is a non-increasing staircase in [0,1]") {
    Rng rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        const MetricsDataset ds = random_instance(rng);
        if (ds.gt_count() == 0) continue;
        const PRCurve curve = build_pr_curve(ds, 0.5);
        double prev = 2.0;
        for (int i = 0; i <= 200; ++i) {
            const double v = interpolate_precision(curve, i / 200.0);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v <= prev + 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("curves and AP variants match the dense-sweep oracles") {
    Rng rng(52);
    int checked = 0;
    for (int trial = 0; trial < 80; ++trial) {
        const MetricsDataset ds = random_instance(rng);
        if (ds.gt_count() == 0 || ds.detections.empty()) continue;
        ++checked;
        for (double t : {0.5, 0.75}) {
            const PRCurve curve = build_pr_curve(ds, t);
            const auto oracle = oracles::oracle_curve(ds, t);
            REQUIRE(curve.points.size() == oracle.size());
            for (std::size_t k = 0; k < oracle.size(); ++k) {
                CHECK(curve.points[k].tau == Approx(oracle[k].tau).margin(1e-12));
                CHECK(curve.points[k].recall == Approx(oracle[k].recall).margin(1e-12));
                CHECK(curve.points[k].precision == Approx(oracle[k].precision).margin(1e-12));
            }
            CHECK(std::abs(ap_all_point(curve) - oracles::oracle_ap_integral(oracle)) < 1e-9);
            CHECK(std::abs(ap_n_point(curve, 11) - oracles::oracle_ap_n(oracle, 11)) < 1e-9);
            CHECK(std::abs(ap_n_point(curve, 101) - oracles::oracle_ap_n(oracle, 101)) < 1e-9);
        }
        CHECK(average_recall(ds, 1) == oracles::oracle_ar(ds, 1));
        CHECK(average_recall(ds, 10) == oracles::oracle_ar(ds, 10));
    }
    CHECK(checked > 40);
}

TEST_CASE("AP is non-increasing in the IoU threshold") {
    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const MetricsDataset ds = random_instance(rng);
        if (ds.gt_count() == 0 || ds.detections.empty()) continue;
        double prev = 1.0 + 1e-12;
        for (double t : {0.5, 0.6, 0.7, 0.8, 0.9}) {
            const double ap = ap_all_point(build_pr_curve(ds, t));
            CHECK(ap <= prev + 1e-12);
            prev = ap;
        }
    }
}

TEST_CASE("average recall formula and proposal limits") {
    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 100, 100}});
    ds.ground_truths.push_back({"b", {0, 0, 100, 100}});
    // a shrunk box [0,0,100,h] against [0,0,100,100] has IoU = h/100
    ds.detections.push_back({"a", {0, 0, 100, 75}, 0.9}); // IoU 0.75
    ds.detections.push_back({"b", {0, 0, 100, 95}, 0.9}); // IoU 0.95
    CHECK(average_recall(ds, 10) == Approx(0.25 + 0.45));

    // all below 0.5 contribute nothing
    MetricsDataset low;
    low.ground_truths.push_back({"a", {0, 0, 100, 100}});
    low.detections.push_back({"a", {0, 0, 100, 40}, 0.9});
    CHECK(average_recall(low, 10) == 0.0);

    // proposal limit: the better box is ranked second by confidence
    MetricsDataset ranked;
    ranked.ground_truths.push_back({"a", {0, 0, 100, 100}});
    ranked.detections.push_back({"a", {0, 0, 100, 60}, 0.9}); // IoU 0.6
    ranked.detections.push_back({"a", {0, 0, 100, 95}, 0.8}); // IoU 0.95
    CHECK(average_recall(ranked, 1) == Approx(0.2));
    CHECK(average_recall(ranked, 10) == Approx(0.9));
    CHECK(average_recall(ranked, 10) >= average_recall(ranked, 1));
}

TEST_CASE("TP + FN partitions the ground-truth set") {
    Rng rng(54);
    for (int trial = 0; trial < 30; ++trial) {
        const MetricsDataset ds = random_instance(rng);
        if (ds.gt_count() == 0) continue;
        for (double t : {0.5, 0.75, 0.95}) {
            const MatchResult m = match_detections(ds, t);
            std::size_t matched_gts = 0;
            // every TP consumed exactly one ground truth
            CHECK(m.tp_count <= ds.gt_count());
            CHECK(m.tp_count <= ds.detections.size());
            for (bool f : m.is_tp) matched_gts += f ? 1 : 0;
            CHECK(matched_gts == m.tp_count);
        }
    }
}

TEST_CASE("ap report aggregates") {
    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 10, 10}});
    ds.detections.push_back({"a", {0, 0, 10, 10}, 0.8});
    const ApReport r = make_ap_report(ds);
    CHECK(r.ap50 == Approx(1.0));
    CHECK(r.ap75 == Approx(1.0));
    CHECK(r.ap_50_5_95 == Approx(1.0));
    CHECK(r.ar1 == Approx(1.0));
    CHECK(r.mean_confidence == Approx(0.8));
    CHECK(r.mean_iou == Approx(1.0));
    CHECK(r.n_detections == 1);
    CHECK(r.n_ground_truths == 1);

    const ApReport empty = make_ap_report(MetricsDataset{});
    CHECK(empty.ap50 == 0.0);
    CHECK(empty.n_detections == 0);
}

TEST_CASE("ap variants threshold split") {
    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 100, 100}});
    ds.detections.push_back({"a", {0, 0, 100, 60}, 0.9}); // IoU 0.6 in (0.5, 0.75)
    const ApVariants v = ap_variants(ds);
    CHECK(v.ap50 > 0.0);
    CHECK(v.ap75 == 0.0);
    // the sweep value is the mean over the ten thresholds
    double acc = 0.0;
    for (int i = 0; i < 10; ++i) acc += ap_all_point(build_pr_curve(ds, (50 + 5 * i) / 100.0));
    CHECK(v.ap_50_5_95 == Approx(acc / 10.0));
}

TEST_CASE("stratified sampling bins and exclusions") {
    const Binning bins = default_binning();
    CHECK(bins.bin_of(0.65).value() == 1);
    CHECK(bins.bin_of(0.7).value() == 2);  // boundary joins the upper bin
    CHECK(bins.bin_of(1.0).value() == 4);  // last bin closed
    CHECK(bins.bin_of(0.0).value() == 0);
    CHECK_FALSE(bins.bin_of(1.5).has_value());
    CHECK(bin_label(0) == "A");
    CHECK(bin_label(4) == "E");

    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 100, 100}});
    ds.ground_truths.push_back({"b", {0, 0, 100, 100}});
    ds.detections.push_back({"a", {0, 0, 100, 65}, 0.9});     // IoU 0.65 -> B
    ds.detections.push_back({"a", {0, 0, 100, 95}, 0.8});     // IoU 0.95 -> E
    ds.detections.push_back({"b", {500, 500, 600, 600}, 0.7}); // IoU 0 -> excluded
    const StratifiedSample s = stratified_sample(ds, default_binning());
    CHECK(s.bins[1].detections.size() == 1);
    CHECK(s.bins[4].detections.size() == 1);
    CHECK(s.excluded.detections.size() == 1);
    CHECK(s.bin_of_detection[0] == 1);
    CHECK(s.bin_of_detection[2] == s.bins.size());
    // each bin's ground-truth set holds the distinct associated boxes
    CHECK(s.bins[1].ground_truths.size() == 1);
    CHECK(s.bins[1].ground_truths[0].image_id == "a");
}

TEST_CASE("area rule excludes small associated ground truths") {
    MetricsDataset ds;
    ds.ground_truths.push_back({"a", {0, 0, 100, 100}}); // area 10000 (largest)
    ds.ground_truths.push_back({"a", {200, 200, 250, 250}}); // area 2500, below cutoff
    ds.detections.push_back({"a", {0, 0, 100, 95}, 0.9});
    ds.detections.push_back({"a", {200, 200, 250, 245}, 0.8});
    const StratifiedSample s = stratified_sample(ds, default_binning(), 0.025);
    // detection on the small ground truth is excluded by the area rule
    CHECK(s.bin_of_detection[0] < s.bins.size());
    CHECK(s.bin_of_detection[1] == s.bins.size());

    // a permissive predicate keeps it
    const StratifiedSample all = stratified_sample(
        ds, default_binning(), 0.025, [](double, double, double) { return true; });
    CHECK(all.bin_of_detection[1] < all.bins.size());
}

TEST_CASE("stratified sampling partitions every detection exactly once") {
    Rng rng(55);
    for (int trial = 0; trial < 25; ++trial) {
        const MetricsDataset ds = random_instance(rng);
        if (ds.detections.empty() && ds.ground_truths.empty()) continue;
        const StratifiedSample s = stratified_sample(ds, default_binning());
        std::size_t total = s.excluded.detections.size();
        for (const auto& bin : s.bins) total += bin.detections.size();
        CHECK(total == ds.detections.size());
        REQUIRE(s.bin_of_detection.size() == ds.detections.size());
        // membership flags agree with the per-bin datasets
        std::vector<std::size_t> counts(s.bins.size() + 1, 0);
        for (std::size_t b : s.bin_of_detection) ++counts[std::min(b, s.bins.size())];
        for (std::size_t b = 0; b < s.bins.size(); ++b)
            CHECK(counts[b] == s.bins[b].detections.size());
        CHECK(counts[s.bins.size()] == s.excluded.detections.size());
    }
}
