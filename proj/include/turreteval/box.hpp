#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "units.hpp"

namespace turreteval {

struct PixelVector {
    double x = 0.0;
    double y = 0.0;

    PixelVector operator+(const PixelVector& o) const { return {x + o.x, y + o.y}; }
    PixelVector operator-(const PixelVector& o) const { return {x - o.x, y - o.y}; }
    double norm() const { return std::hypot(x, y); }
};

enum class Origin { TopLeft, BottomLeft, Center };

inline const char* origin_name(Origin o) {
    switch (o) {
        case Origin::TopLeft: return "top-left";
        case Origin::BottomLeft: return "bottom-left";
        case Origin::Center: return "center";
    }
    return "?";
}

inline Origin parse_origin(const std::string& s) {
    if (s == "top-left" || s == "topleft") return Origin::TopLeft;
    if (s == "bottom-left" || s == "bottomleft") return Origin::BottomLeft;
    if (s == "center" || s == "centre") return Origin::Center;
    throw ValidationError("unknown origin tag: " + s);
}

// Remap a pixel vector between origin conventions. Top-left has y increasing
// downward; bottom-left and center have y increasing upward.
inline PixelVector convert_origin(const PixelVector& v, Origin from, Origin to,
                                  const Calibration& cal) {
    const double w = cal.image_width_px;
    const double h = cal.image_height_px;
    // to top-left first
    PixelVector tl = v;
    switch (from) {
        case Origin::TopLeft: break;
        case Origin::BottomLeft: tl = {v.x, h - v.y}; break;
        case Origin::Center: tl = {v.x + w / 2.0, h / 2.0 - v.y}; break;
    }
    switch (to) {
        case Origin::TopLeft: return tl;
        case Origin::BottomLeft: return {tl.x, h - tl.y};
        case Origin::Center: return {tl.x - w / 2.0, h / 2.0 - tl.y};
    }
    return tl;
}

// Axis-aligned rectangle in top-left-origin pixel coordinates; corners are
// continuous reals, (x1,y1) upper-left and (x2,y2) lower-right.
struct BoundingBox {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }

    bool valid() const {
        return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
               std::isfinite(y2) && x1 >= 0.0 && y1 >= 0.0 && x1 <= x2 && y1 <= y2;
    }
};

struct DetectionRecord {
    std::string image_id;
    BoundingBox box;
    double confidence = 0.0; // in [0,1]
};

struct GroundTruthRecord {
    std::string image_id;
    BoundingBox box;
};

inline PixelVector centroid(const BoundingBox& b) {
    return {(b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0};
}

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double ax1 = std::max(a.x1, b.x1);
    const double ax2 = std::min(a.x2, b.x2);
    const double ay1 = std::max(a.y1, b.y1);
    const double ay2 = std::min(a.y2, b.y2);
    if (ax1 <= ax2 && ay1 <= ay2) return (ax2 - ax1) * (ay2 - ay1);
    return 0.0;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) throw NumericError("degenerate IoU: both boxes have zero area");
    return inter / uni;
}

// Angular distance between detected and ground-truth centroids, in NATO mils.
// Pixel offset -> meters -> exact subtense at range. Translation of both
// centroids by a common vector leaves the result unchanged.
inline double ai_error(const GroundTruthRecord& gt, const DetectionRecord& det,
                       const Calibration& cal) {
    if (gt.image_id != det.image_id) {
        throw ValidationError("ai_error: image_id mismatch ('" + gt.image_id + "' vs '" +
                              det.image_id + "')");
    }
    cal.validate();
    const PixelVector d = centroid(det.box) - centroid(gt.box);
    const double dist_m = px_to_m(d.norm(), cal);
    return rad_to_mil(offset_to_angle_exact(dist_m, cal.range_m));
}

} // namespace turreteval
