#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "box.hpp"
#include "errors.hpp"
#include "units.hpp"

namespace turreteval {

// Standard normal CDF via erfc; absolute accuracy well below 1e-10.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Impact-point distribution at one range: independent normals per axis, means
// in meters (biases), standard deviations in meters (dispersions).
struct ErrorBudget {
    double range_m = 0.0;
    double mu_x = 0.0, mu_y = 0.0;       // m
    double sigma_x = 1.0, sigma_y = 1.0; // m

    void validate() const {
        if (!(sigma_x > 0.0) || !(sigma_y > 0.0))
            throw ValidationError("error budget requires positive dispersions");
    }
};

struct BudgetTable {
    std::vector<ErrorBudget> rows;

    void validate() const {
        if (rows.empty()) throw ValidationError("budget table is empty");
        for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i].validate();
            if (i > 0 && !(rows[i].range_m > rows[i - 1].range_m))
                throw ValidationError("budget table ranges must be strictly increasing");
        }
    }

    // Linear interpolation in range; clamped beyond the span (sets *clamped).
    ErrorBudget interpolate(double range_m, bool* clamped = nullptr) const {
        validate();
        if (clamped) *clamped = false;
        if (range_m <= rows.front().range_m) {
            if (clamped) *clamped = range_m < rows.front().range_m;
            ErrorBudget b = rows.front();
            b.range_m = range_m;
            return b;
        }
        if (range_m >= rows.back().range_m) {
            if (clamped) *clamped = range_m > rows.back().range_m;
            ErrorBudget b = rows.back();
            b.range_m = range_m;
            return b;
        }
        std::size_t hi = 1;
        while (rows[hi].range_m < range_m) ++hi;
        const ErrorBudget& lo = rows[hi - 1];
        const ErrorBudget& up = rows[hi];
        const double f = (range_m - lo.range_m) / (up.range_m - lo.range_m);
        auto lerp = [&](double a, double b) { return a + (b - a) * f; };
        return {range_m, lerp(lo.mu_x, up.mu_x), lerp(lo.mu_y, up.mu_y),
                lerp(lo.sigma_x, up.sigma_x), lerp(lo.sigma_y, up.sigma_y)};
    }
};

// Total budget = table row at range plus the turret's contribution: the shot
// offset enters the bias, the noise-driven error std enters the dispersion in
// quadrature (independence assumed). Turret terms are per-axis meters.
struct TurretErrorTerms {
    double bias_x = 0.0, bias_y = 0.0;   // m (shot minus truth per axis)
    double sigma_x = 0.0, sigma_y = 0.0; // m (noise-driven, converted at range)
};

inline ErrorBudget compose_budget(const BudgetTable& table, double range_m,
                                  const TurretErrorTerms& turret, bool* clamped = nullptr) {
    ErrorBudget b = table.interpolate(range_m, clamped);
    b.mu_x += turret.bias_x;
    b.mu_y += turret.bias_y;
    b.sigma_x = std::sqrt(b.sigma_x * b.sigma_x + turret.sigma_x * turret.sigma_x);
    b.sigma_y = std::sqrt(b.sigma_y * b.sigma_y + turret.sigma_y * turret.sigma_y);
    return b;
}

struct HitResult {
    double p_h = 0.0;
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0; // m, target-centered frame
    ErrorBudget budget{};
};

// P_h over a rectangle in the target-centered frame: the ground-truth box
// supplies the half-width/half-height limits in meters, and every offset
// (ballistic bias plus shot-vs-truth offset) lives in the budget means.
inline HitResult probability_of_hit(const ErrorBudget& budget, const GroundTruthRecord& gt,
                                    const Calibration& cal) {
    budget.validate();
    cal.validate();
    if (!(gt.box.area() > 0.0))
        throw ValidationError("probability_of_hit: ground-truth box must have positive area");

    HitResult hr;
    const double half_w = px_to_m(gt.box.width(), cal) / 2.0;
    const double half_h = px_to_m(gt.box.height(), cal) / 2.0;
    hr.x1 = -half_w;
    hr.x2 = half_w;
    hr.y1 = -half_h;
    hr.y2 = half_h;
    hr.budget = budget;
    const double px = normal_cdf((hr.x2 - budget.mu_x) / budget.sigma_x) -
                      normal_cdf((hr.x1 - budget.mu_x) / budget.sigma_x);
    const double py = normal_cdf((hr.y2 - budget.mu_y) / budget.sigma_y) -
                      normal_cdf((hr.y1 - budget.mu_y) / budget.sigma_y);
    hr.p_h = std::clamp(px * py, 0.0, 1.0);
    return hr;
}

} // namespace turreteval
