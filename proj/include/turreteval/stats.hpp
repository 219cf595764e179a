#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "errors.hpp"

namespace turreteval {

// Population (1/N) statistics throughout; matches the analysis formulas this
// suite reproduces.
struct SampleStats {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double variance = 0.0;
};

inline SampleStats basic_stats(const std::vector<double>& x) {
    if (x.empty()) throw ValidationError("basic_stats: empty sample");
    SampleStats s;
    s.n = x.size();
    for (double v : x) s.mean += v;
    s.mean /= static_cast<double>(s.n);
    for (double v : x) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= static_cast<double>(s.n);
    s.stddev = std::sqrt(s.variance);
    return s;
}

inline double covariance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("covariance: length mismatch");
    if (x.empty()) throw ValidationError("covariance: empty sample");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] - mx) * (y[i] - my);
    return c / static_cast<double>(x.size());
}

// Pearson correlation; nullopt when either variable is constant (zero std)
// rather than a coerced value.
inline std::optional<double> correlation(const std::vector<double>& x,
                                         const std::vector<double>& y) {
    const SampleStats sx = basic_stats(x);
    const SampleStats sy = basic_stats(y);
    if (x.size() != y.size()) throw ValidationError("correlation: length mismatch");
    if (sx.stddev == 0.0 || sy.stddev == 0.0) return std::nullopt;
    double r = covariance(x, y) / (sx.stddev * sy.stddev);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

// Expansion of Var(||R_rg||) through ||R_rg|| = ||R_bg|| + ||R_br|| - eps with
// eps the triangle-inequality slack. Algebraic identity:
//   var_rg = var_bg + var_br + var_eps
//          + 2 Cov(bg,br) - 2 Cov(bg,eps) - 2 Cov(br,eps).
struct DecompositionReport {
    std::size_t n = 0;
    double var_rg = 0.0, var_bg = 0.0, var_br = 0.0, var_eps = 0.0;
    double cov_bg_br = 0.0, cov_bg_eps = 0.0, cov_br_eps = 0.0;
    double two_term = 0.0;       // var_bg + var_br
    double residual = 0.0;       // lhs - rhs of the identity
    double approx_rel_err = 0.0; // (two_term - var_rg)/var_rg, 0 when var_rg = 0
};

inline DecompositionReport variance_decomposition(const std::vector<double>& bg,
                                                  const std::vector<double>& br,
                                                  const std::vector<double>& rg) {
    if (bg.size() != br.size() || bg.size() != rg.size())
        throw ValidationError("variance_decomposition: sample length mismatch");
    if (bg.empty()) throw ValidationError("variance_decomposition: empty samples");

    std::vector<double> eps(bg.size());
    for (std::size_t i = 0; i < bg.size(); ++i) eps[i] = bg[i] + br[i] - rg[i];

    DecompositionReport d;
    d.n = bg.size();
    d.var_rg = basic_stats(rg).variance;
    d.var_bg = basic_stats(bg).variance;
    d.var_br = basic_stats(br).variance;
    d.var_eps = basic_stats(eps).variance;
    d.cov_bg_br = covariance(bg, br);
    d.cov_bg_eps = covariance(bg, eps);
    d.cov_br_eps = covariance(br, eps);
    d.two_term = d.var_bg + d.var_br;
    const double rhs = d.var_bg + d.var_br + d.var_eps + 2.0 * d.cov_bg_br -
                       2.0 * d.cov_bg_eps - 2.0 * d.cov_br_eps;
    d.residual = d.var_rg - rhs;
    d.approx_rel_err = d.var_rg != 0.0 ? (d.two_term - d.var_rg) / d.var_rg : 0.0;
    return d;
}

struct Histogram {
    double lo = 0.0;
    double bin_width = 1.0;
    std::vector<std::size_t> counts;
    std::size_t total = 0;

    double bin_lo(std::size_t i) const { return lo + bin_width * static_cast<double>(i); }
};

// Fixed-width bins from lo; values land in floor((v - lo)/width), the final
// bin absorbs v == upper edge so mass is conserved.
inline Histogram make_histogram(const std::vector<double>& data, double bin_width,
                                double lo = 0.0) {
    if (!(bin_width > 0.0)) throw ValidationError("make_histogram: bin width must be positive");
    Histogram h;
    h.lo = lo;
    h.bin_width = bin_width;
    if (data.empty()) return h;
    double hi = lo;
    for (double v : data) {
        if (v < lo) throw ValidationError("make_histogram: value below histogram origin");
        hi = std::max(hi, v);
    }
    const std::size_t nbins = static_cast<std::size_t>(std::floor((hi - lo) / bin_width)) + 1;
    h.counts.assign(nbins, 0);
    for (double v : data) {
        std::size_t k = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
        if (k >= nbins) k = nbins - 1;
        ++h.counts[k];
        ++h.total;
    }
    return h;
}

} // namespace turreteval
