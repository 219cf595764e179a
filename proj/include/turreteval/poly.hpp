#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "units.hpp"

namespace turreteval {

// Polynomials are coefficient vectors in ascending powers: p[k] * x^k.
using Poly = std::vector<double>;

inline Poly poly_mul(const Poly& p, const Poly& q) {
    Poly r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

inline Poly poly_add(const Poly& p, const Poly& q) {
    Poly r(std::max(p.size(), q.size()), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) r[i] += p[i];
    for (std::size_t i = 0; i < q.size(); ++i) r[i] += q[i];
    return r;
}

inline std::complex<double> poly_eval(const Poly& p, std::complex<double> x) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

// Rational discrete-time transfer function in z^-1:
//   H(z) = (b0 + b1 z^-1 + ...) / (1 + a1 z^-1 + ...), a[0] normalized to 1.
struct DiscreteTF {
    std::vector<double> b;
    std::vector<double> a;
};

// Tustin substitution s <- 2 fs (1 - z^-1)/(1 + z^-1) applied to num/den in s.
// Each power s^i maps to (2 fs)^i (1 - z^-1)^i (1 + z^-1)^(n-i) over the common
// denominator (1 + z^-1)^n.
inline DiscreteTF bilinear(const Poly& num, const Poly& den, double fs) {
    if (!(fs > 0.0)) throw ValidationError("bilinear: sample rate must be positive");
    const std::size_t n = std::max(num.size(), den.size()) - 1;
    const double k = 2.0 * fs;

    auto term = [&](double ci, std::size_t i) {
        Poly p{ci * std::pow(k, static_cast<double>(i))};
        for (std::size_t j = 0; j < i; ++j) p = poly_mul(p, Poly{1.0, -1.0});
        for (std::size_t j = 0; j < n - i; ++j) p = poly_mul(p, Poly{1.0, 1.0});
        return p;
    };

    Poly bz(n + 1, 0.0), az(n + 1, 0.0);
    for (std::size_t i = 0; i < num.size(); ++i) bz = poly_add(bz, term(num[i], i));
    for (std::size_t i = 0; i < den.size(); ++i) az = poly_add(az, term(den[i], i));

    if (az[0] == 0.0 || !std::isfinite(az[0]))
        throw NumericError("bilinear: transformed denominator has zero leading coefficient");
    DiscreteTF tf{bz, az};
    const double a0 = tf.a[0];
    for (double& c : tf.b) c /= a0;
    for (double& c : tf.a) c /= a0;
    return tf;
}

// Frequency response of H(z) at physical frequency w (rad/s) for sample rate fs.
inline std::complex<double> dtf_response(const DiscreteTF& tf, double w, double fs) {
    const std::complex<double> zinv = std::exp(std::complex<double>(0.0, -w / fs));
    return poly_eval(Poly(tf.b.begin(), tf.b.end()), zinv) /
           poly_eval(Poly(tf.a.begin(), tf.a.end()), zinv);
}

// Direct-form II transposed filter with persistent state.
class Filter {
public:
    explicit Filter(DiscreteTF tf) : tf_(std::move(tf)), state_(order(), 0.0) {}

    double step(double x) {
        const std::size_t nb = tf_.b.size(), na = tf_.a.size();
        const double y = (nb > 0 ? tf_.b[0] * x : 0.0) + (order() > 0 ? state_[0] : 0.0);
        for (std::size_t i = 0; i < state_.size(); ++i) {
            const double bi = (i + 1 < nb) ? tf_.b[i + 1] : 0.0;
            const double ai = (i + 1 < na) ? tf_.a[i + 1] : 0.0;
            const double next = (i + 1 < state_.size()) ? state_[i + 1] : 0.0;
            state_[i] = bi * x - ai * y + next;
        }
        return y;
    }

    std::vector<double> run(const std::vector<double>& in) {
        std::vector<double> out(in.size());
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = step(in[i]);
        return out;
    }

    void reset() { std::fill(state_.begin(), state_.end(), 0.0); }

private:
    std::size_t order() const { return std::max(tf_.b.size(), tf_.a.size()) - 1; }
    DiscreteTF tf_;
    std::vector<double> state_;
};

// Impulse-response boundedness probe: compares peak magnitude of the tail
// against the head. Catches growing responses without a root finder.
inline bool impulse_stable(const DiscreteTF& tf, std::size_t n = 20000) {
    Filter f(tf);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = std::abs(f.step(i == 0 ? 1.0 : 0.0));
        if (!std::isfinite(y)) return false;
        if (i < n / 2) head = std::max(head, y);
        else tail = std::max(tail, y);
    }
    return tail <= std::max(head, 1e-300);
}

} // namespace turreteval
