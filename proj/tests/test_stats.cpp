#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "turreteval/rng.hpp"
#include "turreteval/stats.hpp"

using namespace turreteval;
using Catch::Approx;

TEST_CASE("population statistics on known samples") {
    const std::vector<double> x{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    const SampleStats s = basic_stats(x);
    CHECK(s.n == 8);
    CHECK(s.mean == Approx(5.0));
    CHECK(s.variance == Approx(4.0)); // population convention (1/N)
    CHECK(s.stddev == Approx(2.0));

    const SampleStats one = basic_stats({3.5});
    CHECK(one.variance == 0.0);
    CHECK(one.mean == 3.5);

    CHECK_THROWS_AS(basic_stats({}), ValidationError);
}

TEST_CASE("covariance") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{2.0, 4.0, 6.0, 8.0};
    CHECK(covariance(x, y) == Approx(2.5)); // 2 * var_pop(x) = 2 * 1.25
    CHECK(covariance(x, x) == Approx(basic_stats(x).variance));
    CHECK_THROWS_AS(covariance(x, {1.0}), ValidationError);
    CHECK_THROWS_AS(covariance({}, {}), ValidationError);
}

TEST_CASE("correlation endpoints and degenerate cases") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * v - 7.0);
    REQUIRE(correlation(x, y).has_value());
    CHECK(*correlation(x, y) == Approx(1.0));
    for (double& v : y) v = -v;
    CHECK(*correlation(x, y) == Approx(-1.0));

    const std::vector<double> flat{2.0, 2.0, 2.0, 2.0, 2.0};
    CHECK_FALSE(correlation(x, flat).has_value());
    CHECK_FALSE(correlation(flat, x).has_value());

    // clamped against rounding excursions
    Rng rng(71);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> a, b;
        for (int i = 0; i < 40; ++i) {
            a.push_back(rng.normal(0.0, 1.0));
            b.push_back(rng.normal(0.0, 1.0));
        }
        const auto r = correlation(a, b);
        REQUIRE(r.has_value());
        CHECK(*r >= -1.0);
        CHECK(*r <= 1.0);
    }
}

TEST_CASE("variance decomposition identity closes on random samples") {
    Rng rng(72);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform() * 60);
        std::vector<double> bg, br, rg;
        for (int i = 0; i < n; ++i) {
            const double a = std::abs(rng.normal(1.0, 0.5));
            const double b = std::abs(rng.normal(0.5, 0.3));
            bg.push_back(a);
            br.push_back(b);
            // any rg works: the identity holds pointwise through eps
            rg.push_back(std::abs(a - b) + rng.uniform() * (a + b - std::abs(a - b)));
        }
        const DecompositionReport d = variance_decomposition(bg, br, rg);
        const double scale = std::max({d.var_rg, d.var_bg, d.var_br, 1e-300});
        CHECK(std::abs(d.residual) <= 1e-10 * scale);
        CHECK(d.two_term == Approx(d.var_bg + d.var_br));
        CHECK(d.n == static_cast<std::size_t>(n));
    }
}

TEST_CASE("two-term budget approximates the full variance when slack is small") {
    // br nearly constant and eps tiny: var_rg ~= var_bg + var_br
    Rng rng(73);
    std::vector<double> bg, br, rg;
    for (int i = 0; i < 400; ++i) {
        const double a = 10.0 + rng.normal(0.0, 1.0);
        const double b = 0.5 + rng.normal(0.0, 0.02);
        bg.push_back(a);
        br.push_back(b);
        rg.push_back(a + b - rng.uniform() * 1e-3); // near-collinear geometry
    }
    const DecompositionReport d = variance_decomposition(bg, br, rg);
    CHECK(std::abs(d.approx_rel_err) < 0.10);
    CHECK(d.var_eps < 1e-5);
}

TEST_CASE("decomposition input validation") {
    CHECK_THROWS_AS(variance_decomposition({1.0}, {1.0, 2.0}, {1.0}), ValidationError);
    CHECK_THROWS_AS(variance_decomposition({}, {}, {}), ValidationError);
}

TEST_CASE("histogram construction") {
    const std::vector<double> data{0.0, 0.1, 0.24, 0.25, 0.49, 0.5, 1.0};
    const Histogram h = make_histogram(data, 0.25);
    REQUIRE(h.counts.size() == 5);
    CHECK(h.counts[0] == 3); // [0, 0.25)
    CHECK(h.counts[1] == 2); // [0.25, 0.5)
    CHECK(h.counts[2] == 1); // [0.5, 0.75)
    CHECK(h.counts[3] == 0);
    CHECK(h.counts[4] == 1); // 1.0 lands in the final bin
    CHECK(h.total == data.size());
    CHECK(h.bin_lo(0) == 0.0);
    CHECK(h.bin_lo(4) == Approx(1.0));

    std::size_t mass = 0;
    for (std::size_t c : h.counts) mass += c;
    CHECK(mass == data.size());
}

TEST_CASE("histogram conventions and validation") {
    // the maximum value always lands in the last bin
    const Histogram edge = make_histogram({0.75}, 0.25);
    REQUIRE(edge.counts.size() == 4);
    CHECK(edge.counts[3] == 1);

    const Histogram empty = make_histogram({}, 0.25);
    CHECK(empty.counts.empty());
    CHECK(empty.total == 0);

    CHECK_THROWS_AS(make_histogram({1.0}, 0.0), ValidationError);
    CHECK_THROWS_AS(make_histogram({1.0}, -0.5), ValidationError);
    CHECK_THROWS_AS(make_histogram({-0.1}, 0.25), ValidationError);

    // nonzero origin shifts the bins
    const Histogram shifted = make_histogram({1.1, 1.3}, 0.25, 1.0);
    CHECK(shifted.counts[0] == 1);
    CHECK(shifted.counts[1] == 1);
    CHECK(shifted.bin_lo(1) == Approx(1.25));

    // mass conservation on random data
    Rng rng(74);
    std::vector<double> data;
    for (int i = 0; i < 1000; ++i) data.push_back(std::abs(rng.normal(0.0, 2.0)));
    const Histogram h = make_histogram(data, 0.25);
    std::size_t mass = 0;
    for (std::size_t c : h.counts) mass += c;
    CHECK(mass == data.size());
    CHECK(h.total == data.size());
}
