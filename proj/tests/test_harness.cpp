#include "doctest.h"

#include "lipcmo/harness.hpp"
#include "lipcmo/oscillation.hpp"
#include "lipcmo/presets.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace lipcmo;

namespace {

KernelSpec sgn1() { return KernelSpec::line(1.0, -1.0, 0.0); }

GridFunction linear_b(const GridSpec& g)
{
    return GridFunction::sample(g, [](const Point& x) { return x[0]; });
}

} // namespace

TEST_CASE("median values")
{
    GridSpec g(box(0.0, 1.0, 1), 1024);
    CHECK(median_value(GridFunction::constant(g, 4.0), g.domain()) == 4.0);
    auto chi = GridFunction::sample(g, [](const Point& x) { return x[0] <= 1.0 / 3.0 ? 1.0 : 0.0; });
    CHECK(median_value(chi, g.domain()) == 0.0);
    CHECK(median_value(linear_b(g), g.domain()) == doctest::Approx(0.5).epsilon(g.cell_size()));
}

TEST_CASE("median satisfies both measure inequalities")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> level(0, 4);
    for (int t = 0; t < 1000; ++t) {
        GridSpec g(box(0.0, 1.0, 1), 64);
        Eigen::ArrayXd v(g.size());
        for (Index i = 0; i < v.size(); ++i)
            v[i] = std::floor(5.0 * u(rng)); // many ties
        GridFunction b(g, v);
        double s = std::ldexp(1.0, -level(rng));
        Cube q = Cube::from_lower(point(std::floor(u(rng) / s) * s), s);
        double m = median_value(b, q);
        Index above = 0, below = 0, total = 0;
        for_each_cell(g, g.cells(q), [&](Index i) {
            above += b[i] > m;
            below += b[i] < m;
            ++total;
        });
        CHECK(2 * above <= total);
        CHECK(2 * below <= total);
    }
}

TEST_CASE("median construction, n = 1, b = x")
{
    GridSpec g(box(-16.0, 16.0, 1), 1024);
    auto b = linear_b(g);
    auto mc = build_median_sets(b, sgn1(), Cube::from_lower(point(0.0), 1.0), 0.25);
    CHECK(mc.p.center()[0] < mc.q.center()[0]);
    CHECK(mc.k0 > 10.0);
    CHECK(mc.m_b == doctest::Approx(mc.p.center()[0]).epsilon(g.cell_size()).scale(1.0));
    CHECK(mc.e1.size() == 32);
    CHECK(mc.e2.size() <= 1);
    CHECK(mc.f1.size() == 16);
    CHECK(mc.f2.size() == 16);
    CHECK(mc.checks.ok());
    CHECK(mc.checks.pairs > 0);
    CHECK(mc.checks.sign_failures == 0);
    CHECK(mc.checks.median_failures == 0);
    CHECK(mc.checks.kernel_failures == 0);
    CHECK(mc.checks.max_small_fraction == 0.0);
}

TEST_CASE("median construction, constant b")
{
    GridSpec g(box(-16.0, 16.0, 1), 1024);
    auto mc = build_median_sets(GridFunction::constant(g, 2.0), sgn1(), Cube::from_lower(point(0.0), 1.0), 0.25);
    CHECK(mc.e1.size() == 32);
    CHECK(mc.e2.size() == 32);
    CHECK(mc.checks.ok());
}

TEST_CASE("median construction, n = 2, cos kernel")
{
    GridSpec g(box(-8.0, 8.0, 2), 128);
    auto b = GridFunction::sample(g, [](const Point& x) { return std::sin(x[0]) + 0.3 * x[1]; });
    auto k = parse_kernel("cos", 2, 0.0);
    auto mc = build_median_sets(b, k, Cube(point(4.0, 0.0), 0.5), 0.25);
    CHECK(mc.eps0 == doctest::Approx(0.5).epsilon(0.01));
    CHECK(mc.checks.max_small_fraction < 0.25);
    CHECK(mc.checks.ok());
    CHECK(mc.checks.cover);
    CHECK(mc.checks.f_measure);
}

TEST_CASE("median construction runs out of room")
{
    GridSpec g(box(-2.0, 2.0, 1), 256);
    CHECK_THROWS_AS(build_median_sets(linear_b(g), sgn1(), Cube::from_lower(point(0.0), 1.0), 0.25),
                    ConstructionError);
}

TEST_CASE("lower bound ratio")
{
    GridSpec g(box(-8.0, 8.0, 2), 128);
    auto k = parse_kernel("sgn", 2, 0.0);
    WeightSpec w(GridFunction::constant(g, 1.0), 1.5);

    auto deg = lower_bound_ratio(GridFunction::constant(g, 1.0), k, w, Cube(point(4.0, 0.0), 0.5), 1, 1.0);
    CHECK(deg.degenerate);

    auto b = GridFunction::sample(g, [](const Point& x) { return x[0]; });
    std::vector<double> ratios;
    for (double cx : {2.0, 4.0, 6.0})
        for (double s : {0.25, 0.5}) {
            auto r = lower_bound_ratio(b, k, w, Cube(point(cx, cx - 4.0), s), 1, 1.0);
            CHECK_FALSE(r.degenerate);
            CHECK(r.q == doctest::Approx(6.0));
            CHECK(r.ratio > 0.0);
            ratios.push_back(r.ratio);
        }
    auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*lo / *hi >= 0.1);

    WeightSpec wrong(GridFunction::constant(g, 1.0), 1.5, 3.0);
    CHECK_THROWS_AS(lower_bound_ratio(b, k, wrong, Cube(point(4.0, 0.0), 0.5), 1, 1.0), ArgumentError);
}

TEST_CASE("compactness lower probe")
{
    GridSpec g(box(-8.0, 8.0, 2), 128);
    auto k = parse_kernel("sgn", 2, 0.0);
    WeightSpec w(GridFunction::constant(g, 1.0), 1.5);
    auto b = GridFunction::sample(g, [](const Point& x) { return x[0]; });
    Cube q(point(4.0, 0.0), 0.5);

    auto r = compactness_lower_probe(b, k, w, q, 1, 1.0, 0.01);
    CHECK(r.ratio > 0.0);
    CHECK(r.e.side() <= 0.5 * q.side() + 1e-12);
    CHECK(q.scaled(2.0).contains(r.e, 1e-12));

    auto ecells = probe_e_cells(b, k, q, 1.0);
    std::vector<Index> half(ecells.begin(), ecells.begin() + static_cast<std::ptrdiff_t>(ecells.size() / 2));
    auto rh = compactness_lower_probe(b, k, w, q, 1, 1.0, 0.01, half);
    CHECK(rh.excluded == static_cast<Index>(half.size()));
    CHECK(rh.ratio > 0.0);
    CHECK(rh.ratio >= r.ratio / 4.0);

    // Doubling b scales lhs by 2^m; rhs follows õ^m times the min factor.
    GridFunction b2(g, 2.0 * b.values());
    auto r2 = compactness_lower_probe(b2, k, w, q, 1, 1.0, 0.01);
    CHECK(r2.lhs == doctest::Approx(2.0 * r.lhs).epsilon(1e-9));
    double min1 = std::min(std::pow(r.osc, 4.0), 1.0), min2 = std::min(std::pow(r2.osc, 4.0), 1.0);
    CHECK(r2.ratio == doctest::Approx(r.ratio * min1 / min2).epsilon(1e-9));

    CHECK_THROWS_AS(compactness_lower_probe(b, k, w, q, 1, 1.0, 10.0), PreconditionError);
    CHECK_THROWS_AS(compactness_lower_probe(b, k, w, q, 1, 1.0, 0.01, ecells), PreconditionError);
}

TEST_CASE("annulus decay")
{
    GridSpec g(box(-16.0, 16.0, 1), 4096);
    auto b = GridFunction::sample(g, [](const Point& x) { return sgnpow(x, 0.5); });
    Cube q(point(0.0), 1.0 / 16);
    WeightSpec one(GridFunction::constant(g, 1.0), 1.7);
    auto r = annulus_upper_decay(b, sgn1(), one, q, 1, 0.5, 3, 7);
    CHECK(r.fitted);
    CHECK(r.points.size() == 5);
    CHECK(r.slope < 0.0);

    WeightSpec pw(GridFunction::sample(g, [](const Point& x) { return std::pow(std::abs(x[0]), 0.125); }), 1.7);
    auto rp = annulus_upper_decay(b, sgn1(), pw, q, 1, 0.5, 3, 7);
    CHECK(rp.fitted);
    CHECK(rp.slope < 0.0);

    auto rz = annulus_upper_decay(GridFunction::constant(g, 1.0), sgn1(), one, q, 1, 0.5, 3, 7);
    CHECK_FALSE(rz.fitted);
    for (const auto& pt : rz.points)
        CHECK(pt.norm == 0.0);

    // Annuli past the grid are dropped with a warning.
    auto rt = annulus_upper_decay(b, sgn1(), one, q, 1, 0.5, 3, 12);
    CHECK_FALSE(rt.warnings.empty());
    CHECK(rt.points.back().d < 12);
}

TEST_CASE("compactness criterion probe")
{
    GridSpec g(box(-4.0, 4.0, 1), 1024);
    auto w = GridFunction::constant(g, 1.0);
    std::vector<GridFunction> ball;
    for (int j = 1; j <= 4; ++j) {
        double s = std::ldexp(1.0, -j);
        auto f = GridFunction::sample(g, [s](const Point& x) { return std::abs(x[0]) < 0.5 * s ? std::pow(s, -1.0 / 1.5) : 0.0; });
        ball.push_back(f);
    }
    WeightSpec ws(w, 1.5);
    CommutatorSpec op{sgn1(), GridFunction::sample(g, [](const Point& x) { return bump(x); }), 1, {}};
    auto r = fk_compactness_probe(op, ws, 1.5, 6.0, ball, {0.5, 1.0, 4.0}, {0.25, 0.125, 0.0625});
    CHECK(r.bound > 0.0);
    REQUIRE(r.tail.size() == 3);
    CHECK(r.tail[0].parameter == 0.5);
    CHECK(r.tail[2].value == 0.0); // nothing lies outside the whole grid
    REQUIRE(r.modulus.size() == 3);
    CHECK(r.modulus[0].parameter == 0.25);
    CHECK(r.modulus[2].value <= r.modulus[0].value);

    CommutatorSpec flat{sgn1(), GridFunction::constant(g, 1.0), 1, {}};
    auto z = fk_compactness_probe(flat, ws, 1.5, 6.0, ball, {0.5}, {0.25});
    CHECK(z.bound == 0.0);
    CHECK(z.tail[0].value == 0.0);

    std::vector<GridFunction> big{GridFunction::constant(g, 1.0)};
    CHECK_THROWS_AS(fk_compactness_probe(op, ws, 1.5, 6.0, big, {0.5}, {0.25}), ArgumentError);
}
