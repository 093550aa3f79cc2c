#include "doctest.h"

#include "lipcmo/oscillation.hpp"
#include "lipcmo/presets.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace lipcmo;

namespace {

GridFunction linear01(Index res)
{
    return GridFunction::sample(GridSpec(box(0.0, 1.0, 1), res), [](const Point& x) { return x[0]; });
}

GridFunction sgnpow_grid(double a, Index res, double half = 1.0)
{
    return GridFunction::sample(GridSpec(box(-half, half, 1), res), [a](const Point& x) { return sgnpow(x, a); });
}

// Brute-force oscillation about the mean, straight from the definition.
double brute_osc(const GridFunction& f, const Cube& q, double alpha)
{
    const auto& g = f.grid();
    std::vector<double> v;
    for_each_cell(g, g.cells(q), [&](Index k) { v.push_back(f[k]); });
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v)
        s += std::abs(x - mean);
    double vol = static_cast<double>(v.size()) * g.cell_volume();
    return s * g.cell_volume() / std::pow(vol, 1.0 + alpha / g.dim());
}

} // namespace

TEST_CASE("linear function has oscillation 1/4 at alpha 1")
{
    auto f = linear01(1024);
    CHECK(osc_alpha(f, box(0.0, 1.0, 1), 1.0) == doctest::Approx(0.25).epsilon(1e-5));
    CHECK(osc_alpha(f, Cube::from_lower(point(0.25), 0.25), 1.0) == doctest::Approx(0.25).epsilon(1e-4));
    auto fam = make_dyadic_family(box(0.0, 1.0, 1), 0, 6);
    CHECK(bmo_alpha_norm(f, {1.0, fam}) == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(lip_alpha_norm(f, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(meyers_ratio(f, {1.0, fam}) == doctest::Approx(4.0).epsilon(2e-3));
}

TEST_CASE("constants")
{
    auto c = GridFunction::constant(GridSpec(box(-1.0, 1.0, 1), 256), 2.5);
    auto fam = make_dyadic_family(c.domain(), 0, 5);
    CHECK(osc_alpha(c, box(-1.0, 1.0, 1), 0.5) == 0.0);
    CHECK(bmo_alpha_norm(c, {0.5, fam}) == 0.0);
    CHECK(lip_alpha_norm(c, 0.5) == 0.0);
    CHECK(meyers_ratio(c, {0.5, fam}) == 1.0);
    auto prof = cmo_profile(c, 0.5, {2.0, 1.0, 0.25, 1.0 / 16}, {0.0, 0.5});
    for (const auto* curve : {&prof.small_scale, &prof.large_scale, &prof.far_away})
        for (const auto& pt : *curve)
            CHECK(pt.sup_osc == 0.0);
    CHECK(prof.verdict[0]);
    CHECK(prof.verdict[1]);
    CHECK(prof.verdict[2]);
}

TEST_CASE("osc_alpha agrees with the definition")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridSpec g(box(-1.0, 1.0, 2), 32);
    Eigen::ArrayXd v(g.size());
    for (Index i = 0; i < v.size(); ++i)
        v[i] = u(rng);
    GridFunction f(g, v);
    for (const Cube& q : {box(-1.0, 1.0, 2), Cube(point(0.25, -0.25), 0.5), Cube(point(-0.5, 0.5), 0.25)})
        CHECK(osc_alpha(f, q, 0.3) == doctest::Approx(brute_osc(f, q, 0.3)).epsilon(1e-10));
}

TEST_CASE("sgn |x|^a: closed form on centered cubes, dilation invariant")
{
    for (double a : {0.25, 0.5, 0.75}) {
        auto f = sgnpow_grid(a, 4096, 8.0);
        double exact = 1.0 / (std::pow(2.0, a) * (a + 1.0));
        for (int k = -3; k <= 3; ++k) {
            double s = std::ldexp(1.0, k);
            CHECK(osc_alpha(f, Cube(point(0.0), s), a) == doctest::Approx(exact).epsilon(0.01));
        }
    }
}

TEST_CASE("sgn |x|^(1/2): Hölder norm and BMO lower bound")
{
    auto f = sgnpow_grid(0.5, 4096);
    CHECK(lip_alpha_norm(f, 0.5, 4096) == doctest::Approx(std::sqrt(2.0)).epsilon(0.01));
    auto fam = make_dyadic_family(f.domain(), 0, 8);
    double bmo = bmo_alpha_norm(f, {0.5, fam});
    CHECK(bmo >= 1.0 / (std::sqrt(2.0) * 1.5) * 0.99);
    double ratio = meyers_ratio(f, {0.5, fam}, 4096);
    CHECK(ratio >= 1.0);
    CHECK(ratio <= 10.0);
    // Stable under resolution doubling.
    auto f2 = sgnpow_grid(0.5, 8192);
    auto fam2 = make_dyadic_family(f2.domain(), 0, 9);
    double ratio2 = meyers_ratio(f2, {0.5, fam2}, 8192);
    CHECK(std::abs(ratio2 - ratio) <= 0.2 * ratio);
}

TEST_CASE("invariants over random grids")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ua(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        int n = 1 + t % 2;
        Index res = n == 1 ? 128 : 16;
        GridSpec g(box(0.0, 1.0, n), res);
        Eigen::ArrayXd v(g.size());
        for (Index i = 0; i < v.size(); ++i)
            v[i] = u(rng);
        GridFunction f(g, v);
        double alpha = ua(rng);
        double side = std::ldexp(1.0, -static_cast<int>(t % 3));
        Point c = zero_point(n);
        for (int a = 0; a < n; ++a)
            c[a] = 0.5 * side + (1.0 - side) * ua(rng);
        Cube q(c, side);
        double o = osc_alpha(f, q, alpha);
        double oi = osc_alpha_inf(f, q, alpha);

        double c0 = 5.0 * u(rng);
        double lam = 3.0 * u(rng);
        GridFunction shifted(g, v + c0);
        GridFunction scaled(g, lam * v);
        CHECK(osc_alpha(shifted, q, alpha) == doctest::Approx(o).epsilon(1e-10));
        CHECK(osc_alpha(scaled, q, alpha) == doctest::Approx(std::abs(lam) * o).epsilon(1e-10));
        CHECK(oi <= o * (1 + 1e-12));
        CHECK(o <= 2 * oi * (1 + 1e-12));
    }
}

TEST_CASE("scale covariance on dyadic dilations")
{
    // f_a(x) = f(ax): sample both on matching grids.
    auto f = [](const Point& x) { return std::sin(3 * x[0]) + x[0] * x[0]; };
    double alpha = 0.6;
    for (double a : {2.0, 4.0, 0.5}) {
        GridSpec big(box(-4.0, 4.0, 1), 8192);
        GridSpec small(box(-4.0 / a, 4.0 / a, 1), 8192);
        auto fa = GridFunction::sample(small, [&](const Point& x) { return f(point(a * x[0])); });
        auto ff = GridFunction::sample(big, f);
        Cube q(point(0.25 / a), 1.0 / a);
        Cube aq(point(a * q.center()[0]), a * q.side());
        CHECK(osc_alpha(fa, q, alpha) == doctest::Approx(std::pow(a, alpha) * osc_alpha(ff, aq, alpha)).epsilon(1e-9));
    }
}

TEST_CASE("median is the lower median")
{
    GridSpec g(box(0.0, 1.0, 1), 4);
    GridFunction f(g, (Eigen::ArrayXd(4) << 4.0, 1.0, 3.0, 2.0).finished());
    CHECK(sample_median(f, box(0.0, 1.0, 1)) == 2.0);
}

TEST_CASE("bmo bounded by Hölder norm with a stable constant")
{
    auto make = [](Index res) {
        return GridFunction::sample(GridSpec(box(-1.0, 1.0, 1), res),
                                    [](const Point& x) { return lacunary(x, 0.5); });
    };
    double prev = 0.0;
    for (Index res : {1024, 2048}) {
        auto f = make(res);
        auto fam = make_dyadic_family(f.domain(), 0, static_cast<int>(std::log2(res)) - 2);
        double c = bmo_alpha_norm(f, {0.5, fam}) / lip_alpha_norm(f, 0.5, res);
        CHECK(c > 0.0);
        CHECK(c <= 1.0);
        if (prev > 0.0)
            CHECK(std::abs(c - prev) <= 0.2 * prev);
        prev = c;
    }
}

TEST_CASE("errors")
{
    auto f = linear01(64);
    CHECK_THROWS_AS(lip_alpha_norm(f, 0.5, 10), ArgumentError);
    CHECK_THROWS_AS(cmo_profile(f, 0.5, {4.0}, {0.0}), ArgumentError);
}

TEST_CASE("cmo profile: sgn |x|^a fails small scales, bump passes")
{
    auto s = sgnpow_grid(0.5, 4096, 4.0);
    std::vector<double> scales;
    for (int k = 2; k >= -6; --k)
        scales.push_back(std::ldexp(1.0, k));
    auto ps = cmo_profile(s, 0.5, scales, {0.0, 1.0, 2.0});
    CHECK_FALSE(ps.verdict[0]);
    CHECK(ps.small_scale.back().sup_osc >= 0.9 * ps.small_scale.front().sup_osc);
}
