#include "doctest.h"

#include "lipcmo/cube_interp.hpp"

#include <cmath>
#include <random>

using namespace lipcmo;

namespace {

WeightedCube wc2(double a, double b, double c, double d)
{
    VertexValues psi(4);
    psi << a, b, c, d;
    return WeightedCube(box(0.0, 1.0, 2), psi);
}

WeightedCube random_cube(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> us(0.1, 4.0);
    Point c = zero_point(n);
    for (int a = 0; a < n; ++a)
        c[a] = 3.0 * u(rng);
    VertexValues psi(1 << n);
    for (int k = 0; k < psi.size(); ++k)
        psi[k] = u(rng);
    return WeightedCube(Cube(c, us(rng)), psi);
}

Point random_in(std::mt19937_64& rng, const Cube& q)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Point x = zero_point(q.dim());
    for (int a = 0; a < q.dim(); ++a)
        x[a] = q.lo(a) + q.side() * u(rng);
    return x;
}

} // namespace

TEST_CASE("vertex oscillation")
{
    VertexValues five(2);
    five << 5.0, 5.0;
    CHECK(vertex_osc(WeightedCube(box(0.0, 1.0, 1), five)) == 0.0);
    VertexValues one(2);
    one << 0.0, 1.0;
    CHECK(vertex_osc(WeightedCube(box(0.0, 1.0, 1), one)) == 1.0);
    CHECK(vertex_osc(wc2(0, 1, 2, 3)) == 4.0);
}

TEST_CASE("interpolation examples")
{
    VertexValues one(2);
    one << 0.0, 1.0;
    CHECK(interpolate(WeightedCube(box(0.0, 1.0, 1), one), point(0.25)) == doctest::Approx(0.25));
    CHECK(interpolate(wc2(0, 1, 2, 3), point(0.5, 0.5)) == doctest::Approx(1.5));
    CHECK(interpolate(wc2(7, 7, 7, 7), point(0.3, 0.9)) == doctest::Approx(7.0));
    CHECK_THROWS_AS(interpolate(wc2(0, 1, 2, 3), point(1.5, 0.5)), DomainError);
}

TEST_CASE("face restriction examples")
{
    auto low = restrict_to_face(wc2(0, 1, 2, 3), {1, false});
    CHECK(low.psi(0) == 0.0);
    CHECK(low.psi(1) == 1.0);
    auto right = restrict_to_face(wc2(0, 1, 2, 3), {0, true});
    CHECK(right.psi(0) == 1.0);
    CHECK(right.psi(1) == 3.0);
    VertexValues one(2);
    one << 4.0, 9.0;
    auto v = restrict_to_face(WeightedCube(box(0.0, 1.0, 1), one), {0, true});
    CHECK(v.cube().dim() == 0);
    CHECK(v.psi(0) == 9.0);
    CHECK_THROWS_AS(restrict_to_face(wc2(0, 1, 2, 3), {2, false}), ArgumentError);
}

TEST_CASE("gradient bound examples")
{
    auto c = gradient_bound_check(wc2(2, 2, 2, 2), 9);
    CHECK(c.max_partial == doctest::Approx(0.0));
    CHECK(c.bound == 0.0);
    CHECK(c.ok);
    VertexValues one(2);
    one << 0.0, 1.0;
    auto l = gradient_bound_check(WeightedCube(box(0.0, 1.0, 1), one), 9);
    CHECK(l.max_partial == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(l.bound == doctest::Approx(1.0));
    CHECK(l.ok);
    auto b = gradient_bound_check(wc2(0, 1, 2, 3), 9);
    CHECK(b.max_partial == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(b.bound == doctest::Approx(4.0));
    CHECK(b.ok);
}

TEST_CASE("interpolant properties on random cubes")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        int n = 1 + t % 2;
        auto wq = random_cube(rng, n);
        const Cube& q = wq.cube();
        for (int k = 0; k < q.vertex_count(); ++k)
            CHECK(std::abs(interpolate(wq, q.vertex(k)) - wq.psi(k)) <= 1e-12);

        VertexValues ones = VertexValues::Ones(q.vertex_count());
        CHECK(std::abs(interpolate(WeightedCube(q, ones), random_in(rng, q)) - 1.0) <= 1e-12);

        // Affine along each axis: three collinear points.
        Point x = random_in(rng, q);
        for (int a = 0; a < n; ++a) {
            Point x0 = x, x1 = x, xm = x;
            x0[a] = q.lo(a);
            x1[a] = q.hi(a);
            double s = u(rng);
            xm[a] = (1 - s) * x0[a] + s * x1[a];
            double lin = (1 - s) * interpolate(wq, x0) + s * interpolate(wq, x1);
            CHECK(interpolate(wq, xm) == doctest::Approx(lin).epsilon(1e-12).scale(1.0));
        }

        // Face restriction reproduces the parent on the face.
        Face face{static_cast<int>(t % n), (t / 2) % 2 == 1};
        auto fw = restrict_to_face(wq, face);
        Point y = fw.cube().dim() == 0 ? Point(zero_point(0)) : random_in(rng, fw.cube());
        double on_face = fw.cube().dim() == 0 ? fw.psi(0) : interpolate(fw, y);
        CHECK(on_face == doctest::Approx(interpolate(wq, face_to_parent(wq, face, y))).epsilon(1e-10).scale(1.0));

        // Transport: aQ + v with the same ψ is F_Q composed with the affine map.
        double a = 0.5 + 2.0 * u(rng);
        Point v = zero_point(n);
        for (int j = 0; j < n; ++j)
            v[j] = u(rng) - 0.5;
        Cube moved(a * q.center() + v, a * q.side());
        WeightedCube wm(moved, wq.psi());
        Point z = random_in(rng, q);
        CHECK(interpolate(wm, Point(a * z + v), 1e-9) == doctest::Approx(interpolate(wq, z)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("gradient bound holds for random weights")
{
    std::mt19937_64 rng(17);
    for (int t = 0; t < 200; ++t) {
        auto wq = random_cube(rng, 1 + t % 2);
        auto r = gradient_bound_check(wq, 33);
        CHECK(r.ok);
    }
}
