#include "doctest.h"

#include "lipcmo/grid.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace lipcmo;

TEST_CASE("cube geometry")
{
    Cube q(point(0.5, -1.0), 2.0);
    CHECK(q.volume() == doctest::Approx(4.0));
    CHECK(q.lo(0) == -0.5);
    CHECK(q.hi(1) == 0.0);
    CHECK(q.vertex(0) == point(-0.5, -2.0));
    CHECK(q.vertex(3) == point(1.5, 0.0));
    CHECK(q.contains(point(1.5, 0.0)));
    CHECK_FALSE(q.contains(point(1.6, 0.0)));
    CHECK(q.contains(Cube(point(0.0, -1.0), 1.0)));
    CHECK(Cube(point(0.0), 1.0).overlap_fraction(Cube(point(0.25), 1.0)) == doctest::Approx(0.75));
    CHECK_FALSE(Cube(point(0.0), 1.0).overlaps(Cube(point(1.0), 1.0)));
    CHECK(dyadic_box(2, 1).side() == 8.0);
    CHECK(unit_cube(2).volume() == 1.0);
}

TEST_CASE("grid cells and tie rule")
{
    GridSpec g(box(0.0, 1.0, 1), 8);
    CHECK(g.cell_size() == 0.125);
    CHECK(g.axis_center(0, 0) == 0.0625);
    // The two halves of [0,1] split the cells exactly.
    auto left = g.cells(Cube::from_lower(point(0.0), 0.5));
    auto right = g.cells(Cube::from_lower(point(0.5), 0.5));
    CHECK(left.count() == 4);
    CHECK(right.count() == 4);
    CHECK(left.hi[0] == right.lo[0]);
    CHECK(g.locate(point(0.3)) == 2);
    CHECK(g.locate(point(1.5)) == -1);

    GridSpec g2(box(-1.0, 1.0, 2), 4);
    CHECK(g2.size() == 16);
    auto ij = g2.unflatten(g2.flat(3, 2));
    CHECK(ij[0] == 3);
    CHECK(ij[1] == 2);
    CHECK(g2.center(g2.flat(0, 3)) == point(-0.75, 0.75));
}

TEST_CASE("grid construction rejects bad input")
{
    CHECK_THROWS_AS(GridSpec(box(0.0, 1.0, 1), 0), ArgumentError);
    CHECK_THROWS_AS(GridFunction(GridSpec(box(0.0, 1.0, 1), 4), Eigen::ArrayXd::Zero(3)), ArgumentError);
}

TEST_CASE("cube averages match closed forms")
{
    GridSpec g(box(0.0, 1.0, 1), 1024);
    auto f = GridFunction::sample(g, [](const Point& x) { return x[0]; });
    CHECK(cube_average(f, box(0.0, 1.0, 1)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cube_average(f, Cube::from_lower(point(0.0), 0.25)) == doctest::Approx(0.125).epsilon(1e-12));
    auto c = GridFunction::constant(g, 3.0);
    CHECK(cube_average(c, Cube(point(0.3), 0.1)) == doctest::Approx(3.0));
}

TEST_CASE("box sums agree with direct sums")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridSpec g(box(-1.0, 1.0, 2), 16);
    Eigen::ArrayXd v(g.size());
    for (Index i = 0; i < v.size(); ++i)
        v[i] = u(rng);
    BoxSums sums(g, v);
    std::uniform_int_distribution<Index> pick(-3, 18);
    for (int t = 0; t < 200; ++t) {
        CellRange r;
        r.dim = 2;
        for (int a = 0; a < 2; ++a) {
            Index x = pick(rng), y = pick(rng);
            r.lo[a] = std::min(x, y);
            r.hi[a] = std::max(x, y);
        }
        double direct = 0.0;
        for_each_cell(g, g.clip(r), [&](Index k) { direct += v[k]; });
        CHECK(sums.sum(r) == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("dyadic family")
{
    auto fam = make_dyadic_family(box(0.0, 1.0, 2), 0, 3);
    CHECK(fam.level(0).size() == 1);
    CHECK(fam.level(3).size() == 64);
    CHECK(fam.size() == 1 + 4 + 16 + 64);
    auto sweep = sweep_cubes(fam);
    CHECK(sweep.size() > fam.size());
    for (const auto& q : sweep)
        CHECK(fam.root().contains(q, 1e-12));
}

TEST_CASE("origin lattice stays inside the region")
{
    auto cubes = origin_lattice(0.5, box(-1.0, 1.0, 1));
    CHECK(cubes.size() == 7);
    for (const auto& q : cubes)
        CHECK(box(-1.0, 1.0, 1).contains(q, 1e-12));
}

TEST_CASE("csv round trip")
{
    GridSpec g(box(-1.0, 1.0, 2), 8);
    auto f = GridFunction::sample(g, [](const Point& x) { return x[0] * x[0] - 0.5 * x[1]; });
    std::stringstream ss;
    write_csv(f, ss);
    auto back = read_csv(ss);
    CHECK(back.grid() == g);
    CHECK((back.values() - f.values()).abs().maxCoeff() < 1e-15);
}

TEST_CASE("value_at is piecewise constant")
{
    GridSpec g(box(0.0, 1.0, 1), 4);
    auto f = GridFunction::sample(g, [](const Point& x) { return x[0]; });
    CHECK(f.value_at(point(0.1)) == 0.125);
    CHECK(f.value_at(point(2.0), -7.0) == -7.0);
}
