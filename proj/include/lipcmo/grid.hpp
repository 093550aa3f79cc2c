#pragma once

#include "lipcmo/errors.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace lipcmo {

using Index = Eigen::Index;

// At most two coordinates; never allocates.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

Point point(double x);
Point point(double x, double y);
Point zero_point(int n);

// Axis-parallel closed cube. dim 0 is allowed so that restricting a
// 1D weighted cube to a face still yields a cube.
class Cube {
public:
    Cube() = default;
    Cube(Point center, double side);

    static Cube from_lower(const Point& lower, double side);

    const Point& center() const { return center_; }
    double side() const { return side_; }
    int dim() const { return static_cast<int>(center_.size()); }
    double volume() const;
    double lo(int axis) const { return center_[axis] - 0.5 * side_; }
    double hi(int axis) const { return center_[axis] + 0.5 * side_; }

    Cube scaled(double a) const { return Cube(center_, a * side_); }
    Cube translated(const Point& v) const { return Cube(center_ + v, side_); }

    int vertex_count() const { return 1 << dim(); }
    // Bit j of mask set means the upper face along axis j.
    Point vertex(int mask) const;

    bool contains(const Point& x, double tol = 0.0) const;
    bool contains(const Cube& other, double tol = 0.0) const;
    // True when the open interiors meet.
    bool overlaps(const Cube& other) const;
    // |Q ∩ other| / |Q|.
    double overlap_fraction(const Cube& other) const;
    // Sup-norm distance from the origin to the nearest point of the cube.
    double inner_radius() const;
    double outer_radius() const;

private:
    Point center_{};
    double side_ = 1.0;
};

// Q0 = [-1/2, 1/2]^n.
Cube unit_cube(int n);
// R_i = [-2^i, 2^i]^n.
Cube dyadic_box(int i, int n);
// [lo, hi]^n.
Cube box(double lo, double hi, int n);

// Half-open index range per axis; hi is exclusive. Bounds may lie
// outside the grid for unclipped ranges.
struct CellRange {
    int dim = 1;
    std::array<Index, 2> lo{0, 0};
    std::array<Index, 2> hi{0, 1};

    Index extent(int axis) const { return hi[axis] - lo[axis]; }
    Index count() const;
    bool empty() const { return count() == 0; }
};

class GridSpec {
public:
    GridSpec() = default;
    GridSpec(Cube domain, Index resolution);

    const Cube& domain() const { return domain_; }
    Index resolution() const { return res_; }
    int dim() const { return domain_.dim(); }
    double cell_size() const { return h_; }
    double cell_volume() const;
    Index size() const;

    double axis_center(int axis, Index i) const { return domain_.lo(axis) + (static_cast<double>(i) + 0.5) * h_; }
    Point center(Index flat) const;
    Index flat(Index i0, Index i1 = 0) const { return i0 + i1 * res_; }
    std::array<Index, 2> unflatten(Index flat) const;

    // Cells whose centers satisfy lo < c <= hi on every axis. A center on
    // a shared face goes to the lower-index cube, which keeps dyadic
    // splits exactly additive. The unclipped version may index cells
    // outside the grid.
    CellRange cells_unclipped(const Cube& q) const;
    CellRange clip(CellRange r) const;
    CellRange cells(const Cube& q) const { return clip(cells_unclipped(q)); }
    CellRange all_cells() const;

    // Flat index of the cell containing x, or -1.
    Index locate(const Point& x) const;

    bool operator==(const GridSpec& o) const;
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
    // Same cell size and cell centers on a common lattice.
    bool aligned_with(const GridSpec& o) const;

private:
    Cube domain_{};
    Index res_ = 1;
    double h_ = 1.0;
};

template <class F>
void for_each_cell(const GridSpec& g, const CellRange& r, F&& body)
{
    if (r.dim == 1) {
        for (Index i = r.lo[0]; i < r.hi[0]; ++i)
            body(g.flat(i));
    } else {
        for (Index j = r.lo[1]; j < r.hi[1]; ++j)
            for (Index i = r.lo[0]; i < r.hi[0]; ++i)
                body(g.flat(i, j));
    }
}

class GridFunction {
public:
    GridFunction() = default;
    GridFunction(GridSpec grid, Eigen::ArrayXd values);

    static GridFunction sample(const GridSpec& grid, const std::function<double(const Point&)>& f);
    static GridFunction constant(const GridSpec& grid, double c);

    const GridSpec& grid() const { return grid_; }
    const Eigen::ArrayXd& values() const { return values_; }
    double operator[](Index i) const { return values_[i]; }

    int dim() const { return grid_.dim(); }
    Index resolution() const { return grid_.resolution(); }
    double cell_size() const { return grid_.cell_size(); }
    const Cube& domain() const { return grid_.domain(); }

    // Value of the cell containing x (piecewise constant), or fallback.
    double value_at(const Point& x, double fallback = 0.0) const;

private:
    GridSpec grid_{};
    Eigen::ArrayXd values_{};
};

class DyadicFamily {
public:
    DyadicFamily(Cube root, int min_level, int max_level, std::vector<std::vector<Cube>> levels);

    const Cube& root() const { return root_; }
    int min_level() const { return min_level_; }
    int max_level() const { return max_level_; }
    const std::vector<Cube>& level(int k) const { return levels_.at(k - min_level_); }
    std::vector<Cube> cubes() const;
    std::size_t size() const;

private:
    Cube root_;
    int min_level_;
    int max_level_;
    std::vector<std::vector<Cube>> levels_;
};

inline constexpr std::size_t kMaxFamilyCubes = 10'000'000;

DyadicFamily make_dyadic_family(const Cube& root, int min_level, int max_level);

// Family cubes plus their half-step translates that stay inside the root.
std::vector<Cube> sweep_cubes(const DyadicFamily& family);

// Cubes of the given side whose centers lie on the lattice (side/2)Z^n
// (anchored at the origin) and which lie inside region.
std::vector<Cube> origin_lattice(double side, const Cube& region);

// Range of cells for Q after the admissibility checks of cube_average.
CellRange admissible_cells(const GridFunction& f, const Cube& q);

double cube_average(const GridFunction& f, const Cube& q);
GridFunction restrict(const GridFunction& f, const Cube& q);

// Summed-area table; O(1) sums over cell ranges.
class BoxSums {
public:
    BoxSums(const GridSpec& grid, const Eigen::ArrayXd& values);
    // Sum over the clipped part of r; cells outside the grid count as 0.
    double sum(const CellRange& r) const;

private:
    GridSpec grid_;
    Eigen::ArrayXd table_;
};

GridFunction read_csv(std::istream& in);
GridFunction read_csv(const std::string& path);
void write_csv(const GridFunction& f, std::ostream& out);
void write_csv(const GridFunction& f, const std::string& path);

} // namespace lipcmo
