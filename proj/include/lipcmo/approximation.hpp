#pragma once

#include "lipcmo/cube_interp.hpp"
#include "lipcmo/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lipcmo {

// Shell m: cubes of side 2^{i+m-d1} in R_m \ R̊_{m-1} (all of R_{d1} for m = d1).
struct Shell {
    int m = 0;
    double side = 0.0;
};

struct ApproxPlan {
    int dim = 1;
    double eps = 0.0;
    double alpha = 0.0;
    int i_eps = 0;
    int j_eps = 0;
    int k_eps = 0;
    int d1 = 0;
    int d2 = 0;
    double offset_constant = 0.0; // A_{d2}
    std::vector<Shell> shells;    // m = d1 .. d2+1
    // Input treated as compactly supported and extended by zero, so
    // shells may leave the grid.
    bool zero_extended = false;
    std::string tail_note;
};

// Cubes of one shell, enumerated on demand (2D shells can be large).
std::vector<Cube> shell_cubes(const ApproxPlan& plan, const Shell& shell);

struct PlanOptions {
    int min_piece_cells = 2;
    bool allow_zero_extension = true;
};

ApproxPlan plan_scales(const GridFunction& f, double alpha, double eps, const PlanOptions& opt = {});

// g_ε: one multilinear piece per shell cube, A_{d2} outside R_{d2+1}.
class PiecewiseInterpolant {
public:
    PiecewiseInterpolant(int dim, int i_eps, int d1, int d2, double outside_value,
                         std::vector<Eigen::ArrayXd> vertex_values);

    double operator()(const Point& x) const;
    double outside_value() const { return outside_; }
    int dim() const { return dim_; }
    double radius() const;

    // Piece used to evaluate at x; x must lie in R_{d2+1}.
    WeightedCube piece_at(const Point& x) const;
    // Piece of shell m containing x, if shell m has one there.
    std::optional<WeightedCube> piece_in_shell(int m, const Point& x) const;
    // All pieces of shell m.
    std::vector<WeightedCube> shell_pieces(int m) const;
    std::vector<WeightedCube> pieces() const;
    std::size_t piece_count() const;

    // Vertex lattice value of shell m at integer coordinates (units of the shell side,
    // origin at the lower corner of R_m).
    double vertex_value(int m, Index a0, Index a1 = 0) const;
    int d1() const { return d1_; }
    int d2() const { return d2_; }
    int i_eps() const { return i_; }

    GridFunction sample(const GridSpec& grid) const;

private:
    int shell_of(const Point& x) const;
    bool owns(int m, Index t0, Index t1) const;
    WeightedCube piece(int m, Index t0, Index t1) const;
    double side(int m) const;

    int dim_;
    int i_;
    int d1_;
    int d2_;
    double outside_;
    Index per_axis_; // vertices per axis, identical for every shell
    std::vector<Eigen::ArrayXd> values_; // index m - d1
};

PiecewiseInterpolant build_vertex_maps(const GridFunction& f, const ApproxPlan& plan);

// Sup over the family (with half-step translates) of osc_alpha_inf(f - g, Q).
double approx_error(const GridFunction& f, const PiecewiseInterpolant& g, double alpha,
                    const DyadicFamily& family);

// h = g * φ_t - A_{d2}, sampled on the template grid.
GridFunction mollify(const PiecewiseInterpolant& g, double t, const GridSpec& grid);

// Radius reported with g_ε: a quarter of the finest piece side, at least
// two cells.
double mollifier_radius(const ApproxPlan& plan, const GridSpec& grid);

// Normalized mollifier profile exp(-1/(1-r²)) on r < 1 (unnormalized).
double bump_profile(double r);

struct ChainReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double c_chain = 0.0;
    int chain_length = 0;
    bool precondition = true;
    bool ok = true;
    std::string reason;
};

ChainReport regularity_chain_bound(const GridFunction& f, const Cube& q, const Cube& sub_q, double alpha,
                                   double eps);

} // namespace lipcmo
