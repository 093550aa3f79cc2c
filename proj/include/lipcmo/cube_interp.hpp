#pragma once

#include "lipcmo/grid.hpp"

namespace lipcmo {

// ψ indexed by vertex mask (bit j set = upper face on axis j).
using VertexValues = Eigen::Array<double, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;

class WeightedCube {
public:
    WeightedCube() = default;
    WeightedCube(Cube cube, VertexValues psi);

    const Cube& cube() const { return cube_; }
    const VertexValues& psi() const { return psi_; }
    double psi(int mask) const { return psi_[mask]; }

private:
    Cube cube_{};
    VertexValues psi_{};
};

// min_c Σ_a |ψ(a) - c|, attained at the median vertex value.
double vertex_osc(const WeightedCube& wq);

// Closed form F_Q(x) = Σ_a Π_j (2c_j - x_j - a_j)/(2c_j - 2a_j) ψ(a).
// x must lie in Q up to tol (relative to the side).
double interpolate(const WeightedCube& wq, const Point& x, double tol = 1e-12);
// No containment check; used on hot paths where x is known to be inside.
double interpolate_unchecked(const WeightedCube& wq, const Point& x);

struct Face {
    int axis = 0;
    bool upper = false;
};

// Weighted cube of dimension n-1 living on the face; the face axis is
// dropped from the coordinates.
WeightedCube restrict_to_face(const WeightedCube& wq, Face face);

// Embeds a point of the face cube back into the parent coordinates.
Point face_to_parent(const WeightedCube& wq, Face face, const Point& y);

struct GradientReport {
    double max_partial = 0.0;
    double bound = 0.0;
    bool ok = true;
};

GradientReport gradient_bound_check(const WeightedCube& wq, int samples);

} // namespace lipcmo
