#pragma once

#include "lipcmo/grid.hpp"

#include <optional>
#include <vector>

namespace lipcmo {

struct WeightSpec {
    GridFunction w;
    double p = 2.0;
    std::optional<double> q;

    WeightSpec(GridFunction weight, double p_, std::optional<double> q_ = std::nullopt);
    double p_dual() const { return p / (p - 1.0); }
};

// 1/q = 1/p - (mα+β)/n within 1e-9, else ArgumentError.
void check_exponent_relation(double p, double q, int m, double alpha, double beta, int n);
// q from the relation; ArgumentError when it is not in (1, ∞).
double exponent_q(double p, int m, double alpha, double beta, int n);

// ∫_E ω^power by the midpoint rule.
double weighted_measure(const WeightSpec& spec, const Cube& e, double power);
double weighted_measure(const WeightSpec& spec, const std::vector<Index>& cells, double power);

// Max over the family of avg ω · (avg ω^{1-p'})^{p-1}.
double ap_constant(const WeightSpec& spec, const DyadicFamily& family);
// A_p product on a single cube.
double ap_product(const WeightSpec& spec, const Cube& q);

// Max over the family of (avg ω^q)^{1/q} (avg ω^{-p'})^{1/p'} (no outer power).
double apq_constant(const WeightSpec& spec, const DyadicFamily& family);

struct DoublingReport {
    double ratio = 0.0;
    double cap = 0.0;
    double ap = 0.0;           // A_p product on λQ
    double measure_ratio = 0.0; // |λQ|/|Q| in cell measure (λ^n up to rounding)
    bool ok = false;
};

DoublingReport doubling_check(const WeightSpec& spec, const Cube& q, double lambda);

struct ReverseHolderReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};

ReverseHolderReport reverse_holder_check(const WeightSpec& spec, const Cube& q, double eps_rh);

// Smallest eps in the increasing grid at which some cube fails; +inf if none.
double reverse_holder_threshold(const WeightSpec& spec, const std::vector<Cube>& cubes,
                                const std::vector<double>& eps_grid);

} // namespace lipcmo
