#pragma once

#include "lipcmo/grid.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lipcmo {

inline constexpr int kAngularTableSize = 4096;

// Ω on the sphere, order β, smooth truncation radius δ (0 = none).
class KernelSpec {
public:
    KernelSpec() = default;
    // n = 1: Ω(+1), Ω(-1).
    static KernelSpec line(double plus, double minus, double beta);
    // n = 2: periodic table over [0, 2π), linear interpolation.
    static KernelSpec angular(std::vector<double> table, double beta);
    // n = 2 from a function of the angle; n = 1 uses θ = 0 and θ = π.
    static KernelSpec from_angle(int n, const std::function<double(double)>& omega, double beta);
    // (angle, value) samples, resampled onto the table (n = 2) or read at 0 and π (n = 1).
    static KernelSpec from_samples(int n, std::vector<std::pair<double, double>> samples, double beta);

    int dim() const { return dim_; }
    double beta() const { return beta_; }
    double delta() const { return delta_; }
    bool mean_zero_required() const { return beta_ == 0.0; }
    const std::vector<double>& table() const { return omega_; }

    double omega_angle(double theta) const;
    // Ω(z/|z|); z need not be a unit vector.
    double omega(const Point& z) const;
    double mean() const;
    double sup_norm() const;
    double lr_norm(double r) const;

    // Ω(z/|z|)|z|^{β-n}(1 - φ_δ(|z|)) for z ≠ 0.
    double kernel(const Point& z) const;

    // Mean-zero check for β = 0.
    void validate() const;

    KernelSpec with_delta(double delta) const;

private:
    int dim_ = 1;
    double beta_ = 0.0;
    double delta_ = 0.0;
    std::vector<double> omega_{1.0, -1.0};
};

KernelSpec truncate_kernel(const KernelSpec& spec, double delta);

// Smooth cutoff: 1 on [0, 1/2], 0 on [1, ∞).
double cutoff(double u);

struct SignWindow {
    bool found = false;
    double theta0 = 0.0;  // center of the |Ω| >= eps0 part of the window
    double eps0 = 0.0;    // half the window max of |Ω|
    double width = 0.0;   // radians (n = 2); π for n = 1
    int sign = 1;
};

// Widest single-sign angular window; ties prefer larger max |Ω|, then Ω > 0.
SignWindow sign_window(const KernelSpec& spec);
// Window of width >= 2π/64 with single sign and |mean| >= 1e-6, else ValidationError.
void validate_sign_window(const KernelSpec& spec);

struct CommutatorSpec {
    KernelSpec kernel;
    GridFunction b;
    int m = 1;
    std::vector<GridFunction> b_vector;
};

GridFunction apply_T(const KernelSpec& spec, const GridFunction& f, const GridSpec& x_grid);
double apply_T_at(const KernelSpec& spec, const GridFunction& f, const Point& x);

GridFunction apply_commutator_m(const CommutatorSpec& spec, const GridFunction& f, const GridSpec& x_grid);
GridFunction apply_commutator_vec(const CommutatorSpec& spec, const GridFunction& f, const GridSpec& x_grid);

// Commutator evaluated only on the listed cells of the symbol grid; other
// entries of the result are 0.
GridFunction apply_commutator_on(const CommutatorSpec& spec, const GridFunction& f,
                                 const std::vector<Index>& target_cells);

GridFunction fractional_maximal(const GridFunction& f, double gamma, const DyadicFamily& family);

// (∫_E |g|^p w)^{1/p}; w is already raised (ω^p or ω^q).
double weighted_lp_norm(const GridFunction& g, const GridFunction& w, double p,
                        const std::optional<Cube>& e = std::nullopt);
double weighted_lp_norm(const GridFunction& g, const GridFunction& w, double p, const std::vector<Index>& cells);

// ‖f‖_1 · side^{β-n}: scale of the far field cut off by the grid.
double far_field_bound(const KernelSpec& spec, const GridFunction& f);

} // namespace lipcmo
