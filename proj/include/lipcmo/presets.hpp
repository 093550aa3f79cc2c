#pragma once

#include "lipcmo/operators.hpp"
#include "lipcmo/weights.hpp"

#include <string>

namespace lipcmo {

// exp(1 - 1/(1 - |x|²)) on the open unit ball, peak 1.
double bump(const Point& x);
// sgn(x₁)|x₁|^a.
double sgnpow(const Point& x, double a);
// Σ_{k=0}^{12} 2^{-ka} sin(2^k π x₁).
double lacunary(const Point& x, double a);

// "preset:NAME[:param]" or a CSV path. Presets are sampled on grid;
// CSV input brings its own grid.
GridFunction parse_function(const std::string& text, const GridSpec& grid);

// sgn, cos, riesz:beta, table:FILE. beta applies to sgn, cos and table.
KernelSpec parse_kernel(const std::string& text, int n, double beta);

// one, pow:gamma, or csv:PATH / file:PATH (must match grid).
GridFunction parse_weight(const std::string& text, const GridSpec& grid);

// "-1..1" or "-1..1,-1..1" (square only).
Cube parse_domain(const std::string& text, int n_hint = 0);

} // namespace lipcmo
