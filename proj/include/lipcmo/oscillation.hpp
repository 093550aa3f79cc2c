#pragma once

#include "lipcmo/grid.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace lipcmo {

struct OscillationParams {
    double alpha = 0.5;
    DyadicFamily family;
};

// |Q|^{-(1+α/n)} ∫_Q |f - f_Q|, midpoint rule.
double osc_alpha(const GridFunction& f, const Cube& q, double alpha);

// Same with the L¹-optimal constant (lower median) in place of f_Q.
double osc_alpha_inf(const GridFunction& f, const Cube& q, double alpha);

// Lower median of the cell samples in Q.
double sample_median(const GridFunction& f, const Cube& q);

// f extended by zero outside its grid; Q may leave the domain.
double osc_alpha_zero_extended(const GridFunction& f, const BoxSums& sums, const Cube& q, double alpha);
double average_zero_extended(const GridFunction& f, const BoxSums& sums, const Cube& q);

// Max of osc_alpha over the family and its half-step translates.
double bmo_alpha_norm(const GridFunction& f, const OscillationParams& params);

inline constexpr Index kDefaultPairBudget = 4096;

// Hölder seminorm over sample pairs. Exact over all pairs when
// size <= pair_budget, else local neighbourhoods plus seeded random pairs.
double lip_alpha_norm(const GridFunction& f, double alpha, Index pair_budget = kDefaultPairBudget,
                      std::uint64_t seed = 0);

double meyers_ratio(const GridFunction& f, const OscillationParams& params,
                    Index pair_budget = kDefaultPairBudget);

struct ProfilePoint {
    double parameter = 0.0;
    double sup_osc = 0.0;
};

struct OscProfile {
    std::vector<ProfilePoint> small_scale; // cube volume decreasing
    std::vector<ProfilePoint> large_scale; // cube volume increasing
    std::vector<ProfilePoint> far_away;    // distance increasing
    std::array<bool, 3> verdict{false, false, false};
    double decay_factor = 0.1;
};

// scales are cube volumes. The sorted scale curve is split at its peak
// plateau (largest scale within 1% of the max) into the small-scale and
// large-scale branches. Far-away sups use every listed side.
OscProfile cmo_profile(const GridFunction& f, double alpha, std::vector<double> scales,
                       std::vector<double> distances, double decay_factor = 0.1);

// Sup of osc_alpha over origin-anchored lattice cubes of the given side
// inside the domain (0 if none fit).
double lattice_sup(const GridFunction& f, double side, double alpha);

std::string profile_csv(const OscProfile& p);

} // namespace lipcmo
