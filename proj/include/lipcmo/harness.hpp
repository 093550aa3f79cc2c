#pragma once

#include "lipcmo/operators.hpp"
#include "lipcmo/weights.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipcmo {

// Lower median of the samples of b on Q.
double median_value(const GridFunction& b, const Cube& q);

struct MedianChecks {
    Index pairs = 0;            // sampled (x, y) pairs across both E_i × F_i
    Index sign_failures = 0;    // b(x) - b(y) changes sign
    Index median_failures = 0;  // |b(x) - m_b| > |b(x) - b(y)|
    Index kernel_failures = 0;  // Ω(x - y) changes sign on Q × P
    Index small_set_failures = 0;
    double max_small_fraction = 0.0; // max over sampled x of |N_x ∩ P| / |Q|
    bool cover = false;         // E1 ∪ E2 = Q
    bool f_measure = false;     // |F_i| = |Q|/2 within one cell
    bool ok() const;
};

struct MedianConstruction {
    Cube q;
    Cube p;
    double m_b = 0.0;
    std::vector<Index> e1, e2, f1, f2;
    double eps0 = 0.0;
    double k0 = 0.0;
    double gamma = 0.0;
    Point theta0;
    MedianChecks checks;
};

struct MedianOptions {
    int x_samples = 64;      // points of Q used for the N_x test
    Index pair_samples = 2000;
    std::uint64_t seed = 0;
};

// P sits at distance k0 l_Q from Q along -θ0, snapped to whole cells.
MedianConstruction build_median_sets(const GridFunction& b, const KernelSpec& kernel, const Cube& q, double gamma,
                                     const MedianOptions& opt = {});

struct LowerBoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double q = 0.0;
    bool degenerate = false;
    MedianConstruction construction;
};

LowerBoundReport lower_bound_ratio(const GridFunction& b, const KernelSpec& kernel, const WeightSpec& w,
                                   const Cube& q, int m, double alpha, const MedianOptions& opt = {});

struct CompactnessReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double osc = 0.0;      // õ = osc_alpha_inf(b, Q)
    double lip = 0.0;
    double l_q = 0.0;      // L_Q before snapping to cells
    Cube e;
    Cube f;
    Point x0, y0;
    Index excluded = 0;    // cells of B inside E
};

// Cells of E for a given Q (used to build exclusion sets before the probe).
std::vector<Index> probe_e_cells(const GridFunction& b, const KernelSpec& kernel, const Cube& q, double alpha);

CompactnessReport compactness_lower_probe(const GridFunction& b, const KernelSpec& kernel, const WeightSpec& w,
                                          const Cube& q, int m, double alpha, double eta0,
                                          const std::vector<Index>& exclude = {});

struct AnnulusPoint {
    int d = 0;
    double norm = 0.0;
};

struct AnnulusReport {
    std::vector<AnnulusPoint> points;
    double slope = 0.0;   // least squares slope of log2(norm) against d
    bool fitted = false;
    std::vector<std::string> warnings;
};

AnnulusReport annulus_upper_decay(const GridFunction& b, const KernelSpec& kernel, const WeightSpec& w,
                                  const Cube& q, int m, double alpha, int d_lo, int d_hi, double eta0 = 0.0);

struct CurvePoint {
    double parameter = 0.0;
    double value = 0.0;
};

struct FkReport {
    double bound = 0.0;
    std::vector<CurvePoint> tail;
    std::vector<CurvePoint> modulus;
};

// Outputs of the commutator on the ball, measured in L^q(ω^q). Shifts are
// whole cells; in 2D the shift set is thinned to a stride of ρ/8. The shift
// difference is summed over x with x + y still on the grid, so the
// artificial jump at the grid edge does not enter the modulus.
FkReport fk_compactness_probe(const CommutatorSpec& op, const WeightSpec& w, double p, double q,
                              const std::vector<GridFunction>& ball, const std::vector<double>& n_range,
                              const std::vector<double>& rho_range);

} // namespace lipcmo
