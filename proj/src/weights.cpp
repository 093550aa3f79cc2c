#include "lipcmo/weights.hpp"
#include "lipcmo/parallel.hpp"

#include <cmath>
#include <limits>

namespace lipcmo {

namespace {

struct Moments {
    double count = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// Cell averages of ω^pa and ω^pb over Q.
Moments moments(const GridFunction& w, const Cube& q, double pa, double pb)
{
    const CellRange r = admissible_cells(w, q);
    Moments m;
    m.count = static_cast<double>(r.count());
    for_each_cell(w.grid(), r, [&](Index i) {
        m.a += std::pow(w[i], pa);
        m.b += std::pow(w[i], pb);
    });
    m.a /= m.count;
    m.b /= m.count;
    return m;
}

} // namespace

WeightSpec::WeightSpec(GridFunction weight, double p_, std::optional<double> q_)
    : w(std::move(weight)), p(p_), q(q_)
{
    if (!(p > 1.0) || !std::isfinite(p))
        throw ArgumentError("weight exponent p must lie in (1, inf)");
    if (q && (!(*q > 1.0) || !std::isfinite(*q)))
        throw ArgumentError("weight exponent q must lie in (1, inf)");
    if (!(w.values().minCoeff() > 0.0))
        throw ValidationError("weights must be strictly positive");
}

double exponent_q(double p, int m, double alpha, double beta, int n)
{
    const double inv = 1.0 / p - (m * alpha + beta) / n;
    if (!(inv > 0.0 && inv < 1.0))
        throw ArgumentError("exponent relation 1/q = 1/p - (m*alpha+beta)/n gives no q in (1, inf)");
    return 1.0 / inv;
}

void check_exponent_relation(double p, double q, int m, double alpha, double beta, int n)
{
    const double lhs = 1.0 / q, rhs = 1.0 / p - (m * alpha + beta) / n;
    if (std::abs(lhs - rhs) > 1e-9)
        throw ArgumentError("exponents violate 1/q = 1/p - (m*alpha+beta)/n");
}

double weighted_measure(const WeightSpec& spec, const Cube& e, double power)
{
    const GridSpec& g = spec.w.grid();
    if (!g.domain().contains(e, 1e-9 * g.domain().side()))
        throw DomainError("measured set leaves the weight domain");
    const CellRange r = g.cells(e);
    double s = 0.0;
    for_each_cell(g, r, [&](Index i) { s += std::pow(spec.w[i], power); });
    return s * g.cell_volume();
}

double weighted_measure(const WeightSpec& spec, const std::vector<Index>& cells, double power)
{
    double s = 0.0;
    for (Index i : cells)
        s += std::pow(spec.w[i], power);
    return s * spec.w.grid().cell_volume();
}

double ap_product(const WeightSpec& spec, const Cube& q)
{
    const Moments m = moments(spec.w, q, 1.0, 1.0 - spec.p_dual());
    return m.a * std::pow(m.b, spec.p - 1.0);
}

namespace {

// Max over the family of body(avg a, avg b). Sums are taken cell by cell:
// prefix-sum differences lose all digits next to a singular weight.
template <class F>
double family_max(const GridFunction& w, const Eigen::ArrayXd& a, const Eigen::ArrayXd& b,
                  const DyadicFamily& family, F&& body)
{
    double best = 0.0;
    for (int k = family.min_level(); k <= family.max_level(); ++k) {
        const auto& cubes = family.level(k);
        best = std::max(best, parallel_max(static_cast<Index>(cubes.size()), [&](Index i) {
            const CellRange r = admissible_cells(w, cubes[static_cast<std::size_t>(i)]);
            double sa = 0.0, sb = 0.0;
            for_each_cell(w.grid(), r, [&](Index c) {
                sa += a[c];
                sb += b[c];
            });
            const double c = static_cast<double>(r.count());
            return body(sa / c, sb / c);
        }));
    }
    return best;
}

} // namespace

double ap_constant(const WeightSpec& spec, const DyadicFamily& family)
{
    const Eigen::ArrayXd& a = spec.w.values();
    const Eigen::ArrayXd b = a.pow(1.0 - spec.p_dual());
    return family_max(spec.w, a, b, family, [&](double ma, double mb) {
        const double v = ma * std::pow(mb, spec.p - 1.0);
        // Jensen: every cube product is at least 1
        if (v < 1.0 - 1e-9)
            throw std::logic_error("A_p product below 1 violates Jensen");
        return v;
    });
}

double apq_constant(const WeightSpec& spec, const DyadicFamily& family)
{
    if (!spec.q)
        throw ArgumentError("apq_constant needs q");
    const double q = *spec.q, pd = spec.p_dual();
    const Eigen::ArrayXd a = spec.w.values().pow(q);
    const Eigen::ArrayXd b = spec.w.values().pow(-pd);
    return family_max(spec.w, a, b, family,
                      [&](double ma, double mb) { return std::pow(ma, 1.0 / q) * std::pow(mb, 1.0 / pd); });
}

DoublingReport doubling_check(const WeightSpec& spec, const Cube& q, double lambda)
{
    if (!(lambda > 1.0))
        throw ArgumentError("doubling check needs lambda > 1");
    const Cube big = q.scaled(lambda);
    const GridSpec& g = spec.w.grid();
    if (big.overlap_fraction(g.domain()) < 1.0 - 1e-9)
        throw DomainError("lambda Q leaves the weight domain");
    const CellRange rq = admissible_cells(spec.w, q);
    const CellRange rb = admissible_cells(spec.w, big);
    DoublingReport rep;
    rep.ratio = weighted_measure(spec, big, 1.0) / weighted_measure(spec, q, 1.0);
    rep.ap = ap_product(spec, big);
    rep.measure_ratio = static_cast<double>(rb.count()) / static_cast<double>(rq.count());
    rep.cap = std::pow(rep.measure_ratio, spec.p) * rep.ap;
    rep.ok = rep.ratio <= rep.cap * (1.0 + 1e-12);
    return rep;
}

ReverseHolderReport reverse_holder_check(const WeightSpec& spec, const Cube& q, double eps_rh)
{
    if (!(eps_rh > 0.0))
        throw ArgumentError("reverse Hölder exponent must be positive");
    const Moments m = moments(spec.w, q, 1.0 + eps_rh, 1.0);
    ReverseHolderReport rep;
    rep.lhs = std::pow(m.a, 1.0 / (1.0 + eps_rh));
    rep.rhs = 2.0 * m.b;
    rep.ok = rep.lhs <= rep.rhs;
    return rep;
}

double reverse_holder_threshold(const WeightSpec& spec, const std::vector<Cube>& cubes,
                                const std::vector<double>& eps_grid)
{
    for (double e : eps_grid)
        for (const Cube& q : cubes)
            if (!reverse_holder_check(spec, q, e).ok)
                return e;
    return std::numeric_limits<double>::infinity();
}

} // namespace lipcmo
