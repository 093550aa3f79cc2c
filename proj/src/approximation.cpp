#include "lipcmo/approximation.hpp"
#include "lipcmo/oscillation.hpp"
#include "lipcmo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace lipcmo {

namespace {

constexpr int kScanCap = 80;

std::string sci(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

// Lattice sweeps at dyadic sides 2^e, cached per e.
class ScaleScanner {
public:
    struct Level {
        double sup = 0.0;
        std::vector<std::pair<double, double>> cubes; // (inner radius, oscillation)
    };

    ScaleScanner(const GridFunction& f, double alpha, bool zero)
        : f_(f), alpha_(alpha), zero_(zero), sums_(f.grid(), f.values())
    {
        e_dom_ = static_cast<int>(std::floor(std::log2(f.domain().side()) + 1e-12));
        l1_ = f.values().abs().sum() * f.grid().cell_volume();
    }

    int e_dom() const { return e_dom_; }
    const BoxSums& sums() const { return sums_; }

    // Bound on every cube of side 2^e (zero extension only).
    double tail_bound(int e) const
    {
        const double s = std::ldexp(1.0, e);
        return 2.0 * l1_ / std::pow(s, f_.dim() + alpha_);
    }

    const Level& level(int e)
    {
        auto it = cache_.find(e);
        if (it != cache_.end())
            return it->second;
        Level lv;
        const double s = std::ldexp(1.0, e);
        std::vector<Cube> cubes;
        if (zero_) {
            const Cube region(f_.domain().center(), f_.domain().side() + 2.0 * s);
            for (auto& q : origin_lattice(s, region))
                if (q.overlaps(f_.domain()))
                    cubes.push_back(q);
        } else if (s <= f_.domain().side() * (1.0 + 1e-12)) {
            cubes = origin_lattice(s, f_.domain());
        }
        lv.cubes.resize(cubes.size());
        parallel_for(static_cast<Index>(cubes.size()), [&](Index k) {
            const Cube& q = cubes[static_cast<std::size_t>(k)];
            const double o = zero_ ? osc_alpha_zero_extended(f_, sums_, q, alpha_) : osc_alpha(f_, q, alpha_);
            lv.cubes[static_cast<std::size_t>(k)] = {q.inner_radius(), o};
        });
        for (auto& c : lv.cubes)
            lv.sup = std::max(lv.sup, c.second);
        return cache_.emplace(e, std::move(lv)).first->second;
    }

    // Largest side exponent that can still carry an oscillation >= thr.
    int top(double thr)
    {
        if (!zero_)
            return e_dom_;
        int e = e_dom_;
        while (e < e_dom_ + kScanCap && tail_bound(e) >= thr)
            ++e;
        return e;
    }

    // Do all sides >= 2^{e0} keep the sup below thr (strictly or not)?
    // On failure *witness receives the offending exponent.
    bool all_below(int e0, double thr, bool strict, int* witness = nullptr)
    {
        auto bad = [&](double v) { return strict ? v >= thr : v > thr; };
        const int last = zero_ ? e_dom_ + kScanCap : e_dom_;
        for (int e = e0; e <= last; ++e) {
            if (zero_) {
                const double b = tail_bound(e);
                if (!bad(b))
                    return true;
            }
            if (bad(level(e).sup)) {
                if (witness)
                    *witness = e;
                return false;
            }
        }
        return !zero_;
    }

    double far_sup(double radius, int e_lo, int e_hi)
    {
        double best = 0.0;
        for (int e = e_lo; e <= e_hi; ++e)
            for (const auto& c : level(e).cubes)
                if (c.first > radius * (1.0 + 1e-12))
                    best = std::max(best, c.second);
        return best;
    }

private:
    const GridFunction& f_;
    double alpha_;
    bool zero_;
    BoxSums sums_;
    int e_dom_ = 0;
    double l1_ = 0.0;
    std::map<int, Level> cache_;
};

bool vanishes_on_boundary(const GridFunction& f)
{
    const GridSpec& g = f.grid();
    const double scale = f.values().abs().maxCoeff();
    if (scale == 0.0)
        return true;
    const Index r = g.resolution();
    for (Index i = 0; i < g.size(); ++i) {
        const auto ij = g.unflatten(i);
        bool edge = ij[0] == 0 || ij[0] == r - 1;
        if (g.dim() == 2)
            edge = edge || ij[1] == 0 || ij[1] == r - 1;
        if (edge && std::abs(f[i]) > 1e-12 * scale)
            return false;
    }
    return true;
}

// Average of f over the cube of the given side centered at c.
double vertex_average(const GridFunction& f, const BoxSums& sums, bool zero, const Point& c, double side)
{
    const Cube q(c, side);
    if (zero)
        return average_zero_extended(f, sums, q);
    if (q.overlap_fraction(f.domain()) < 1.0 - 1e-9) {
        std::ostringstream msg;
        msg << "vertex average unavailable: cube of side " << side << " at (";
        for (int j = 0; j < c.size(); ++j)
            msg << (j ? "," : "") << c[j];
        msg << ") leaves the grid domain";
        throw DomainError(msg.str());
    }
    return cube_average(f, q);
}

Index ipow(Index b, int e)
{
    Index r = 1;
    while (e-- > 0)
        r *= b;
    return r;
}

} // namespace

std::vector<Cube> shell_cubes(const ApproxPlan& plan, const Shell& shell)
{
    const int n = plan.dim;
    const double lo = -std::ldexp(1.0, shell.m);
    const Index per = static_cast<Index>(std::llround(-2.0 * lo / shell.side));
    const Index q = per / 4;
    std::vector<Cube> out;
    Point lower(n);
    for (Index b = 0; b < (n == 1 ? 1 : per); ++b)
        for (Index a = 0; a < per; ++a) {
            if (shell.m > plan.d1) {
                const bool inner_a = a >= q && a < 3 * q;
                const bool inner_b = n == 1 || (b >= q && b < 3 * q);
                if (inner_a && inner_b)
                    continue;
            }
            lower[0] = lo + static_cast<double>(a) * shell.side;
            if (n == 2)
                lower[1] = lo + static_cast<double>(b) * shell.side;
            out.push_back(Cube::from_lower(lower, shell.side));
        }
    return out;
}

ApproxPlan plan_scales(const GridFunction& f, double alpha, double eps, const PlanOptions& opt)
{
    if (!(eps > 0.0))
        throw ArgumentError("eps must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ArgumentError("alpha must lie in [0, 1]");
    const int n = f.dim();
    const Cube& dom = f.domain();
    for (int j = 0; j < n; ++j)
        if (std::abs(dom.center()[j]) > 1e-12 * dom.side())
            throw ArgumentError("approximation needs a grid domain centered at the origin");

    ApproxPlan plan;
    plan.dim = n;
    plan.eps = eps;
    plan.alpha = alpha;
    plan.zero_extended = opt.allow_zero_extension && vanishes_on_boundary(f);
    ScaleScanner scan(f, alpha, plan.zero_extended);

    const int e_min = static_cast<int>(std::ceil(std::log2(opt.min_piece_cells * f.cell_size()) - 1e-12));
    const int e_dom = scan.e_dom();
    if (e_min > e_dom)
        throw ScaleUnresolvable("grid too coarse for any dyadic piece");

    // (1) small scales: i is the largest index whose sides 2^{e_min}..2^{i+2}
    // all stay below eps.
    int first_bad = std::numeric_limits<int>::max();
    for (int e = e_min; e <= e_dom; ++e)
        if (scan.level(e).sup >= eps) {
            first_bad = e;
            break;
        }
    int i = 0;
    if (first_bad == std::numeric_limits<int>::max()) {
        // every tested oscillation is below eps: minimal indices
        i = e_min;
    } else {
        i = first_bad - 3;
        if (i < e_min)
            throw ScaleUnresolvable("condition (1) small scale: sup oscillation "
                                    + sci(scan.level(first_bad).sup) + " >= eps at side 2^"
                                    + std::to_string(first_bad));
    }

    // (2) large scales
    int j = e_min;
    while (!scan.all_below(j, eps, true)) {
        ++j;
        if (j > e_dom + kScanCap)
            throw ScaleUnresolvable("condition (2) large scale never falls below eps");
    }

    // (3) far away
    const int e_far = scan.top(eps);
    int k = e_min;
    while (scan.far_sup(std::ldexp(1.0, k), e_min, e_far) >= eps) {
        ++k;
        if (k > e_dom + kScanCap)
            throw ScaleUnresolvable("condition (3) far away never falls below eps");
    }
    k = std::max(k, i + 3);

    const int d1 = k + 1;
    const double tau = std::ldexp(eps, i - d1 - 1);
    const double half = 0.5 * dom.side();
    int d2 = std::max(j, d1);
    for (;; ++d2) {
        if (!plan.zero_extended) {
            const double reach = std::ldexp(1.0, d2 + 1);
            if (reach > half * (1.0 + 1e-12))
                throw ScaleUnresolvable("shell condition: shells up to R_" + std::to_string(d2 + 1)
                                        + " do not fit in the grid domain");
        }
        if (scan.all_below(i + d2 - d1, tau, false))
            break;
        if (d2 > d1 + kScanCap)
            throw ScaleUnresolvable("shell condition never holds within the scan range");
    }

    plan.i_eps = i;
    plan.j_eps = j;
    plan.k_eps = k;
    plan.d1 = d1;
    plan.d2 = d2;
    for (int m = d1; m <= d2 + 1; ++m)
        plan.shells.push_back({m, std::ldexp(1.0, i + m - d1)});
    plan.tail_note = plan.zero_extended
        ? "input vanishes on the boundary layer; treated as compactly supported, tail bounded by 2||f||_1/|Q|^(1+a/n)"
        : "cubes larger than the grid domain are untested";

    // A_{d2}: mean of f_{P_{d2}+b} over the distinct vertices of the shell-d2 cubes.
    const double side_d2 = std::ldexp(1.0, i + d2 - d1);
    const Index per = (Index(2) << (d1 - i)) + 1;
    const Index mid = per / 2, quarter = (per - 1) / 4;
    double acc = 0.0;
    Index count = 0;
    const double lo = -std::ldexp(1.0, d2);
    for (Index b = 0; b < (n == 1 ? 1 : per); ++b)
        for (Index a = 0; a < per; ++a) {
            Index r = std::abs(a - mid);
            if (n == 2)
                r = std::max(r, std::abs(b - mid));
            if (d2 > d1 && r < quarter)
                continue;
            Point c(n);
            c[0] = lo + static_cast<double>(a) * side_d2;
            if (n == 2)
                c[1] = lo + static_cast<double>(b) * side_d2;
            acc += vertex_average(f, scan.sums(), plan.zero_extended, c, side_d2);
            ++count;
        }
    plan.offset_constant = acc / static_cast<double>(count);
    return plan;
}

PiecewiseInterpolant::PiecewiseInterpolant(int dim, int i_eps, int d1, int d2, double outside_value,
                                           std::vector<Eigen::ArrayXd> vertex_values)
    : dim_(dim), i_(i_eps), d1_(d1), d2_(d2), outside_(outside_value), values_(std::move(vertex_values))
{
    per_axis_ = (Index(2) << (d1 - i_eps)) + 1;
    if (static_cast<int>(values_.size()) != d2 - d1 + 2)
        throw ArgumentError("one vertex table per shell expected");
}

double PiecewiseInterpolant::side(int m) const { return std::ldexp(1.0, i_ + m - d1_); }

double PiecewiseInterpolant::radius() const { return std::ldexp(1.0, d2_ + 1); }

double PiecewiseInterpolant::vertex_value(int m, Index a0, Index a1) const
{
    return values_.at(static_cast<std::size_t>(m - d1_))[a0 + a1 * per_axis_];
}

bool PiecewiseInterpolant::owns(int m, Index t0, Index t1) const
{
    if (m == d1_)
        return true;
    const Index q = (per_axis_ - 1) / 4;
    const bool in0 = t0 >= q && t0 < 3 * q;
    const bool in1 = dim_ == 1 || (t1 >= q && t1 < 3 * q);
    return !(in0 && in1);
}

WeightedCube PiecewiseInterpolant::piece(int m, Index t0, Index t1) const
{
    const double s = side(m);
    const double lo = -std::ldexp(1.0, m);
    Point lower(dim_);
    lower[0] = lo + static_cast<double>(t0) * s;
    if (dim_ == 2)
        lower[1] = lo + static_cast<double>(t1) * s;
    VertexValues psi(1 << dim_);
    const auto& v = values_[static_cast<std::size_t>(m - d1_)];
    for (int mask = 0; mask < psi.size(); ++mask) {
        const Index a0 = t0 + (mask & 1);
        const Index a1 = dim_ == 2 ? t1 + ((mask >> 1) & 1) : 0;
        psi[mask] = v[a0 + a1 * per_axis_];
    }
    return WeightedCube(Cube::from_lower(lower, s), psi);
}

int PiecewiseInterpolant::shell_of(const Point& x) const
{
    const double r = x.cwiseAbs().maxCoeff();
    if (r > std::ldexp(1.0, d2_ + 1))
        return d2_ + 2;
    if (r <= std::ldexp(1.0, d1_))
        return d1_;
    int e = 0;
    const double fr = std::frexp(r, &e);
    const int m = fr == 0.5 ? e - 1 : e;
    return std::clamp(m, d1_ + 1, d2_ + 1);
}

std::optional<WeightedCube> PiecewiseInterpolant::piece_in_shell(int m, const Point& x) const
{
    if (m < d1_ || m > d2_ + 1)
        return std::nullopt;
    const double s = side(m);
    const double lo = -std::ldexp(1.0, m);
    std::array<Index, 2> t{0, 0}, alt{0, 0};
    for (int j = 0; j < dim_; ++j) {
        const double u = (x[j] - lo) / s;
        const double fl = std::floor(u);
        t[j] = static_cast<Index>(fl);
        // on a lattice line both neighbours contain x
        alt[j] = std::abs(u - std::round(u)) < 1e-9 ? static_cast<Index>(std::round(u)) - 1 : t[j];
    }
    for (int c = 0; c < (1 << dim_); ++c) {
        std::array<Index, 2> u{0, 0};
        for (int j = 0; j < dim_; ++j)
            u[j] = std::clamp<Index>(((c >> j) & 1) ? alt[j] : t[j], 0, per_axis_ - 2);
        if (owns(m, u[0], u[1]))
            return piece(m, u[0], u[1]);
    }
    return std::nullopt;
}

WeightedCube PiecewiseInterpolant::piece_at(const Point& x) const
{
    const int m = shell_of(x);
    if (m > d2_ + 1)
        throw DomainError("point lies outside R_{d2+1}; g is constant there");
    for (int mm : {m, m - 1, m + 1})
        if (auto p = piece_in_shell(mm, x))
            return *p;
    throw DomainError("no piece contains the point");
}

double PiecewiseInterpolant::operator()(const Point& x) const
{
    if (shell_of(x) > d2_ + 1)
        return outside_;
    return interpolate_unchecked(piece_at(x), x);
}

std::vector<WeightedCube> PiecewiseInterpolant::shell_pieces(int m) const
{
    std::vector<WeightedCube> out;
    const Index per = per_axis_ - 1;
    for (Index b = 0; b < (dim_ == 1 ? 1 : per); ++b)
        for (Index a = 0; a < per; ++a)
            if (owns(m, a, b))
                out.push_back(piece(m, a, b));
    return out;
}

std::vector<WeightedCube> PiecewiseInterpolant::pieces() const
{
    std::vector<WeightedCube> out;
    for (int m = d1_; m <= d2_ + 1; ++m) {
        auto p = shell_pieces(m);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::size_t PiecewiseInterpolant::piece_count() const
{
    const Index per = per_axis_ - 1;
    const Index full = dim_ == 1 ? per : per * per;
    const Index inner = dim_ == 1 ? per / 2 : (per / 2) * (per / 2);
    return static_cast<std::size_t>(full + (d2_ - d1_ + 1) * (full - inner));
}

GridFunction PiecewiseInterpolant::sample(const GridSpec& grid) const
{
    Eigen::ArrayXd v(grid.size());
    parallel_for(grid.size(), [&](Index i) { v[i] = (*this)(grid.center(i)); });
    return GridFunction(grid, std::move(v));
}

PiecewiseInterpolant build_vertex_maps(const GridFunction& f, const ApproxPlan& plan)
{
    const int n = plan.dim;
    if (n != f.dim())
        throw ArgumentError("plan and grid dimensions differ");
    if (plan.d1 - plan.i_eps < 4 || plan.d2 < plan.d1)
        throw ArgumentError("invalid plan indices");
    const BoxSums sums(f.grid(), f.values());
    const Index per = (Index(2) << (plan.d1 - plan.i_eps)) + 1;
    const Index mid = per / 2, quarter = (per - 1) / 4;
    const Index count = ipow(per, n);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<Eigen::ArrayXd> tables(static_cast<std::size_t>(plan.d2 - plan.d1 + 2),
                                       Eigen::ArrayXd::Constant(count, nan));
    tables.back().setConstant(plan.offset_constant);

    for (int m = plan.d2; m >= plan.d1; --m) {
        // the partially built interpolant: shells m+1 .. d2+1 are final
        const PiecewiseInterpolant outer(n, plan.i_eps, plan.d1, plan.d2, plan.offset_constant, tables);
        const double s = std::ldexp(1.0, plan.i_eps + m - plan.d1);
        const double lo = -std::ldexp(1.0, m);
        auto& tab = tables[static_cast<std::size_t>(m - plan.d1)];
        parallel_for(count, [&](Index idx) {
            const Index a = idx % per, b = n == 2 ? idx / per : 0;
            Index r = std::abs(a - mid);
            if (n == 2)
                r = std::max(r, std::abs(b - mid));
            if (m > plan.d1 && r < quarter)
                return;
            Point x(n);
            x[0] = lo + static_cast<double>(a) * s;
            if (n == 2)
                x[1] = lo + static_cast<double>(b) * s;
            if (r == mid)
                tab[idx] = interpolate_unchecked(*outer.piece_in_shell(m + 1, x), x);
            else
                tab[idx] = vertex_average(f, sums, plan.zero_extended, x, s);
        });
    }
    return PiecewiseInterpolant(n, plan.i_eps, plan.d1, plan.d2, plan.offset_constant, std::move(tables));
}

double approx_error(const GridFunction& f, const PiecewiseInterpolant& g, double alpha, const DyadicFamily& family)
{
    const GridFunction gs = g.sample(f.grid());
    const GridFunction diff(f.grid(), f.values() - gs.values());
    const auto cubes = sweep_cubes(family);
    return parallel_max(static_cast<Index>(cubes.size()),
                        [&](Index i) { return osc_alpha_inf(diff, cubes[static_cast<std::size_t>(i)], alpha); });
}

double mollifier_radius(const ApproxPlan& plan, const GridSpec& grid)
{
    return std::max(2.0 * grid.cell_size(), std::ldexp(1.0, plan.i_eps - 2));
}

double bump_profile(double r)
{
    if (r >= 1.0)
        return 0.0;
    return std::exp(-1.0 / (1.0 - r * r));
}

GridFunction mollify(const PiecewiseInterpolant& g, double t, const GridSpec& grid)
{
    if (g.dim() != grid.dim())
        throw ArgumentError("interpolant and grid dimensions differ");
    const double h = grid.cell_size();
    if (!(t >= 2.0 * h * (1.0 - 1e-12)))
        throw ArgumentError("mollifier radius must be at least two grid cells");
    const int n = grid.dim();
    const Index K = static_cast<Index>(std::ceil(t / h - 1e-12)) - 1; // taps with |k| h < t
    const Index r = grid.resolution();
    const Index w = r + 2 * K;

    // taps
    std::vector<std::pair<std::array<Index, 2>, double>> taps;
    double mass = 0.0;
    for (Index dj = (n == 2 ? -K : 0); dj <= (n == 2 ? K : 0); ++dj)
        for (Index di = -K; di <= K; ++di) {
            const double rr = std::hypot(static_cast<double>(di), static_cast<double>(dj)) * h / t;
            const double v = bump_profile(rr);
            if (v > 0.0) {
                taps.push_back({{di, dj}, v});
                mass += v;
            }
        }
    for (auto& tp : taps)
        tp.second /= mass;

    // g on the padded grid
    const Index padded = n == 1 ? w : w * w;
    Eigen::ArrayXd gp(padded);
    parallel_for(padded, [&](Index idx) {
        const Index a = idx % w, b = n == 2 ? idx / w : 0;
        Point x(n);
        x[0] = grid.axis_center(0, a - K);
        if (n == 2)
            x[1] = grid.axis_center(1, b - K);
        gp[idx] = g(x);
    });

    Eigen::ArrayXd out(grid.size());
    const double A = g.outside_value();
    parallel_for(grid.size(), [&](Index idx) {
        const auto ij = grid.unflatten(idx);
        double s = 0.0;
        for (const auto& tp : taps) {
            const Index a = ij[0] + K + tp.first[0];
            const Index b = n == 2 ? ij[1] + K + tp.first[1] : 0;
            s += tp.second * (gp[a + b * w] - A);
        }
        out[idx] = s;
    });
    return GridFunction(grid, std::move(out));
}

ChainReport regularity_chain_bound(const GridFunction& f, const Cube& q, const Cube& sub_q, double alpha, double eps)
{
    ChainReport rep;
    if (!q.contains(sub_q, 1e-12 * q.side()))
        throw ArgumentError("subQ must lie inside Q");
    const int n = q.dim();
    const double ratio = q.volume() / sub_q.volume();
    const int N = static_cast<int>(std::floor(std::log2(ratio) + 1e-12));
    rep.chain_length = N;
    rep.c_chain = alpha > 0.0 ? 2.0 / (1.0 - std::pow(2.0, -alpha / n)) + 2.0 : 2.0 * (N + 1) + 2.0;

    // nested cubes |Q_j| = 2^{-j}|Q| containing subQ
    std::vector<Cube> chain{q};
    for (int jj = 1; jj <= N; ++jj) {
        const Cube& prev = chain.back();
        const double s = q.side() * std::pow(2.0, -static_cast<double>(jj) / n);
        Point c(n);
        for (int a = 0; a < n; ++a)
            c[a] = std::clamp(sub_q.center()[a], prev.lo(a) + 0.5 * s, prev.hi(a) - 0.5 * s);
        chain.emplace_back(c, s);
    }
    for (const Cube& p : chain) {
        const double o = osc_alpha(f, p, alpha);
        if (!(o < eps)) {
            rep.precondition = false;
            rep.ok = false;
            rep.reason = "oscillation " + sci(o) + " >= eps on a chain cube of side " + sci(p.side());
            break;
        }
    }
    rep.lhs = std::abs(cube_average(f, q) - cube_average(f, sub_q));
    rep.rhs = rep.c_chain * std::pow(q.volume(), alpha / n) * eps;
    if (rep.precondition)
        rep.ok = rep.lhs <= rep.rhs;
    return rep;
}

} // namespace lipcmo
