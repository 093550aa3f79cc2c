#include "lipcmo/harness.hpp"
#include "lipcmo/oscillation.hpp"
#include "lipcmo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lipcmo {

namespace {

std::vector<Index> cell_list(const GridSpec& g, const CellRange& r)
{
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(r.count()));
    for_each_cell(g, r, [&](Index i) { out.push_back(i); });
    return out;
}

Point direction(const KernelSpec& k, double theta)
{
    if (k.dim() == 1)
        return point(std::cos(theta) >= 0.0 ? 1.0 : -1.0);
    return point(std::cos(theta), std::sin(theta));
}

// Points of Q used to test "for all x ∈ Q": a strided subset of cell
// centers plus the vertices.
std::vector<Point> q_samples(const GridSpec& g, const std::vector<Index>& cells, const Cube& q, int count)
{
    std::vector<Point> xs;
    const std::size_t stride = std::max<std::size_t>(1, cells.size() / static_cast<std::size_t>(std::max(count, 1)));
    for (std::size_t i = 0; i < cells.size(); i += stride)
        xs.push_back(g.center(cells[i]));
    for (int v = 0; v < q.vertex_count(); ++v)
        xs.push_back(q.vertex(v));
    return xs;
}

GridFunction indicator(const GridSpec& g, const std::vector<Index>& cells, double value)
{
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(g.size());
    for (Index i : cells)
        v[i] = value;
    return GridFunction(g, std::move(v));
}

GridFunction weight_power(const WeightSpec& w, double power)
{
    return GridFunction(w.w.grid(), w.w.values().pow(power));
}

double resolve_q(const WeightSpec& w, int m, double alpha, double beta, int n)
{
    if (w.q) {
        check_exponent_relation(w.p, *w.q, m, alpha, beta, n);
        return *w.q;
    }
    return exponent_q(w.p, m, alpha, beta, n);
}

void check_same_grid(const GridFunction& b, const WeightSpec& w, const KernelSpec& k)
{
    if (b.grid() != w.w.grid())
        throw ArgumentError("symbol and weight must share one grid");
    if (k.dim() != b.dim())
        throw ArgumentError("kernel and grid dimensions differ");
}

// Q, P, x0, y0, E, F of the compactness construction.
struct ProbeGeometry {
    MedianConstruction mc;
    double osc = 0.0;
    double lip = 0.0;
    double l_q = 0.0;
    Point x0, y0;
    Cube e, f;
    std::vector<Index> e_cells, f_cells;
};

ProbeGeometry probe_geometry(const GridFunction& b, const KernelSpec& kernel, const Cube& q, double alpha)
{
    const GridSpec& g = b.grid();
    ProbeGeometry pg;
    pg.osc = osc_alpha_inf(b, q, alpha);
    pg.mc = build_median_sets(b, kernel, q, 0.25);
    const Cube& p = pg.mc.p;
    const double bp = cube_average(b, p);
    const auto qc = cell_list(g, admissible_cells(b, q));
    const auto pc = cell_list(g, admissible_cells(b, p));
    Index xi = qc.front(), yi = pc.front();
    for (Index i : qc)
        if (std::abs(b[i] - bp) > std::abs(b[xi] - bp))
            xi = i;
    for (Index i : pc)
        if (std::abs(b[i] - bp) < std::abs(b[yi] - bp))
            yi = i;
    pg.x0 = g.center(xi);
    pg.y0 = g.center(yi);
    pg.lip = lip_alpha_norm(b, alpha);
    const double l = q.side();
    pg.l_q = 0.5 * l;
    if (pg.lip > 0.0)
        pg.l_q = std::min(std::pow(pg.osc / (4.0 * pg.lip), 1.0 / alpha) * l / std::sqrt(double(b.dim())), 0.5 * l);
    const double h = g.cell_size();
    const double side = std::max(1.0, std::floor(pg.l_q / h + 1e-9)) * h;
    pg.e = Cube(pg.x0, side);
    pg.f = Cube(pg.y0, side);
    pg.e_cells = cell_list(g, g.cells(pg.e));
    pg.f_cells = cell_list(g, g.cells(pg.f));
    if (pg.e_cells.empty() || pg.f_cells.empty())
        throw ConstructionError("E or F has no grid cell");
    return pg;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace

bool MedianChecks::ok() const
{
    return cover && f_measure && sign_failures == 0 && median_failures == 0 && kernel_failures == 0 &&
           small_set_failures == 0;
}

double median_value(const GridFunction& b, const Cube& q)
{
    return sample_median(b, q);
}

MedianConstruction build_median_sets(const GridFunction& b, const KernelSpec& kernel, const Cube& q, double gamma,
                                     const MedianOptions& opt)
{
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ArgumentError("gamma must lie in (0, 1)");
    if (kernel.dim() != b.dim())
        throw ArgumentError("kernel and grid dimensions differ");
    validate_sign_window(kernel);
    const GridSpec& g = b.grid();
    const int n = b.dim();
    const double h = g.cell_size(), vol = g.cell_volume();
    const SignWindow win = sign_window(kernel);

    MedianConstruction mc;
    mc.q = q;
    mc.gamma = gamma;
    mc.eps0 = win.eps0;
    mc.theta0 = direction(kernel, win.theta0);
    const auto qc = cell_list(g, admissible_cells(b, q));
    const double q_measure = static_cast<double>(qc.size()) * vol;
    const auto xs = q_samples(g, qc, q, opt.x_samples);

    const double d_min = 10.0 * std::sqrt(double(n)) * q.side();
    bool placed = false;
    std::string failing = "P leaves the domain";
    for (Index step = 0;; ++step) {
        const double d = d_min + static_cast<double>(step) * h;
        Point v = -d * mc.theta0;
        for (int j = 0; j < n; ++j)
            v[j] = std::round(v[j] / h) * h;
        if (v.norm() <= d_min)
            continue;
        const Cube p = q.translated(v);
        if (!g.domain().contains(p, 1e-9 * h))
            break;
        const auto pc = cell_list(g, g.cells(p));
        double worst = 0.0;
        Index kernel_bad = 0;
        for (const Point& x : xs) {
            Index small = 0;
            for (Index y : pc) {
                const double om = kernel.omega(x - g.center(y));
                if (std::abs(om) < mc.eps0)
                    ++small;
                if (om * win.sign < 0.0)
                    ++kernel_bad;
            }
            worst = std::max(worst, static_cast<double>(small) * vol / q_measure);
        }
        if (kernel_bad > 0) {
            failing = "condition (3): kernel sign on Q x P";
            continue;
        }
        if (worst > gamma) {
            failing = "condition (4): |N_x cap P| <= gamma|Q|";
            continue;
        }
        mc.p = p;
        mc.k0 = v.norm() / q.side();
        mc.checks.max_small_fraction = worst;
        placed = true;
        break;
    }
    if (!placed)
        throw ConstructionError("no admissible k0 inside the domain; last failing " + failing);

    const auto pc = cell_list(g, g.cells(mc.p));
    mc.m_b = median_value(b, mc.p);
    for (Index i : qc) {
        if (b[i] >= mc.m_b)
            mc.e1.push_back(i);
        if (b[i] <= mc.m_b)
            mc.e2.push_back(i);
    }
    const std::size_t half = qc.size() / 2;
    std::vector<Index> lowp, highp;
    for (Index i : pc) {
        if (b[i] <= mc.m_b)
            lowp.push_back(i);
        if (b[i] >= mc.m_b)
            highp.push_back(i);
    }
    std::stable_sort(lowp.begin(), lowp.end(), [&](Index a, Index c) { return b[a] < b[c]; });
    std::stable_sort(highp.begin(), highp.end(), [&](Index a, Index c) { return b[a] > b[c]; });
    if (lowp.size() < half || highp.size() < half)
        throw ConstructionError("median split of P is smaller than |Q|/2");
    mc.f1.assign(lowp.begin(), lowp.begin() + static_cast<std::ptrdiff_t>(half));
    mc.f2.assign(highp.begin(), highp.begin() + static_cast<std::ptrdiff_t>(half));

    // re-verify on samples
    MedianChecks& ck = mc.checks;
    {
        std::vector<char> in(qc.size(), 0);
        std::vector<Index> sorted = qc;
        std::sort(sorted.begin(), sorted.end());
        auto mark = [&](const std::vector<Index>& e) {
            for (Index i : e) {
                auto it = std::lower_bound(sorted.begin(), sorted.end(), i);
                if (it != sorted.end() && *it == i)
                    in[static_cast<std::size_t>(it - sorted.begin())] = 1;
            }
        };
        mark(mc.e1);
        mark(mc.e2);
        ck.cover = std::all_of(in.begin(), in.end(), [](char c) { return c != 0; });
    }
    ck.f_measure = std::abs(static_cast<double>(mc.f1.size()) * vol - 0.5 * q_measure) <= vol * (1.0 + 1e-12) &&
                   mc.f1.size() == mc.f2.size();
    std::mt19937_64 rng(opt.seed);
    const double scale = 1e-12 * std::max(1.0, b.values().abs().maxCoeff());
    auto pick = [&](const std::vector<Index>& v) {
        std::uniform_int_distribution<std::size_t> u(0, v.size() - 1);
        return v[u(rng)];
    };
    const Index per = std::max<Index>(1, opt.pair_samples / 2);
    for (int i = 0; i < 2; ++i) {
        const auto& e = i == 0 ? mc.e1 : mc.e2;
        const auto& f = i == 0 ? mc.f1 : mc.f2;
        if (e.empty() || f.empty())
            continue;
        const double s = i == 0 ? 1.0 : -1.0;
        for (Index k = 0; k < per; ++k) {
            const Index x = pick(e), y = pick(f);
            const double diff = b[x] - b[y];
            ++ck.pairs;
            if (s * diff < -scale)
                ++ck.sign_failures;
            if (std::abs(b[x] - mc.m_b) > std::abs(diff) + scale)
                ++ck.median_failures;
            const double om = kernel.omega(g.center(x) - g.center(y));
            if (om * win.sign < 0.0)
                ++ck.kernel_failures;
        }
    }
    if (ck.max_small_fraction > gamma)
        ++ck.small_set_failures;
    return mc;
}

LowerBoundReport lower_bound_ratio(const GridFunction& b, const KernelSpec& kernel, const WeightSpec& w,
                                   const Cube& q, int m, double alpha, const MedianOptions& opt)
{
    check_same_grid(b, w, kernel);
    LowerBoundReport r;
    r.q = resolve_q(w, m, alpha, kernel.beta(), b.dim());
    const double osc = osc_alpha_inf(b, q, alpha);
    if (osc <= 1e-14 * std::max(1.0, b.values().abs().maxCoeff())) {
        r.degenerate = true;
        return r;
    }
    r.construction = build_median_sets(b, kernel, q, 0.25, opt);
    const GridSpec& g = b.grid();
    const auto qc = cell_list(g, admissible_cells(b, q));
    const GridFunction wq = weight_power(w, r.q);
    CommutatorSpec spec{kernel, b, m, {}};
    for (const auto* fi : {&r.construction.f1, &r.construction.f2}) {
        const double norm = std::pow(weighted_measure(w, *fi, w.p), -1.0 / w.p);
        const GridFunction f = indicator(g, *fi, norm);
        const GridFunction out = apply_commutator_on(spec, f, qc);
        r.lhs += weighted_lp_norm(out, wq, r.q, qc);
    }
    r.rhs = std::pow(osc, m);
    r.ratio = r.lhs / r.rhs;
    return r;
}

std::vector<Index> probe_e_cells(const GridFunction& b, const KernelSpec& kernel, const Cube& q, double alpha)
{
    return probe_geometry(b, kernel, q, alpha).e_cells;
}

CompactnessReport compactness_lower_probe(const GridFunction& b, const KernelSpec& kernel, const WeightSpec& w,
                                          const Cube& q, int m, double alpha, double eta0,
                                          const std::vector<Index>& exclude)
{
    check_same_grid(b, w, kernel);
    const int n = b.dim();
    const double qexp = resolve_q(w, m, alpha, kernel.beta(), n);
    if (!(alpha > 0.0))
        throw ArgumentError("alpha must lie in (0, 1]");
    const double osc = osc_alpha_inf(b, q, alpha);
    if (osc < eta0)
        throw PreconditionError("osc_alpha_inf(b, Q) = " + std::to_string(osc) + " is below eta0");
    const ProbeGeometry pg = probe_geometry(b, kernel, q, alpha);
    if (2 * exclude.size() > pg.e_cells.size())
        throw PreconditionError("exclusion set exceeds |E|/2");

    CompactnessReport r;
    r.osc = pg.osc;
    r.lip = pg.lip;
    r.l_q = pg.l_q;
    r.e = pg.e;
    r.f = pg.f;
    r.x0 = pg.x0;
    r.y0 = pg.y0;
    std::vector<Index> ex = exclude;
    std::sort(ex.begin(), ex.end());
    std::vector<Index> targets;
    for (Index i : pg.e_cells) {
        if (std::binary_search(ex.begin(), ex.end(), i))
            ++r.excluded;
        else
            targets.push_back(i);
    }
    const GridSpec& g = b.grid();
    const double norm = std::pow(weighted_measure(w, pg.f_cells, w.p), -1.0 / w.p);
    const GridFunction f = indicator(g, pg.f_cells, norm);
    const GridFunction out = apply_commutator_on(CommutatorSpec{kernel, b, m, {}}, f, targets);
    r.lhs = weighted_lp_norm(out, weight_power(w, qexp), qexp, targets);
    r.rhs = std::min(std::pow(pg.osc, 2.0 * n / alpha), 1.0) * std::pow(pg.osc, m);
    r.ratio = r.lhs / r.rhs;
    return r;
}

AnnulusReport annulus_upper_decay(const GridFunction& b, const KernelSpec& kernel, const WeightSpec& w,
                                  const Cube& q, int m, double alpha, int d_lo, int d_hi, double eta0)
{
    check_same_grid(b, w, kernel);
    if (kernel.table().empty() || !std::isfinite(kernel.sup_norm()))
        throw ArgumentError("annulus decay needs a bounded kernel");
    if (d_lo > d_hi)
        throw ArgumentError("empty d range");
    const double qexp = resolve_q(w, m, alpha, kernel.beta(), b.dim());
    const double osc = osc_alpha_inf(b, q, alpha);
    if (osc < eta0)
        throw PreconditionError("osc_alpha_inf(b, Q) is below eta0");
    const ProbeGeometry pg = probe_geometry(b, kernel, q, alpha);
    const GridSpec& g = b.grid();
    const double norm = std::pow(weighted_measure(w, pg.f_cells, w.p), -1.0 / w.p);
    const GridFunction f = indicator(g, pg.f_cells, norm);
    const GridFunction wq = weight_power(w, qexp);
    const CommutatorSpec spec{kernel, b, m, {}};

    AnnulusReport r;
    for (int d = d_lo; d <= d_hi; ++d) {
        const Cube outer = q.scaled(std::ldexp(1.0, d + 1));
        if (!g.domain().contains(outer, 1e-9 * g.cell_size())) {
            r.warnings.push_back("annulus d=" + std::to_string(d) + " leaves the domain; d range truncated");
            break;
        }
        const CellRange ro = g.cells(outer), ri = g.cells(q.scaled(std::ldexp(1.0, d)));
        std::vector<Index> cells;
        for_each_cell(g, ro, [&](Index i) {
            const auto ij = g.unflatten(i);
            bool inside = true;
            for (int j = 0; j < g.dim(); ++j)
                inside = inside && ij[j] >= ri.lo[j] && ij[j] < ri.hi[j];
            if (!inside)
                cells.push_back(i);
        });
        const GridFunction out = apply_commutator_on(spec, f, cells);
        r.points.push_back({d, weighted_lp_norm(out, wq, qexp, cells)});
    }
    std::vector<double> xs, ys;
    for (const auto& pt : r.points)
        if (pt.norm > 0.0) {
            xs.push_back(pt.d);
            ys.push_back(std::log2(pt.norm));
        }
    if (xs.size() >= 2) {
        r.slope = least_squares_slope(xs, ys);
        r.fitted = true;
    }
    return r;
}

FkReport fk_compactness_probe(const CommutatorSpec& op, const WeightSpec& w, double p, double q,
                              const std::vector<GridFunction>& ball, const std::vector<double>& n_range,
                              const std::vector<double>& rho_range)
{
    if (ball.empty())
        throw ArgumentError("ball must not be empty");
    if (!(p > 1.0) || !(q > 1.0))
        throw ArgumentError("exponents must exceed 1");
    const GridSpec& g = ball.front().grid();
    if (w.w.grid() != g)
        throw ArgumentError("weight and ball must share one grid");
    const GridFunction wp = weight_power(w, p), wq = weight_power(w, q);
    for (const auto& f : ball)
        if (weighted_lp_norm(f, wp, p) > 1.0 + 1e-9)
            throw ValidationError("ball member has L^p(w^p) norm above 1");

    std::vector<GridFunction> outs;
    for (const auto& f : ball)
        outs.push_back(op.b_vector.empty() ? apply_commutator_m(op, f, g) : apply_commutator_vec(op, f, g));

    FkReport r;
    for (const auto& o : outs)
        r.bound = std::max(r.bound, weighted_lp_norm(o, wq, q));

    std::vector<double> ns = n_range;
    std::sort(ns.begin(), ns.end());
    for (double big_n : ns) {
        std::vector<Index> cells;
        for (Index i = 0; i < g.size(); ++i)
            if (g.center(i).cwiseAbs().maxCoeff() > big_n)
                cells.push_back(i);
        double t = 0.0;
        for (const auto& o : outs)
            t = std::max(t, weighted_lp_norm(o, wq, q, cells));
        r.tail.push_back({big_n, t});
    }

    std::vector<double> rhos = rho_range;
    std::sort(rhos.begin(), rhos.end(), std::greater<>());
    if (rhos.empty())
        return r;
    const double h = g.cell_size();
    const Index rmax = static_cast<Index>(std::floor(rhos.front() / h + 1e-9));
    const Index stride = g.dim() == 1 ? 1 : std::max<Index>(1, rmax / 8);
    std::vector<std::array<Index, 2>> shifts;
    for (Index s1 = g.dim() == 2 ? -rmax : 0; s1 <= (g.dim() == 2 ? rmax : 0); s1 += stride)
        for (Index s0 = -rmax; s0 <= rmax; s0 += stride)
            if ((s0 != 0 || s1 != 0) && double(s0 * s0 + s1 * s1) <= double(rmax * rmax))
                shifts.push_back({s0, s1});
    // per-shift norm, max over the ball
    std::vector<double> norm(shifts.size(), 0.0);
    const Index res = g.resolution();
    parallel_for(static_cast<Index>(shifts.size()), [&](Index k) {
        const auto s = shifts[static_cast<std::size_t>(k)];
        double best = 0.0;
        for (const auto& o : outs) {
            double acc = 0.0;
            for (Index i = 0; i < g.size(); ++i) {
                const auto ij = g.unflatten(i);
                const Index a = ij[0] + s[0], c = ij[1] + s[1];
                const bool in = a >= 0 && a < res && (g.dim() == 1 || (c >= 0 && c < res));
                if (!in)
                    continue;
                acc += std::pow(std::abs(o[g.flat(a, g.dim() == 1 ? 0 : c)] - o[i]), q) * wq[i];
            }
            best = std::max(best, std::pow(acc * g.cell_volume(), 1.0 / q));
        }
        norm[static_cast<std::size_t>(k)] = best;
    });
    for (double rho : rhos) {
        const double lim = std::floor(rho / h + 1e-9);
        double mx = 0.0;
        for (std::size_t k = 0; k < shifts.size(); ++k)
            if (double(shifts[k][0] * shifts[k][0] + shifts[k][1] * shifts[k][1]) <= lim * lim)
                mx = std::max(mx, norm[k]);
        r.modulus.push_back({rho, mx});
    }
    return r;
}

} // namespace lipcmo
