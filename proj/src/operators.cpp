#include "lipcmo/operators.hpp"
#include "lipcmo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lipcmo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double theta)
{
    double t = std::fmod(theta, kTwoPi);
    return t < 0.0 ? t + kTwoPi : t;
}

// Nonzero cells of f with their grid coordinates.
struct Sources {
    std::vector<Index> flat;
    std::vector<std::array<Index, 2>> ij;
    std::vector<double> value;
};

Sources collect(const GridFunction& f)
{
    Sources s;
    const GridSpec& g = f.grid();
    for (Index i = 0; i < g.size(); ++i)
        if (f[i] != 0.0) {
            s.flat.push_back(i);
            s.ij.push_back(g.unflatten(i));
            s.value.push_back(f[i]);
        }
    return s;
}

// Distance from x to the boundary of the cell along the direction θ.
double ray_to_boundary(const Point& x, const Point& lo, const Point& hi, double theta)
{
    const double c = std::cos(theta), s = std::sin(theta);
    double t = std::numeric_limits<double>::infinity();
    if (c > 1e-15)
        t = std::min(t, (hi[0] - x[0]) / c);
    else if (c < -1e-15)
        t = std::min(t, (lo[0] - x[0]) / c);
    if (s > 1e-15)
        t = std::min(t, (hi[1] - x[1]) / s);
    else if (s < -1e-15)
        t = std::min(t, (lo[1] - x[1]) / s);
    return std::max(t, 0.0);
}

// ∫_cell Ω(x-y)|x-y|^{β-n} dy for x in the closed cell. β = 0 gives the
// principal value (needs x strictly inside); returns 0 for truncated kernels.
double local_integral(const KernelSpec& k, const Point& x, const Point& lo, double h)
{
    if (k.delta() > 0.0)
        return 0.0;
    const int n = k.dim();
    const double beta = k.beta();
    if (n == 1) {
        const double rp = lo[0] + h - x[0]; // toward y > x, where x - y < 0
        const double rm = x[0] - lo[0];
        const double om_neg = k.omega(point(-1.0)), om_pos = k.omega(point(1.0));
        if (beta > 0.0)
            return (om_neg * std::pow(rp, beta) + om_pos * std::pow(rm, beta)) / beta;
        if (rp <= 0.0 || rm <= 0.0)
            return 0.0;
        return om_neg * std::log(rp) + om_pos * std::log(rm);
    }
    Point hi = lo.array() + h;
    const int M = kAngularTableSize;
    double s = 0.0;
    for (int i = 0; i < M; ++i) {
        const double th = (i + 0.5) * kTwoPi / M;
        const double rho = ray_to_boundary(x, lo, hi, th);
        const double om = k.omega_angle(th + kPi);
        if (beta > 0.0)
            s += om * std::pow(rho, beta) / beta;
        else if (rho > 0.0)
            s += om * std::log(rho);
        else
            return 0.0;
    }
    return s * kTwoPi / M;
}

// Kernel weights h^n K(Δh) on integer offsets; Δ = 0 holds the exact
// local integral over a cell from its center.
class OffsetTable {
public:
    OffsetTable(const KernelSpec& k, double h, std::array<Index, 2> lo, std::array<Index, 2> hi)
        : n_(k.dim()), lo_(lo), hi_(hi)
    {
        w_ = hi_[0] - lo_[0] + 1;
        const Index rows = n_ == 2 ? hi_[1] - lo_[1] + 1 : 1;
        data_.resize(static_cast<std::size_t>(w_ * rows));
        const double vol = std::pow(h, n_);
        parallel_for(rows, [&](Index r) {
            for (Index c = 0; c < w_; ++c) {
                const Index d0 = lo_[0] + c, d1 = n_ == 2 ? lo_[1] + r : 0;
                double v = 0.0;
                if (d0 == 0 && d1 == 0) {
                    const Point x = Point::Zero(n_);
                    const Point cl = Point::Constant(n_, -0.5 * h);
                    v = local_integral(k, x, cl, h);
                } else {
                    Point z(n_);
                    z[0] = static_cast<double>(d0) * h;
                    if (n_ == 2)
                        z[1] = static_cast<double>(d1) * h;
                    v = k.kernel(z) * vol;
                }
                data_[static_cast<std::size_t>(c + r * w_)] = v;
            }
        });
    }

    double operator()(Index d0, Index d1) const
    {
        return data_[static_cast<std::size_t>((d0 - lo_[0]) + (n_ == 2 ? (d1 - lo_[1]) * w_ : 0))];
    }

    static bool fits(const std::array<Index, 2>& lo, const std::array<Index, 2>& hi, int n)
    {
        double size = static_cast<double>(hi[0] - lo[0] + 1);
        if (n == 2)
            size *= static_cast<double>(hi[1] - lo[1] + 1);
        return size <= 3.0e7;
    }

private:
    int n_;
    std::array<Index, 2> lo_, hi_;
    Index w_ = 1;
    std::vector<double> data_;
};

// Integer offset of grid b's origin cell in grid a's index space.
std::array<Index, 2> lattice_offset(const GridSpec& a, const GridSpec& b)
{
    std::array<Index, 2> off{0, 0};
    for (int j = 0; j < a.dim(); ++j)
        off[j] = static_cast<Index>(std::llround((b.domain().lo(j) - a.domain().lo(j)) / a.cell_size()));
    return off;
}

// Targets given in source index space; factor(t, s) multiplies f(s).
template <class Factor>
Eigen::ArrayXd accumulate(const KernelSpec& k, const GridSpec& src, const Sources& s,
                          const std::vector<std::array<Index, 2>>& targets, Factor&& factor)
{
    const int n = src.dim();
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(static_cast<Index>(targets.size()));
    if (s.flat.empty() || targets.empty())
        return out;
    std::array<Index, 2> tlo{targets[0][0], targets[0][1]}, thi = tlo;
    for (const auto& t : targets)
        for (int j = 0; j < n; ++j) {
            tlo[j] = std::min(tlo[j], t[j]);
            thi[j] = std::max(thi[j], t[j]);
        }
    std::array<Index, 2> slo = s.ij[0], shi = s.ij[0];
    for (const auto& c : s.ij)
        for (int j = 0; j < n; ++j) {
            slo[j] = std::min(slo[j], c[j]);
            shi[j] = std::max(shi[j], c[j]);
        }
    std::array<Index, 2> dlo{tlo[0] - shi[0], 0}, dhi{thi[0] - slo[0], 0};
    if (n == 2) {
        dlo[1] = tlo[1] - shi[1];
        dhi[1] = thi[1] - slo[1];
    }
    const double h = src.cell_size();
    if (OffsetTable::fits(dlo, dhi, n)) {
        const OffsetTable tab(k, h, dlo, dhi);
        parallel_for(static_cast<Index>(targets.size()), [&](Index ti) {
            const auto& t = targets[static_cast<std::size_t>(ti)];
            double acc = 0.0;
            for (std::size_t c = 0; c < s.flat.size(); ++c) {
                const double kv = tab(t[0] - s.ij[c][0], n == 2 ? t[1] - s.ij[c][1] : 0);
                if (kv != 0.0)
                    acc += kv * s.value[c] * factor(ti, c);
            }
            out[ti] = acc;
        });
        return out;
    }
    const double vol = src.cell_volume();
    const double diag = local_integral(k, Point::Zero(n), Point::Constant(n, -0.5 * h), h);
    parallel_for(static_cast<Index>(targets.size()), [&](Index ti) {
        const auto& t = targets[static_cast<std::size_t>(ti)];
        double acc = 0.0;
        for (std::size_t c = 0; c < s.flat.size(); ++c) {
            Point z(n);
            z[0] = static_cast<double>(t[0] - s.ij[c][0]) * h;
            if (n == 2)
                z[1] = static_cast<double>(t[1] - s.ij[c][1]) * h;
            const double kv = z.isZero(0.0) ? diag : k.kernel(z) * vol;
            acc += kv * s.value[c] * factor(ti, c);
        }
        out[ti] = acc;
    });
    return out;
}

std::vector<std::array<Index, 2>> target_indices(const GridSpec& src, const GridSpec& x_grid)
{
    const auto off = lattice_offset(src, x_grid);
    std::vector<std::array<Index, 2>> t(static_cast<std::size_t>(x_grid.size()));
    for (Index i = 0; i < x_grid.size(); ++i) {
        const auto ij = x_grid.unflatten(i);
        t[static_cast<std::size_t>(i)] = {ij[0] + off[0], ij[1] + off[1]};
    }
    return t;
}

void check_symbols(const CommutatorSpec& spec, const GridFunction& f)
{
    if (spec.m < 1)
        throw ArgumentError("commutator order m must be at least 1");
    if (spec.kernel.dim() != f.dim())
        throw ArgumentError("kernel and grid dimensions differ");
    spec.kernel.validate();
    auto same = [&](const GridFunction& b) {
        if (b.grid() != f.grid())
            throw ArgumentError("symbol and input must share one grid");
    };
    if (spec.b_vector.empty())
        same(spec.b);
    for (const auto& b : spec.b_vector)
        same(b);
}

// Targets of x_grid that must sit on the symbol grid.
std::vector<std::array<Index, 2>> symbol_targets(const GridSpec& src, const GridSpec& x_grid,
                                                 std::vector<Index>& flat)
{
    if (!src.aligned_with(x_grid))
        throw ArgumentError("commutator target grid must be aligned with the symbol grid");
    auto t = target_indices(src, x_grid);
    flat.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (int j = 0; j < src.dim(); ++j)
            if (t[i][j] < 0 || t[i][j] >= src.resolution())
                throw ArgumentError("commutator target grid must lie inside the symbol grid");
        flat[i] = src.flat(t[i][0], t[i][1]);
    }
    return t;
}

// Own-cell term of the commutator with b linearized at the cell center:
// ∫_cell Π_j (g_j·u) K(u) du, u = x - y. moments[k] holds
// ∫ c^k s^{m-k} Ω(θ) ρ(θ)^{m+β} dθ / (m+β) (n = 2) so a product of m linear
// forms reduces to a coefficient dot product.
class OwnCell {
public:
    OwnCell(const KernelSpec& k, double h, int m) : n_(k.dim()), m_(m), moments_(static_cast<std::size_t>(m + 1), 0.0)
    {
        if (k.delta() > 0.0)
            return;
        const double e = m + k.beta();
        if (n_ == 1) {
            const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
            moments_[static_cast<std::size_t>(m)] =
                std::pow(0.5 * h, e) / e * (k.omega(point(1.0)) + sgn * k.omega(point(-1.0)));
            return;
        }
        const int M = kAngularTableSize;
        const Point lo = Point::Constant(2, -0.5 * h), hi = Point::Constant(2, 0.5 * h);
        for (int i = 0; i < M; ++i) {
            const double th = (i + 0.5) * kTwoPi / M;
            const double c = std::cos(th), s = std::sin(th);
            const double w = k.omega_angle(th) * std::pow(ray_to_boundary(Point::Zero(2), lo, hi, th), e) / e;
            for (int j = 0; j <= m; ++j)
                moments_[static_cast<std::size_t>(j)] += std::pow(c, j) * std::pow(s, m - j) * w;
        }
        for (double& v : moments_)
            v *= kTwoPi / M;
    }

    // gradients: one (g0, g1) per factor.
    double operator()(const std::vector<std::array<double, 2>>& grads) const
    {
        // coefficients of c^k s^{deg-k}
        std::vector<double> poly{1.0};
        for (const auto& g : grads) {
            std::vector<double> next(poly.size() + 1, 0.0);
            for (std::size_t k = 0; k < poly.size(); ++k) {
                next[k + 1] += poly[k] * g[0];
                next[k] += poly[k] * (n_ == 2 ? g[1] : 0.0);
            }
            poly.swap(next);
        }
        double v = 0.0;
        for (int k = 0; k <= m_; ++k)
            v += poly[static_cast<std::size_t>(k)] * moments_[static_cast<std::size_t>(k)];
        return v;
    }

private:
    int n_;
    int m_;
    std::vector<double> moments_;
};

std::array<double, 2> gradient(const GridFunction& b, Index flat)
{
    const GridSpec& g = b.grid();
    const auto ij = g.unflatten(flat);
    const Index r = g.resolution();
    std::array<double, 2> out{0.0, 0.0};
    if (r < 2)
        return out;
    for (int a = 0; a < g.dim(); ++a) {
        auto at = [&](Index t) { return a == 0 ? b[g.flat(t, ij[1])] : b[g.flat(ij[0], t)]; };
        const Index i = ij[a];
        const Index lo = std::max<Index>(i - 1, 0), hi = std::min<Index>(i + 1, r - 1);
        out[a] = (at(hi) - at(lo)) / (static_cast<double>(hi - lo) * g.cell_size());
    }
    return out;
}

GridFunction commutator_impl(const CommutatorSpec& spec, const GridFunction& f,
                             const std::vector<std::array<Index, 2>>& targets, const std::vector<Index>& tflat,
                             const GridSpec& out_grid, const std::vector<Index>& out_index, bool vec)
{
    const Sources s = collect(f);
    Eigen::ArrayXd res;
    if (!vec) {
        const GridFunction& b = spec.b;
        const int m = spec.m;
        res = accumulate(spec.kernel, f.grid(), s, targets, [&](Index ti, std::size_t c) {
            return std::pow(b[tflat[static_cast<std::size_t>(ti)]] - b[s.flat[c]], m);
        });
    } else {
        res = accumulate(spec.kernel, f.grid(), s, targets, [&](Index ti, std::size_t c) {
            double p = 1.0;
            for (const auto& b : spec.b_vector)
                p *= b[tflat[static_cast<std::size_t>(ti)]] - b[s.flat[c]];
            return p;
        });
    }
    const OwnCell own(spec.kernel, f.grid().cell_size(), spec.m);
    for (std::size_t i = 0; i < tflat.size(); ++i) {
        const double fx = f[tflat[i]];
        if (fx == 0.0)
            continue;
        std::vector<std::array<double, 2>> grads;
        if (vec)
            for (const auto& b : spec.b_vector)
                grads.push_back(gradient(b, tflat[i]));
        else
            grads.assign(static_cast<std::size_t>(spec.m), gradient(spec.b, tflat[i]));
        res[static_cast<Index>(i)] += fx * own(grads);
    }
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(out_grid.size());
    for (std::size_t i = 0; i < out_index.size(); ++i)
        out[out_index[i]] = res[static_cast<Index>(i)];
    return GridFunction(out_grid, std::move(out));
}

} // namespace

double cutoff(double u)
{
    if (u <= 0.5)
        return 1.0;
    if (u >= 1.0)
        return 0.0;
    const double a = std::exp(-1.0 / (1.0 - u)), b = std::exp(-1.0 / (u - 0.5));
    return a / (a + b);
}

KernelSpec KernelSpec::line(double plus, double minus, double beta)
{
    if (!(beta >= 0.0 && beta < 1.0))
        throw ArgumentError("kernel order beta must lie in [0, n)");
    KernelSpec k;
    k.dim_ = 1;
    k.beta_ = beta;
    k.omega_ = {plus, minus};
    if (!std::isfinite(plus) || !std::isfinite(minus))
        throw ArgumentError("kernel values must be finite");
    return k;
}

KernelSpec KernelSpec::angular(std::vector<double> table, double beta)
{
    if (!(beta >= 0.0 && beta < 2.0))
        throw ArgumentError("kernel order beta must lie in [0, n)");
    if (table.size() < 4)
        throw ArgumentError("angular table too short");
    for (double v : table)
        if (!std::isfinite(v))
            throw ArgumentError("kernel values must be finite");
    KernelSpec k;
    k.dim_ = 2;
    k.beta_ = beta;
    k.omega_ = std::move(table);
    return k;
}

KernelSpec KernelSpec::from_angle(int n, const std::function<double(double)>& omega, double beta)
{
    if (n == 1)
        return line(omega(0.0), omega(kPi), beta);
    std::vector<double> t(kAngularTableSize);
    for (int i = 0; i < kAngularTableSize; ++i)
        t[static_cast<std::size_t>(i)] = omega(kTwoPi * i / kAngularTableSize);
    return angular(std::move(t), beta);
}

KernelSpec KernelSpec::from_samples(int n, std::vector<std::pair<double, double>> samples, double beta)
{
    if (samples.empty())
        throw ValidationError("kernel table is empty");
    for (auto& s : samples)
        s.first = wrap(s.first);
    std::sort(samples.begin(), samples.end());
    auto at = [&](double th) {
        th = wrap(th);
        // periodic linear interpolation between the bracketing samples
        auto hi = std::lower_bound(samples.begin(), samples.end(), std::make_pair(th, -1e300));
        const auto& b = hi == samples.end() ? samples.front() : *hi;
        const auto& a = hi == samples.begin() ? samples.back() : *(hi - 1);
        double ta = a.first, tb = b.first;
        if (tb < ta || (hi == samples.end()))
            tb += kTwoPi;
        if (th < ta)
            th += kTwoPi;
        if (tb - ta < 1e-15)
            return a.second;
        return a.second + (b.second - a.second) * (th - ta) / (tb - ta);
    };
    return from_angle(n, at, beta);
}

double KernelSpec::omega_angle(double theta) const
{
    if (dim_ == 1)
        return std::cos(theta) >= 0.0 ? omega_[0] : omega_[1];
    const double u = wrap(theta) / kTwoPi * static_cast<double>(omega_.size());
    const auto i0 = static_cast<std::size_t>(std::floor(u)) % omega_.size();
    const auto i1 = (i0 + 1) % omega_.size();
    const double t = u - std::floor(u);
    return (1.0 - t) * omega_[i0] + t * omega_[i1];
}

double KernelSpec::omega(const Point& z) const
{
    if (dim_ == 1)
        return z[0] >= 0.0 ? omega_[0] : omega_[1];
    return omega_angle(std::atan2(z[1], z[0]));
}

double KernelSpec::mean() const
{
    double s = 0.0;
    for (double v : omega_)
        s += v;
    return s / static_cast<double>(omega_.size());
}

double KernelSpec::sup_norm() const
{
    double s = 0.0;
    for (double v : omega_)
        s = std::max(s, std::abs(v));
    return s;
}

double KernelSpec::lr_norm(double r) const
{
    double s = 0.0;
    for (double v : omega_)
        s += std::pow(std::abs(v), r);
    const double measure = dim_ == 1 ? 1.0 : kTwoPi / static_cast<double>(omega_.size());
    return std::pow(s * measure, 1.0 / r);
}

double KernelSpec::kernel(const Point& z) const
{
    const double r = z.norm();
    double v = omega(z) * std::pow(r, beta_ - dim_);
    if (delta_ > 0.0)
        v *= 1.0 - cutoff(r / delta_);
    return v;
}

void KernelSpec::validate() const
{
    if (mean_zero_required() && std::abs(mean()) > 1e-9)
        throw ValidationError("beta = 0 needs a mean-zero kernel (spherical mean is " + std::to_string(mean()) + ")");
}

KernelSpec KernelSpec::with_delta(double delta) const
{
    KernelSpec k = *this;
    k.delta_ = delta;
    return k;
}

KernelSpec truncate_kernel(const KernelSpec& spec, double delta)
{
    if (!(delta > 0.0))
        throw ArgumentError("truncation radius must be positive");
    return spec.with_delta(delta);
}

SignWindow sign_window(const KernelSpec& spec)
{
    SignWindow w;
    const auto& t = spec.table();
    if (spec.dim() == 1) {
        const bool plus = std::abs(t[0]) >= std::abs(t[1]);
        const double v = plus ? t[0] : t[1];
        if (v == 0.0)
            return w;
        w.found = true;
        w.theta0 = plus ? 0.0 : kPi;
        w.eps0 = 0.5 * std::abs(v);
        w.width = kPi;
        w.sign = v > 0.0 ? 1 : -1;
        return w;
    }
    const std::size_t M = t.size();
    auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    // start scanning right after a sign change so runs do not wrap
    std::size_t start = 0;
    bool uniform = true;
    for (std::size_t i = 0; i < M; ++i)
        if (sgn(t[i]) != sgn(t[(i + M - 1) % M])) {
            start = i;
            uniform = false;
            break;
        }
    std::size_t best_len = 0, best_start = 0;
    double best_max = 0.0;
    for (std::size_t k = 0; k < M;) {
        const std::size_t i = (start + k) % M;
        const int s = sgn(t[i]);
        std::size_t len = 0;
        double mx = 0.0;
        while (len < M && sgn(t[(i + len) % M]) == s) {
            mx = std::max(mx, std::abs(t[(i + len) % M]));
            ++len;
            if (!uniform && k + len >= M)
                break;
        }
        if (s != 0 && (len > best_len || (len == best_len && (mx > best_max || (mx == best_max && s > 0))))) {
            best_len = len;
            best_start = i;
            best_max = mx;
        }
        k += std::max<std::size_t>(len, 1);
        if (uniform)
            break;
    }
    if (best_len == 0)
        return w;
    w.found = true;
    w.width = kTwoPi * static_cast<double>(best_len) / static_cast<double>(M);
    w.eps0 = 0.5 * best_max;
    w.sign = sgn(t[best_start]);
    // part of the run around the max with |Ω| >= eps0
    std::size_t arg = 0;
    for (std::size_t k = 0; k < best_len; ++k)
        if (std::abs(t[(best_start + k) % M]) == best_max) {
            arg = k;
            break;
        }
    std::size_t a = arg, b = arg;
    while (a > 0 && std::abs(t[(best_start + a - 1) % M]) >= w.eps0)
        --a;
    while (b + 1 < best_len && std::abs(t[(best_start + b + 1) % M]) >= w.eps0)
        ++b;
    if (uniform && a == 0 && b + 1 == best_len)
        a = b = arg;
    const double mid = 0.5 * static_cast<double>(a + b);
    w.theta0 = wrap(kTwoPi * (static_cast<double>(best_start) + mid) / static_cast<double>(M));
    return w;
}

void validate_sign_window(const KernelSpec& spec)
{
    const auto& t = spec.table();
    if (spec.dim() == 1) {
        if (std::max(std::abs(t[0]), std::abs(t[1])) < 1e-6)
            throw ValidationError("kernel vanishes in both directions");
        return;
    }
    const SignWindow w = sign_window(spec);
    if (!w.found || w.width < kTwoPi / 64.0 * (1.0 - 1e-12))
        throw ValidationError("kernel has no single-sign window of width 2pi/64");
    // mean over the widest window
    const std::size_t M = t.size();
    const auto len = static_cast<std::size_t>(std::llround(w.width / kTwoPi * static_cast<double>(M)));
    double best = 0.0;
    for (std::size_t s = 0; s < M; ++s) {
        double acc = 0.0;
        bool single = true;
        for (std::size_t k = 0; k < len && single; ++k) {
            const double v = t[(s + k) % M];
            single = (v > 0.0) == (w.sign > 0) && v != 0.0;
            acc += v;
        }
        if (single)
            best = std::max(best, std::abs(acc / static_cast<double>(len)));
    }
    if (best < 1e-6)
        throw ValidationError("kernel sign window has mean below 1e-6");
}

GridFunction apply_T(const KernelSpec& spec, const GridFunction& f, const GridSpec& x_grid)
{
    if (spec.dim() != f.dim() || x_grid.dim() != f.dim())
        throw ArgumentError("kernel and grid dimensions differ");
    spec.validate();
    if (f.grid().aligned_with(x_grid)) {
        const Sources s = collect(f);
        auto t = target_indices(f.grid(), x_grid);
        Eigen::ArrayXd v = accumulate(spec, f.grid(), s, t, [](Index, std::size_t) { return 1.0; });
        return GridFunction(x_grid, std::move(v));
    }
    Eigen::ArrayXd v(x_grid.size());
    for (Index i = 0; i < x_grid.size(); ++i)
        v[i] = apply_T_at(spec, f, x_grid.center(i));
    return GridFunction(x_grid, std::move(v));
}

double apply_T_at(const KernelSpec& spec, const GridFunction& f, const Point& x)
{
    if (spec.dim() != f.dim() || x.size() != f.dim())
        throw ArgumentError("kernel and grid dimensions differ");
    spec.validate();
    const GridSpec& g = f.grid();
    const Sources s = collect(f);
    const double h = g.cell_size(), vol = g.cell_volume();
    return tree_sum(0, static_cast<Index>(s.flat.size()), [&](Index c) {
        const Point y = g.center(s.flat[static_cast<std::size_t>(c)]);
        const Point z = x - y;
        if (z.cwiseAbs().maxCoeff() <= 0.5 * h * (1.0 + 1e-9)) {
            const Point lo = y.array() - 0.5 * h;
            return s.value[static_cast<std::size_t>(c)] * local_integral(spec, x, lo, h);
        }
        return s.value[static_cast<std::size_t>(c)] * spec.kernel(z) * vol;
    });
}

GridFunction apply_commutator_m(const CommutatorSpec& spec, const GridFunction& f, const GridSpec& x_grid)
{
    check_symbols(spec, f);
    std::vector<Index> flat;
    const auto t = symbol_targets(f.grid(), x_grid, flat);
    std::vector<Index> out(t.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<Index>(i);
    return commutator_impl(spec, f, t, flat, x_grid, out, false);
}

GridFunction apply_commutator_vec(const CommutatorSpec& spec, const GridFunction& f, const GridSpec& x_grid)
{
    if (static_cast<int>(spec.b_vector.size()) != spec.m)
        throw ArgumentError("b_vector must hold m symbols");
    check_symbols(spec, f);
    std::vector<Index> flat;
    const auto t = symbol_targets(f.grid(), x_grid, flat);
    std::vector<Index> out(t.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<Index>(i);
    return commutator_impl(spec, f, t, flat, x_grid, out, true);
}

GridFunction apply_commutator_on(const CommutatorSpec& spec, const GridFunction& f,
                                 const std::vector<Index>& target_cells)
{
    check_symbols(spec, f);
    const bool vec = !spec.b_vector.empty();
    if (vec && static_cast<int>(spec.b_vector.size()) != spec.m)
        throw ArgumentError("b_vector must hold m symbols");
    std::vector<std::array<Index, 2>> t;
    t.reserve(target_cells.size());
    for (Index i : target_cells)
        t.push_back(f.grid().unflatten(i));
    return commutator_impl(spec, f, t, target_cells, f.grid(), target_cells, vec);
}

GridFunction fractional_maximal(const GridFunction& f, double gamma, const DyadicFamily& family)
{
    const int n = f.dim();
    if (!(gamma > 0.0 && gamma < n))
        throw ArgumentError("fractional maximal order must lie in (0, n)");
    const GridSpec& g = f.grid();
    const BoxSums sums(g, f.values().abs());
    Eigen::ArrayXd out = Eigen::ArrayXd::Zero(g.size());
    for (const Cube& q : family.cubes()) {
        const CellRange r = g.cells(q);
        if (r.empty())
            continue;
        const double v = std::pow(q.volume(), gamma / n - 1.0) * sums.sum(r) * g.cell_volume();
        for_each_cell(g, r, [&](Index i) { out[i] = std::max(out[i], v); });
    }
    return GridFunction(g, std::move(out));
}

double weighted_lp_norm(const GridFunction& g, const GridFunction& w, double p, const std::optional<Cube>& e)
{
    if (!(p >= 1.0) || !std::isfinite(p))
        throw ArgumentError("norm exponent must lie in [1, inf)");
    if (g.grid() != w.grid())
        throw ArgumentError("function and weight must share one grid");
    const CellRange r = e ? g.grid().cells(*e) : g.grid().all_cells();
    double s = 0.0;
    for_each_cell(g.grid(), r, [&](Index i) { s += std::pow(std::abs(g[i]), p) * w[i]; });
    return std::pow(s * g.grid().cell_volume(), 1.0 / p);
}

double weighted_lp_norm(const GridFunction& g, const GridFunction& w, double p, const std::vector<Index>& cells)
{
    if (!(p >= 1.0) || !std::isfinite(p))
        throw ArgumentError("norm exponent must lie in [1, inf)");
    if (g.grid() != w.grid())
        throw ArgumentError("function and weight must share one grid");
    double s = 0.0;
    for (Index i : cells)
        s += std::pow(std::abs(g[i]), p) * w[i];
    return std::pow(s * g.grid().cell_volume(), 1.0 / p);
}

double far_field_bound(const KernelSpec& spec, const GridFunction& f)
{
    const double l1 = f.values().abs().sum() * f.grid().cell_volume();
    return l1 * spec.sup_norm() * std::pow(f.domain().side(), spec.beta() - f.dim());
}

} // namespace lipcmo
