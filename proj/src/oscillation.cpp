#include "lipcmo/oscillation.hpp"
#include "lipcmo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace lipcmo {

namespace {

void check_alpha(double alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ArgumentError("alpha must lie in [0, 1]");
}

std::vector<double> gather(const GridFunction& f, const CellRange& r)
{
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(r.count()));
    for_each_cell(f.grid(), r, [&](Index i) { v.push_back(f[i]); });
    return v;
}

double lower_median(std::vector<double>& v)
{
    const auto k = (v.size() - 1) / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

} // namespace

double osc_alpha(const GridFunction& f, const Cube& q, double alpha)
{
    check_alpha(alpha);
    const CellRange r = admissible_cells(f, q);
    double s = 0.0;
    for_each_cell(f.grid(), r, [&](Index i) { s += f[i]; });
    const double n = static_cast<double>(r.count());
    const double mean = s / n;
    double dev = 0.0;
    for_each_cell(f.grid(), r, [&](Index i) { dev += std::abs(f[i] - mean); });
    return dev / n / std::pow(q.side(), alpha);
}

double sample_median(const GridFunction& f, const Cube& q)
{
    auto v = gather(f, admissible_cells(f, q));
    return lower_median(v);
}

double osc_alpha_inf(const GridFunction& f, const Cube& q, double alpha)
{
    check_alpha(alpha);
    const CellRange r = admissible_cells(f, q);
    auto v = gather(f, r);
    const double c = lower_median(v);
    double dev = 0.0;
    for (double x : v)
        dev += std::abs(x - c);
    return dev / static_cast<double>(v.size()) / std::pow(q.side(), alpha);
}

double average_zero_extended(const GridFunction& f, const BoxSums& sums, const Cube& q)
{
    if (q.side() < f.cell_size() * (1.0 - 1e-9))
        throw ResolutionError("cube is smaller than one grid cell");
    const CellRange r = f.grid().cells_unclipped(q);
    if (r.empty())
        throw ResolutionError("cube contains no cell center");
    return sums.sum(r) / static_cast<double>(r.count());
}

double osc_alpha_zero_extended(const GridFunction& f, const BoxSums& sums, const Cube& q, double alpha)
{
    if (q.side() < f.cell_size() * (1.0 - 1e-9))
        throw ResolutionError("cube is smaller than one grid cell");
    const CellRange full = f.grid().cells_unclipped(q);
    if (full.empty())
        throw ResolutionError("cube contains no cell center");
    const CellRange in = f.grid().clip(full);
    const double total = static_cast<double>(full.count());
    if (in.empty())
        return 0.0;
    const double mean = sums.sum(in) / total;
    double dev = 0.0;
    for_each_cell(f.grid(), in, [&](Index i) { dev += std::abs(f[i] - mean); });
    dev += (total - static_cast<double>(in.count())) * std::abs(mean);
    return dev / total / std::pow(q.side(), alpha);
}

double bmo_alpha_norm(const GridFunction& f, const OscillationParams& params)
{
    check_alpha(params.alpha);
    const auto cubes = sweep_cubes(params.family);
    if (cubes.empty())
        throw ArgumentError("empty cube family");
    return parallel_max(static_cast<Index>(cubes.size()),
                        [&](Index i) { return osc_alpha(f, cubes[static_cast<std::size_t>(i)], params.alpha); });
}

double lip_alpha_norm(const GridFunction& f, double alpha, Index pair_budget, std::uint64_t seed)
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ArgumentError("lip_alpha_norm needs alpha in (0, 1]");
    const GridSpec& g = f.grid();
    const Index n = g.size();
    if (pair_budget < g.resolution())
        throw ArgumentError("pair_budget must be at least the resolution");
    auto ratio = [&](Index a, Index b) {
        const double d = (g.center(a) - g.center(b)).norm();
        return std::abs(f[a] - f[b]) / std::pow(d, alpha);
    };
    if (n <= pair_budget) {
        return parallel_max(n, [&](Index a) {
            double m = 0.0;
            for (Index b = a + 1; b < n; ++b)
                m = std::max(m, ratio(a, b));
            return m;
        });
    }
    constexpr Index radius = 4;
    double best = parallel_max(n, [&](Index a) {
        const auto ia = g.unflatten(a);
        double m = 0.0;
        if (g.dim() == 1) {
            for (Index d = 1; d <= radius && ia[0] + d < g.resolution(); ++d)
                m = std::max(m, ratio(a, a + d));
        } else {
            for (Index dj = 0; dj <= radius; ++dj)
                for (Index di = -radius; di <= radius; ++di) {
                    if (dj == 0 && di <= 0)
                        continue;
                    const Index i = ia[0] + di, j = ia[1] + dj;
                    if (i < 0 || i >= g.resolution() || j >= g.resolution())
                        continue;
                    m = std::max(m, ratio(a, g.flat(i, j)));
                }
        }
        return m;
    });
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    const Index draws = pair_budget * 16;
    for (Index k = 0; k < draws; ++k) {
        const Index a = pick(rng), b = pick(rng);
        if (a != b)
            best = std::max(best, ratio(a, b));
    }
    return best;
}

double meyers_ratio(const GridFunction& f, const OscillationParams& params, Index pair_budget)
{
    const double lip = lip_alpha_norm(f, params.alpha, pair_budget);
    const double bmo = bmo_alpha_norm(f, params);
    if (bmo == 0.0)
        return lip == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return lip / bmo;
}

double lattice_sup(const GridFunction& f, double side, double alpha)
{
    const auto cubes = origin_lattice(side, f.domain());
    return parallel_max(static_cast<Index>(cubes.size()),
                        [&](Index i) { return osc_alpha(f, cubes[static_cast<std::size_t>(i)], alpha); });
}

OscProfile cmo_profile(const GridFunction& f, double alpha, std::vector<double> scales,
                       std::vector<double> distances, double decay_factor)
{
    check_alpha(alpha);
    if (scales.empty() || distances.empty())
        throw ArgumentError("cmo_profile needs nonempty scale and distance lists");
    const int n = f.dim();
    std::sort(scales.begin(), scales.end());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    std::sort(distances.begin(), distances.end());
    distances.erase(std::unique(distances.begin(), distances.end()), distances.end());

    std::vector<double> sides;
    for (double r : scales) {
        if (!(r > 0.0))
            throw ArgumentError("scales must be positive volumes");
        const double s = std::pow(r, 1.0 / n);
        if (s > f.domain().side() * (1.0 + 1e-12))
            throw ArgumentError("requested scale exceeds the domain");
        if (s < f.cell_size() * (1.0 - 1e-9))
            throw ArgumentError("requested scale is below one grid cell");
        sides.push_back(s);
    }

    std::vector<double> sup(scales.size());
    std::vector<std::vector<Cube>> lattices;
    for (std::size_t k = 0; k < sides.size(); ++k) {
        lattices.push_back(origin_lattice(sides[k], f.domain()));
        if (lattices.back().empty())
            throw ArgumentError("no lattice cube of the requested scale fits in the domain");
        const auto& cubes = lattices.back();
        sup[k] = parallel_max(static_cast<Index>(cubes.size()),
                              [&](Index i) { return osc_alpha(f, cubes[static_cast<std::size_t>(i)], alpha); });
    }

    const double top = *std::max_element(sup.begin(), sup.end());
    std::size_t peak = 0;
    for (std::size_t k = 0; k < sup.size(); ++k)
        if (sup[k] >= 0.99 * top)
            peak = k;

    OscProfile p;
    p.decay_factor = decay_factor;
    for (std::size_t k = peak + 1; k-- > 0;)
        p.small_scale.push_back({scales[k], sup[k]});
    for (std::size_t k = peak; k < sup.size(); ++k)
        p.large_scale.push_back({scales[k], sup[k]});

    for (double d : distances) {
        double best = 0.0;
        bool any = false;
        for (const auto& cubes : lattices)
            for (const Cube& q : cubes)
                if (q.inner_radius() >= d) {
                    any = true;
                    best = std::max(best, osc_alpha(f, q, alpha));
                }
        if (!any)
            throw ArgumentError("no lattice cube lies beyond distance " + std::to_string(d));
        p.far_away.push_back({d, best});
    }

    auto decays = [&](const std::vector<ProfilePoint>& c) {
        if (c.front().sup_osc == 0.0)
            return c.back().sup_osc == 0.0;
        return c.back().sup_osc <= decay_factor * c.front().sup_osc;
    };
    p.verdict = {decays(p.small_scale), decays(p.large_scale), decays(p.far_away)};
    return p;
}

std::string profile_csv(const OscProfile& p)
{
    std::ostringstream out;
    out << "condition,parameter,sup_osc\n";
    char buf[96];
    auto emit = [&](const char* name, const std::vector<ProfilePoint>& c) {
        for (const auto& pt : c) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", name, pt.parameter, pt.sup_osc);
            out << buf;
        }
    };
    emit("small_scale", p.small_scale);
    emit("large_scale", p.large_scale);
    emit("far_away", p.far_away);
    return out.str();
}

} // namespace lipcmo
