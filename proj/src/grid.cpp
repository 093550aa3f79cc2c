#include "lipcmo/grid.hpp"
#include "lipcmo/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lipcmo {

namespace {

std::atomic<int> g_threads{1};

constexpr double kSnap = 1e-9;

double snap(double t)
{
    const double r = std::round(t);
    return std::abs(t - r) < kSnap ? r : t;
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void set_thread_count(int k) { g_threads = std::max(1, k); }
int thread_count() { return g_threads; }

Point point(double x)
{
    Point p(1);
    p << x;
    return p;
}

Point point(double x, double y)
{
    Point p(2);
    p << x, y;
    return p;
}

Point zero_point(int n) { return Point::Zero(n); }

Cube::Cube(Point center, double side)
    : center_(std::move(center)), side_(side)
{
    if (dim() > 2)
        throw ArgumentError("cube dimension must be 0, 1 or 2");
    if (!(side > 0.0) || !std::isfinite(side))
        throw ArgumentError("cube side must be positive and finite");
    if (!center_.allFinite())
        throw ArgumentError("cube center must be finite");
}

Cube Cube::from_lower(const Point& lower, double side)
{
    return Cube(lower.array() + 0.5 * side, side);
}

double Cube::volume() const { return std::pow(side_, dim()); }

Point Cube::vertex(int mask) const
{
    Point v = center_;
    for (int j = 0; j < dim(); ++j)
        v[j] += ((mask >> j) & 1) ? 0.5 * side_ : -0.5 * side_;
    return v;
}

bool Cube::contains(const Point& x, double tol) const
{
    for (int j = 0; j < dim(); ++j)
        if (x[j] < lo(j) - tol || x[j] > hi(j) + tol)
            return false;
    return true;
}

bool Cube::contains(const Cube& o, double tol) const
{
    for (int j = 0; j < dim(); ++j)
        if (o.lo(j) < lo(j) - tol || o.hi(j) > hi(j) + tol)
            return false;
    return true;
}

bool Cube::overlaps(const Cube& o) const
{
    for (int j = 0; j < dim(); ++j)
        if (o.hi(j) <= lo(j) || o.lo(j) >= hi(j))
            return false;
    return true;
}

double Cube::overlap_fraction(const Cube& o) const
{
    double f = 1.0;
    for (int j = 0; j < dim(); ++j) {
        const double len = std::min(hi(j), o.hi(j)) - std::max(lo(j), o.lo(j));
        if (len <= 0.0)
            return 0.0;
        f *= len / side_;
    }
    return f;
}

double Cube::inner_radius() const
{
    double r = 0.0;
    for (int j = 0; j < dim(); ++j) {
        double d = 0.0;
        if (lo(j) > 0.0)
            d = lo(j);
        else if (hi(j) < 0.0)
            d = -hi(j);
        r = std::max(r, d);
    }
    return r;
}

double Cube::outer_radius() const
{
    double r = 0.0;
    for (int j = 0; j < dim(); ++j)
        r = std::max({r, std::abs(lo(j)), std::abs(hi(j))});
    return r;
}

Cube unit_cube(int n) { return Cube(zero_point(n), 1.0); }
Cube dyadic_box(int i, int n) { return Cube(zero_point(n), std::ldexp(2.0, i)); }
Cube box(double lo, double hi, int n) { return Cube(Point::Constant(n, 0.5 * (lo + hi)), hi - lo); }

Index CellRange::count() const
{
    Index c = 1;
    for (int j = 0; j < dim; ++j)
        c *= std::max<Index>(0, hi[j] - lo[j]);
    return c;
}

GridSpec::GridSpec(Cube domain, Index resolution)
    : domain_(std::move(domain)), res_(resolution)
{
    if (dim() < 1 || dim() > 2)
        throw ArgumentError("grid dimension must be 1 or 2");
    if (res_ < 1)
        throw ArgumentError("grid resolution must be positive");
    if (dim() == 2 && res_ > 8192)
        throw CapacityError("2D grid resolution above 8192");
    h_ = domain_.side() / static_cast<double>(res_);
}

double GridSpec::cell_volume() const { return std::pow(h_, dim()); }

Index GridSpec::size() const { return dim() == 1 ? res_ : res_ * res_; }

Point GridSpec::center(Index flat) const
{
    if (dim() == 1)
        return point(axis_center(0, flat));
    return point(axis_center(0, flat % res_), axis_center(1, flat / res_));
}

std::array<Index, 2> GridSpec::unflatten(Index flat) const
{
    if (dim() == 1)
        return {flat, 0};
    return {flat % res_, flat / res_};
}

CellRange GridSpec::cells_unclipped(const Cube& q) const
{
    if (q.dim() != dim())
        throw ArgumentError("cube and grid dimensions differ");
    CellRange r;
    r.dim = dim();
    for (int j = 0; j < dim(); ++j) {
        // continuous index of a center sitting exactly on the face
        const double tlo = snap((q.lo(j) - domain_.lo(j)) / h_ - 0.5);
        const double thi = snap((q.hi(j) - domain_.lo(j)) / h_ - 0.5);
        r.lo[j] = static_cast<Index>(std::floor(tlo)) + 1;
        r.hi[j] = static_cast<Index>(std::floor(thi)) + 1;
        if (r.hi[j] < r.lo[j])
            r.hi[j] = r.lo[j];
    }
    return r;
}

CellRange GridSpec::clip(CellRange r) const
{
    for (int j = 0; j < r.dim; ++j) {
        r.lo[j] = std::clamp<Index>(r.lo[j], 0, res_);
        r.hi[j] = std::clamp<Index>(r.hi[j], r.lo[j], res_);
    }
    return r;
}

CellRange GridSpec::all_cells() const
{
    CellRange r;
    r.dim = dim();
    for (int j = 0; j < dim(); ++j) {
        r.lo[j] = 0;
        r.hi[j] = res_;
    }
    return r;
}

Index GridSpec::locate(const Point& x) const
{
    std::array<Index, 2> idx{0, 0};
    for (int j = 0; j < dim(); ++j) {
        const double t = (x[j] - domain_.lo(j)) / h_;
        if (t < -kSnap || t > static_cast<double>(res_) + kSnap)
            return -1;
        idx[j] = std::clamp<Index>(static_cast<Index>(std::floor(t)), 0, res_ - 1);
    }
    return flat(idx[0], idx[1]);
}

bool GridSpec::operator==(const GridSpec& o) const
{
    return res_ == o.res_ && dim() == o.dim() && domain_.side() == o.domain_.side()
        && domain_.center() == o.domain_.center();
}

bool GridSpec::aligned_with(const GridSpec& o) const
{
    if (dim() != o.dim() || std::abs(h_ - o.h_) > 1e-12 * h_)
        return false;
    for (int j = 0; j < dim(); ++j) {
        const double t = (o.domain_.lo(j) - domain_.lo(j)) / h_;
        if (std::abs(t - std::round(t)) > kSnap)
            return false;
    }
    return true;
}

GridFunction::GridFunction(GridSpec grid, Eigen::ArrayXd values)
    : grid_(std::move(grid)), values_(std::move(values))
{
    if (values_.size() != grid_.size())
        throw ArgumentError("grid function value count does not match resolution");
    if (!values_.allFinite())
        throw ValidationError("grid function values must be finite");
}

GridFunction GridFunction::sample(const GridSpec& grid, const std::function<double(const Point&)>& f)
{
    Eigen::ArrayXd v(grid.size());
    for (Index i = 0; i < grid.size(); ++i)
        v[i] = f(grid.center(i));
    return GridFunction(grid, std::move(v));
}

GridFunction GridFunction::constant(const GridSpec& grid, double c)
{
    return GridFunction(grid, Eigen::ArrayXd::Constant(grid.size(), c));
}

double GridFunction::value_at(const Point& x, double fallback) const
{
    const Index i = grid_.locate(x);
    return i < 0 ? fallback : values_[i];
}

DyadicFamily::DyadicFamily(Cube root, int min_level, int max_level, std::vector<std::vector<Cube>> levels)
    : root_(std::move(root)), min_level_(min_level), max_level_(max_level), levels_(std::move(levels))
{
}

std::vector<Cube> DyadicFamily::cubes() const
{
    std::vector<Cube> out;
    out.reserve(size());
    for (const auto& lv : levels_)
        out.insert(out.end(), lv.begin(), lv.end());
    return out;
}

std::size_t DyadicFamily::size() const
{
    std::size_t s = 0;
    for (const auto& lv : levels_)
        s += lv.size();
    return s;
}

DyadicFamily make_dyadic_family(const Cube& root, int min_level, int max_level)
{
    if (min_level < 0 || min_level > max_level)
        throw ArgumentError("dyadic family needs 0 <= min_level <= max_level");
    const int n = root.dim();
    double total = 0.0;
    for (int k = min_level; k <= max_level; ++k)
        total += std::ldexp(1.0, n * k);
    if (total > static_cast<double>(kMaxFamilyCubes))
        throw CapacityError("dyadic family exceeds 10^7 cubes");

    std::vector<std::vector<Cube>> levels;
    for (int k = min_level; k <= max_level; ++k) {
        const Index per_axis = Index(1) << k;
        const double side = std::ldexp(root.side(), -k);
        std::vector<Cube> lv;
        lv.reserve(static_cast<std::size_t>(n == 1 ? per_axis : per_axis * per_axis));
        Point lower(n);
        for (Index b = 0; b < (n == 1 ? 1 : per_axis); ++b)
            for (Index a = 0; a < per_axis; ++a) {
                lower[0] = root.lo(0) + static_cast<double>(a) * side;
                if (n == 2)
                    lower[1] = root.lo(1) + static_cast<double>(b) * side;
                lv.push_back(Cube::from_lower(lower, side));
            }
        levels.push_back(std::move(lv));
    }
    return DyadicFamily(root, min_level, max_level, std::move(levels));
}

std::vector<Cube> sweep_cubes(const DyadicFamily& family)
{
    const Cube& root = family.root();
    const int n = root.dim();
    std::vector<Cube> out;
    for (int k = family.min_level(); k <= family.max_level(); ++k) {
        const double side = std::ldexp(root.side(), -k);
        // centers at lo + side/2 + j*side/2, j = 0 .. 2^{k+1}-2
        const Index m = (Index(2) << k) - 1;
        Point c(n);
        for (Index b = 0; b < (n == 1 ? 1 : m); ++b)
            for (Index a = 0; a < m; ++a) {
                c[0] = root.lo(0) + 0.5 * side + 0.5 * side * static_cast<double>(a);
                if (n == 2)
                    c[1] = root.lo(1) + 0.5 * side + 0.5 * side * static_cast<double>(b);
                out.emplace_back(c, side);
            }
    }
    return out;
}

std::vector<Cube> origin_lattice(double side, const Cube& region)
{
    const int n = region.dim();
    const double step = 0.5 * side;
    std::array<Index, 2> lo{0, 0}, hi{0, 0};
    for (int j = 0; j < n; ++j) {
        lo[j] = static_cast<Index>(std::ceil(snap((region.lo(j) + 0.5 * side) / step)));
        hi[j] = static_cast<Index>(std::floor(snap((region.hi(j) - 0.5 * side) / step)));
    }
    std::vector<Cube> out;
    if (hi[0] < lo[0] || (n == 2 && hi[1] < lo[1]))
        return out;
    Point c(n);
    for (Index b = lo[1]; b <= (n == 1 ? lo[1] : hi[1]); ++b)
        for (Index a = lo[0]; a <= hi[0]; ++a) {
            c[0] = step * static_cast<double>(a);
            if (n == 2)
                c[1] = step * static_cast<double>(b);
            out.emplace_back(c, side);
        }
    return out;
}

CellRange admissible_cells(const GridFunction& f, const Cube& q)
{
    if (q.dim() != f.dim())
        throw ArgumentError("cube and grid dimensions differ");
    if (q.overlap_fraction(f.domain()) < 1.0 - 1e-9)
        throw DomainError("cube is not inside the grid domain");
    if (q.side() < f.cell_size() * (1.0 - 1e-9))
        throw ResolutionError("cube is smaller than one grid cell");
    const CellRange r = f.grid().cells(q);
    if (r.empty())
        throw ResolutionError("cube contains no cell center");
    return r;
}

double cube_average(const GridFunction& f, const Cube& q)
{
    const CellRange r = admissible_cells(f, q);
    double s = 0.0;
    for_each_cell(f.grid(), r, [&](Index i) { s += f[i]; });
    return s / static_cast<double>(r.count());
}

GridFunction restrict(const GridFunction& f, const Cube& q)
{
    const GridSpec& g = f.grid();
    if (!q.overlaps(g.domain()))
        throw DomainError("restriction cube does not meet the grid domain");
    if (!g.domain().contains(q, g.cell_size() * (1.0 + 1e-9)))
        throw DomainError("restriction cube leaves the grid domain by more than one cell");
    const CellRange r = g.cells(q);
    if (r.empty())
        throw DomainError("restriction cube contains no cell center");
    const Index m = r.extent(0);
    if (f.dim() == 2 && r.extent(1) != m)
        throw DomainError("restricted cell set is not a square");
    Point lower(f.dim());
    for (int j = 0; j < f.dim(); ++j)
        lower[j] = g.domain().lo(j) + static_cast<double>(r.lo[j]) * g.cell_size();
    GridSpec sub(Cube::from_lower(lower, static_cast<double>(m) * g.cell_size()), m);
    Eigen::ArrayXd v(sub.size());
    Index k = 0;
    for_each_cell(g, r, [&](Index i) { v[k++] = f[i]; });
    return GridFunction(sub, std::move(v));
}

BoxSums::BoxSums(const GridSpec& grid, const Eigen::ArrayXd& values)
    : grid_(grid)
{
    const Index r = grid.resolution();
    if (grid.dim() == 1) {
        table_.resize(r + 1);
        table_[0] = 0.0;
        for (Index i = 0; i < r; ++i)
            table_[i + 1] = table_[i] + values[i];
    } else {
        table_ = Eigen::ArrayXd::Zero((r + 1) * (r + 1));
        for (Index j = 0; j < r; ++j)
            for (Index i = 0; i < r; ++i)
                table_[(i + 1) + (j + 1) * (r + 1)] = values[i + j * r] + table_[i + (j + 1) * (r + 1)]
                    + table_[(i + 1) + j * (r + 1)] - table_[i + j * (r + 1)];
    }
}

double BoxSums::sum(const CellRange& range) const
{
    const CellRange c = grid_.clip(range);
    if (c.empty())
        return 0.0;
    if (c.dim == 1)
        return table_[c.hi[0]] - table_[c.lo[0]];
    const Index w = grid_.resolution() + 1;
    return table_[c.hi[0] + c.hi[1] * w] - table_[c.lo[0] + c.hi[1] * w] - table_[c.hi[0] + c.lo[1] * w]
        + table_[c.lo[0] + c.lo[1] * w];
}

namespace {

// "-1..1" or "-1..1,-1..1"
Cube parse_domain(const std::string& text)
{
    std::vector<std::pair<double, double>> axes;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dots = part.find("..");
        if (dots == std::string::npos)
            throw ValidationError("domain axis must look like lo..hi: " + part);
        try {
            axes.emplace_back(std::stod(part.substr(0, dots)), std::stod(part.substr(dots + 2)));
        } catch (const std::exception&) {
            throw ValidationError("bad domain bounds: " + part);
        }
    }
    if (axes.empty() || axes.size() > 2)
        throw ValidationError("domain must have one or two axes");
    const double side = axes[0].second - axes[0].first;
    Point c(static_cast<int>(axes.size()));
    for (std::size_t j = 0; j < axes.size(); ++j) {
        if (std::abs((axes[j].second - axes[j].first) - side) > 1e-12 * std::abs(side))
            throw ValidationError("domain must be a cube");
        c[static_cast<int>(j)] = 0.5 * (axes[j].first + axes[j].second);
    }
    if (!(side > 0.0))
        throw ValidationError("domain must have positive side");
    return Cube(c, side);
}

} // namespace

GridFunction read_csv(std::istream& in)
{
    std::string header;
    if (!std::getline(in, header) || header.rfind('#', 0) != 0)
        throw ValidationError("grid CSV must start with '# domain=... resolution=...'");
    std::string domain_text;
    Index res = 0;
    {
        std::stringstream hs(header.substr(1));
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("domain=", 0) == 0)
                domain_text = tok.substr(7);
            else if (tok.rfind("resolution=", 0) == 0) {
                try {
                    res = std::stoll(tok.substr(11));
                } catch (const std::exception&) {
                    throw ValidationError("bad resolution in grid CSV header");
                }
            }
        }
    }
    if (domain_text.empty() || res < 1)
        throw ValidationError("grid CSV header lacks domain or resolution");
    GridSpec grid(parse_domain(domain_text), res);
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(grid.size()));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ValidationError("non-numeric value in grid CSV: " + cell);
            }
        }
    }
    if (static_cast<Index>(vals.size()) != grid.size())
        throw ValidationError("grid CSV has " + std::to_string(vals.size()) + " values, expected "
                              + std::to_string(grid.size()));
    return GridFunction(grid, Eigen::Map<Eigen::ArrayXd>(vals.data(), static_cast<Index>(vals.size())));
}

GridFunction read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open " + path);
    return read_csv(in);
}

void write_csv(const GridFunction& f, std::ostream& out)
{
    const GridSpec& g = f.grid();
    out << "# domain=";
    for (int j = 0; j < g.dim(); ++j) {
        if (j)
            out << ',';
        out << fmt(g.domain().lo(j)) << ".." << fmt(g.domain().hi(j));
    }
    out << " resolution=" << g.resolution() << '\n';
    const Index r = g.resolution();
    if (g.dim() == 1) {
        for (Index i = 0; i < r; ++i)
            out << fmt(f[i]) << '\n';
    } else {
        for (Index j = 0; j < r; ++j) {
            for (Index i = 0; i < r; ++i) {
                if (i)
                    out << ',';
                out << fmt(f[g.flat(i, j)]);
            }
            out << '\n';
        }
    }
}

void write_csv(const GridFunction& f, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw ValidationError("cannot write " + path);
    write_csv(f, out);
}

} // namespace lipcmo
