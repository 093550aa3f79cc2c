#include "lipcmo/presets.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

namespace lipcmo {

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        out.push_back(item);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

double number(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v))
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("bad number '" + s + "' in " + what);
    }
}

} // namespace

double bump(const Point& x)
{
    const double r2 = x.squaredNorm();
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
}

double sgnpow(const Point& x, double a)
{
    const double t = x[0];
    return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), a), t);
}

double lacunary(const Point& x, double a)
{
    double s = 0.0;
    for (int k = 0; k <= 12; ++k)
        s += std::pow(2.0, -k * a) * std::sin(std::ldexp(std::numbers::pi, k) * x[0]);
    return s;
}

GridFunction parse_function(const std::string& text, const GridSpec& grid)
{
    const std::string tag = "preset:";
    if (text.rfind(tag, 0) != 0)
        return read_csv(text);
    const auto parts = split(text.substr(tag.size()), ':');
    const std::string& name = parts.empty() ? text : parts[0];
    auto param = [&](double fallback) { return parts.size() > 1 ? number(parts[1], text) : fallback; };
    if (parts.size() > 2)
        throw ValidationError("too many preset parameters in '" + text + "'");
    if (name == "const") {
        const double c = param(1.0);
        return GridFunction::constant(grid, c);
    }
    if (name == "linear")
        return GridFunction::sample(grid, [](const Point& x) { return x[0]; });
    if (name == "bump") {
        const double amp = param(1.0);
        return GridFunction::sample(grid, [amp](const Point& x) { return amp * bump(x); });
    }
    if (name == "sgnpow") {
        if (parts.size() < 2)
            throw ValidationError("sgnpow needs an exponent, e.g. preset:sgnpow:0.5");
        const double a = param(0.5);
        return GridFunction::sample(grid, [a](const Point& x) { return sgnpow(x, a); });
    }
    if (name == "lacunary") {
        const double a = param(0.5);
        return GridFunction::sample(grid, [a](const Point& x) { return lacunary(x, a); });
    }
    throw ValidationError("unknown function preset '" + name + "' (const, linear, bump, sgnpow:a, lacunary[:a])");
}

KernelSpec parse_kernel(const std::string& text, int n, double beta)
{
    const auto parts = split(text, ':');
    const std::string& name = parts.empty() ? text : parts[0];
    if (name == "sgn") {
        if (n == 1)
            return KernelSpec::line(1.0, -1.0, beta);
        return KernelSpec::from_angle(2, [](double t) { const double c = std::cos(t); return c > 1e-12 ? 1.0 : (c < -1e-12 ? -1.0 : 0.0); }, beta);
    }
    if (name == "cos") {
        if (n == 1)
            return KernelSpec::line(1.0, -1.0, beta);
        return KernelSpec::from_angle(2, [](double t) { return std::cos(t); }, beta);
    }
    if (name == "riesz") {
        if (parts.size() != 2)
            throw ValidationError("riesz needs an order, e.g. riesz:0.5");
        const double b = number(parts[1], text);
        if (!(b > 0.0))
            throw ValidationError("riesz order must be positive");
        return n == 1 ? KernelSpec::line(1.0, 1.0, b) : KernelSpec::from_angle(2, [](double) { return 1.0; }, b);
    }
    if (name == "table") {
        if (parts.size() < 2)
            throw ValidationError("table kernel needs a file, e.g. table:omega.csv");
        const std::string path = text.substr(6);
        std::ifstream in(path);
        if (!in)
            throw ValidationError("cannot open kernel table '" + path + "'");
        std::vector<std::pair<double, double>> samples;
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            const auto cols = split(line, ',');
            if (cols.size() != 2)
                throw ValidationError("kernel table rows must be 'angle,value'");
            if (std::exchange(first, false) && cols[0] == "angle")
                continue;
            samples.emplace_back(number(cols[0], path), number(cols[1], path));
        }
        return KernelSpec::from_samples(n, std::move(samples), beta);
    }
    throw ValidationError("unknown kernel '" + text + "' (sgn, cos, riesz:beta, table:FILE)");
}

GridFunction parse_weight(const std::string& text, const GridSpec& grid)
{
    if (text == "one")
        return GridFunction::constant(grid, 1.0);
    if (text.rfind("pow:", 0) == 0) {
        const double g = number(text.substr(4), text);
        return GridFunction::sample(grid, [g](const Point& x) { return std::pow(x.norm(), g); });
    }
    if (text.rfind("file:", 0) == 0 || text.rfind("csv:", 0) == 0) {
        GridFunction w = read_csv(text.substr(text.find(':') + 1));
        if (w.grid() != grid)
            throw ValidationError("weight file grid differs from the function grid");
        return w;
    }
    throw ValidationError("unknown weight '" + text + "' (one, pow:gamma, csv:PATH)");
}

Cube parse_domain(const std::string& text, int n_hint)
{
    const auto axes = split(text, ',');
    if (axes.empty() || axes.size() > 2)
        throw ValidationError("domain must be lo..hi or lo..hi,lo..hi");
    std::vector<std::pair<double, double>> iv;
    for (const auto& a : axes) {
        const auto pos = a.find("..");
        if (pos == std::string::npos)
            throw ValidationError("domain axis '" + a + "' is not lo..hi");
        const double lo = number(a.substr(0, pos), text), hi = number(a.substr(pos + 2), text);
        if (!(hi > lo))
            throw ValidationError("domain needs lo < hi");
        iv.emplace_back(lo, hi);
    }
    if (iv.size() == 2 && std::abs((iv[0].second - iv[0].first) - (iv[1].second - iv[1].first)) > 1e-12)
        throw ValidationError("domain must be a cube");
    const int n = n_hint > 0 ? n_hint : static_cast<int>(iv.size());
    if (n != 1 && n != 2)
        throw ValidationError("dimension must be 1 or 2");
    if (iv.size() == 1 && n == 2)
        iv.push_back(iv[0]);
    if (static_cast<int>(iv.size()) != n)
        throw ValidationError("domain dimension does not match --dim");
    Point lo(n);
    for (int j = 0; j < n; ++j)
        lo[j] = iv[static_cast<std::size_t>(j)].first;
    return Cube::from_lower(lo, iv[0].second - iv[0].first);
}

} // namespace lipcmo
