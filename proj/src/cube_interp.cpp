#include "lipcmo/cube_interp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lipcmo {

WeightedCube::WeightedCube(Cube cube, VertexValues psi)
    : cube_(std::move(cube)), psi_(std::move(psi))
{
    if (psi_.size() != cube_.vertex_count())
        throw ArgumentError("vertex map must have 2^n values");
    if (!psi_.allFinite())
        throw ArgumentError("vertex values must be finite");
}

double vertex_osc(const WeightedCube& wq)
{
    std::vector<double> v(wq.psi().data(), wq.psi().data() + wq.psi().size());
    std::sort(v.begin(), v.end());
    const double c = v[(v.size() - 1) / 2];
    double s = 0.0;
    for (double x : v)
        s += std::abs(x - c);
    return s;
}

double interpolate_unchecked(const WeightedCube& wq, const Point& x)
{
    const Cube& q = wq.cube();
    const int n = q.dim();
    double total = 0.0;
    for (int mask = 0; mask < q.vertex_count(); ++mask) {
        double w = 1.0;
        for (int j = 0; j < n; ++j) {
            const double c = q.center()[j];
            const double a = ((mask >> j) & 1) ? c + 0.5 * q.side() : c - 0.5 * q.side();
            w *= (2.0 * c - x[j] - a) / (2.0 * c - 2.0 * a);
        }
        total += w * wq.psi(mask);
    }
    return total;
}

double interpolate(const WeightedCube& wq, const Point& x, double tol)
{
    if (x.size() != wq.cube().dim())
        throw ArgumentError("point and cube dimensions differ");
    if (!wq.cube().contains(x, tol * wq.cube().side()))
        throw DomainError("interpolation point lies outside the cube");
    return interpolate_unchecked(wq, x);
}

WeightedCube restrict_to_face(const WeightedCube& wq, Face face)
{
    const Cube& q = wq.cube();
    const int n = q.dim();
    if (face.axis < 0 || face.axis >= n)
        throw ArgumentError("face axis out of range");
    Point c(n - 1);
    for (int j = 0, k = 0; j < n; ++j)
        if (j != face.axis)
            c[k++] = q.center()[j];
    VertexValues psi(1 << (n - 1));
    for (int sub = 0; sub < psi.size(); ++sub) {
        // spread the n-1 bits around the removed axis
        int mask = 0;
        for (int j = 0, k = 0; j < n; ++j) {
            if (j == face.axis)
                mask |= (face.upper ? 1 : 0) << j;
            else
                mask |= ((sub >> k++) & 1) << j;
        }
        psi[sub] = wq.psi(mask);
    }
    return WeightedCube(Cube(c, q.side()), psi);
}

Point face_to_parent(const WeightedCube& wq, Face face, const Point& y)
{
    const Cube& q = wq.cube();
    Point x(q.dim());
    for (int j = 0, k = 0; j < q.dim(); ++j)
        x[j] = j == face.axis ? (face.upper ? q.hi(j) : q.lo(j)) : y[k++];
    return x;
}

GradientReport gradient_bound_check(const WeightedCube& wq, int samples)
{
    if (samples < 2)
        throw ArgumentError("gradient check needs at least 2 samples per axis");
    const Cube& q = wq.cube();
    const int n = q.dim();
    const double l = q.side();
    const double step = 1e-6 * l;
    GradientReport rep;
    rep.bound = vertex_osc(wq) / l;
    const double scale = wq.psi().abs().maxCoeff();
    const double fd_budget = 1e-9 * scale / step + 1e-12;

    const int total = n == 1 ? samples : samples * samples;
    for (int s = 0; s < total; ++s) {
        Point x(n);
        for (int j = 0, rest = s; j < n; ++j, rest /= samples)
            x[j] = q.lo(j) + l * (static_cast<double>(rest % samples) + 1.0) / (samples + 1.0);
        for (int i = 0; i < n; ++i) {
            Point a = x, b = x;
            a[i] -= step;
            b[i] += step;
            const double d = (interpolate_unchecked(wq, b) - interpolate_unchecked(wq, a)) / (2.0 * step);
            rep.max_partial = std::max(rep.max_partial, std::abs(d));
        }
    }
    rep.ok = rep.max_partial <= rep.bound * (1.0 + 1e-6) + fd_budget;
    return rep;
}

} // namespace lipcmo
