#pragma once

// Finite-difference exterior calculus, omega-dual solves and RK4 integration.
// Everything here is a pure function of its arguments; no shared state.

#include "seclab/types.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace seclab::num {

using ScalarField = std::function<double(const Point&)>;
using OneFormField = std::function<Covector(const Point&)>;
using PointMap = std::function<Point(const Point&)>;
using VectorField = std::function<Vec(double, const Point&)>;

constexpr double kDefaultStep = 1e-4;

/// Coordinate floors for charts with boundary ({R_i >= 0}). Empty means all
/// coordinates are unconstrained.
struct StencilDomain {
    Vec lower;  // size 0, or size n with -inf for free coordinates

    static StencilDomain free() { return {}; }
    static StencilDomain with_floors(Vec floors) { return {std::move(floors)}; }

    bool constrained(int i) const { return lower.size() > 0 && std::isfinite(lower[i]); }
    void require_inside(const Point& p) const {
        if (lower.size() == 0) return;
        for (int i = 0; i < p.dim(); ++i) {
            if (constrained(i) && p[i] < lower[i]) {
                throw domain_error("stencil point outside chart domain: coordinate " +
                                   std::to_string(i) + " = " + std::to_string(p[i]) +
                                   " below floor " + std::to_string(lower[i]));
            }
        }
    }
};

namespace detail {

// Second-order partial derivative in coordinate i. Switches to a one-sided
// three-point stencil when the centered one would cross a coordinate floor.
inline double partial(const ScalarField& f, const Point& p, int i, double h,
                      const StencilDomain& dom) {
    dom.require_inside(p);
    Point q = p;
    const bool floored = dom.constrained(i) && (p[i] - h < dom.lower[i]);
    if (!floored) {
        q[i] = p[i] + h;
        const double fp = f(q);
        q[i] = p[i] - h;
        const double fm = f(q);
        return (fp - fm) / (2.0 * h);
    }
    const double f0 = f(p);
    q[i] = p[i] + h;
    const double f1 = f(q);
    q[i] = p[i] + 2.0 * h;
    const double f2 = f(q);
    return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
}

}  // namespace detail

/// Central-difference gradient, one-sided second-order next to chart floors.
inline Covector fd_gradient(const ScalarField& f, const Point& p, double h = kDefaultStep,
                            const StencilDomain& dom = StencilDomain::free()) {
    Vec g(p.dim());
    for (int i = 0; i < p.dim(); ++i) g[i] = detail::partial(f, p, i, h, dom);
    return Covector(g);
}

/// Exterior derivative of a one-form field: (d theta)_ij = d_i theta_j - d_j theta_i.
/// The output is antisymmetric bitwise by construction.
inline TwoForm fd_two_form(const OneFormField& theta, const Point& p, double h = kDefaultStep,
                           const StencilDomain& dom = StencilDomain::free()) {
    const int n = p.dim();
    Mat d(n, n);  // d(i, j) = d_i theta_j
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            ScalarField component = [&theta, j](const Point& q) { return theta(q).comps[j]; };
            d(i, j) = detail::partial(component, p, i, h, dom);
        }
    }
    Mat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = d(i, j) - d(j, i);
    return TwoForm(out);
}

/// Column-wise Jacobian of a point map.
inline LinearMap fd_jacobian(const PointMap& map, const Point& p, double h = kDefaultStep,
                             const StencilDomain& dom = StencilDomain::free()) {
    const int n = p.dim();
    Mat jac(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            ScalarField comp = [&map, i](const Point& q) { return map(q).coords[i]; };
            jac(i, j) = detail::partial(comp, p, j, h, dom);
        }
    }
    return LinearMap(jac, BasisTag::tangent);
}

/// Solve v with v . omega = xi (i.e. omega(v, .) = xi). Residual is checked
/// against 1e-10 * (1 + |xi|); near-singular omega raises with a condition
/// estimate.
inline Vec omega_dual(const TwoForm& omega, const Covector& xi) {
    const int n = omega.dim();
    // (v . omega)_j = sum_i v_i omega_ij, so omega^T v = xi.
    Eigen::PartialPivLU<Mat> lu(omega.mat.transpose());
    const double rcond = lu.rcond();
    const double det_scale = std::pow(std::abs(lu.determinant()), 1.0 / n);
    if (!(rcond > 1e-13) || !(det_scale > 1e-12)) {
        throw degeneracy_error("omega_dual: near-singular two-form, reciprocal condition " +
                               std::to_string(rcond) + ", |det|^(1/n) " +
                               std::to_string(det_scale));
    }
    if (xi.comps.norm() == 0.0) return Vec::Zero(n);
    Vec v = lu.solve(xi.comps);
    const double residual = (omega.mat.transpose() * v - xi.comps).norm();
    const double tol = 1e-10 * (1.0 + xi.comps.norm());
    if (!v.allFinite() || residual > tol) {
        throw degeneracy_error("omega_dual: solve residual " + std::to_string(residual) +
                               " exceeds tolerance, reciprocal condition " + std::to_string(rcond));
    }
    return v;
}

struct FlowResult {
    Point end;
    std::vector<Point> path;  // filled only when requested
};

/// Classical RK4 for dp/dt = X(t, p). Raises when the trajectory leaves the
/// chart (reports the exit location).
inline FlowResult rk4_flow(const VectorField& X, const Point& p0, double T, int steps,
                           const StencilDomain& dom = StencilDomain::free(),
                           bool keep_path = false) {
    if (steps < 1) throw domain_error("rk4_flow: steps must be >= 1");
    const double h = T / steps;
    Point p = p0;
    FlowResult out;
    if (keep_path) out.path.push_back(p);
    for (int s = 0; s < steps; ++s) {
        const double t = s * h;
        const Vec k1 = X(t, p);
        const Vec k2 = X(t + 0.5 * h, Point(p.coords + 0.5 * h * k1));
        const Vec k3 = X(t + 0.5 * h, Point(p.coords + 0.5 * h * k2));
        const Vec k4 = X(t + h, Point(p.coords + h * k3));
        p.coords += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (dom.lower.size() > 0) {
            for (int i = 0; i < p.dim(); ++i) {
                if (dom.constrained(i) && p[i] < dom.lower[i]) {
                    throw domain_error("rk4_flow: trajectory left chart at t=" +
                                       std::to_string(t + h) + ", coordinate " + std::to_string(i) +
                                       " = " + std::to_string(p[i]));
                }
            }
        }
        if (keep_path) out.path.push_back(p);
    }
    out.end = p;
    return out;
}

/// RK4 with one extra quadrature state dA/dt = g(t, p(t)), sharing the nodes
/// (and therefore the error order) of the flow itself.
inline std::pair<Point, double> rk4_flow_with_quadrature(
    const VectorField& X, const std::function<double(double, const Point&)>& g, const Point& p0,
    double T, int steps, const StencilDomain& dom = StencilDomain::free()) {
    if (steps < 1) throw domain_error("rk4_flow: steps must be >= 1");
    const double h = T / steps;
    Point p = p0;
    double A = 0.0;
    for (int s = 0; s < steps; ++s) {
        const double t = s * h;
        const Vec k1 = X(t, p);
        const double a1 = g(t, p);
        Point q2(p.coords + 0.5 * h * k1);
        const Vec k2 = X(t + 0.5 * h, q2);
        const double a2 = g(t + 0.5 * h, q2);
        Point q3(p.coords + 0.5 * h * k2);
        const Vec k3 = X(t + 0.5 * h, q3);
        const double a3 = g(t + 0.5 * h, q3);
        Point q4(p.coords + h * k3);
        const Vec k4 = X(t + h, q4);
        const double a4 = g(t + h, q4);
        p.coords += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        A += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        dom.require_inside(p);
    }
    return {p, A};
}

}  // namespace seclab::num
