#pragma once

// One-dimensional building blocks of the corner smoothers: the compactly
// supported convex hyperbola tail (Profile1D) and the even profile that
// rounds |y| into sqrt(y^2 + eps) (EvenProfile).
//
// Both glue an exact closed form to a bridge built by prescribing the
// *curvature* on the bridge interval as an explicitly nonnegative shape
// (a Hermite-matched decay at the left end plus a positioned bump) and
// integrating twice. Nonnegative curvature makes the profile convex, which
// in turn pins the slope between its endpoint values; the bump's amplitude
// and position are solved in closed form so that slope and value meet the
// outer branch exactly. Construction fails loudly when the two moment
// conditions cannot be met.

#include "seclab/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace seclab::smoothing {

namespace detail {

// Piecewise polynomial in the local variable (x - piece_left).
struct PiecewisePoly {
    std::vector<double> breaks;                // size m + 1
    std::vector<std::vector<double>> coef;     // m pieces, ascending powers

    double xmin() const { return breaks.front(); }
    double xmax() const { return breaks.back(); }

    int piece_of(double x) const {
        int lo = 0, hi = static_cast<int>(coef.size()) - 1;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (x >= breaks[mid])
                lo = mid;
            else
                hi = mid - 1;
        }
        return lo;
    }

    double eval(double x) const {
        const int i = piece_of(x);
        const double u = x - breaks[i];
        double acc = 0.0;
        for (int k = static_cast<int>(coef[i].size()) - 1; k >= 0; --k) acc = acc * u + coef[i][k];
        return acc;
    }

    double eval_deriv(double x) const {
        const int i = piece_of(x);
        const double u = x - breaks[i];
        double acc = 0.0;
        for (int k = static_cast<int>(coef[i].size()) - 1; k >= 1; --k)
            acc = acc * u + k * coef[i][k];
        return acc;
    }

    /// Antiderivative with F(breaks[0]) = c0, accumulated piece by piece.
    PiecewisePoly antiderivative(double c0) const {
        PiecewisePoly out;
        out.breaks = breaks;
        out.coef.resize(coef.size());
        double acc = c0;
        for (size_t i = 0; i < coef.size(); ++i) {
            std::vector<double> ci(coef[i].size() + 1);
            ci[0] = acc;
            for (size_t k = 0; k < coef[i].size(); ++k) ci[k + 1] = coef[i][k] / (k + 1.0);
            out.coef[i] = ci;
            const double w = breaks[i + 1] - breaks[i];
            double end = 0.0;
            for (int k = static_cast<int>(ci.size()) - 1; k >= 0; --k) end = end * w + ci[k];
            acc = end;
        }
        return out;
    }
};

/// Nonnegative curvature profile on [xa, xb] with prescribed left jet
/// (value s0 > 0, slope t0), flat zero right end, and prescribed integral
/// M0 > 0 and right-end first moment M1 = int (xb - x) kappa dx > 0.
/// Layout: cubic Hermite decay on [xa, xa + wA], a zero plateau, and a
/// (1 - v^2)^3 bump whose support touches xb.
inline PiecewisePoly nonneg_curvature(double xa, double xb, double s0, double t0, double M0,
                                      double M1, const char* what) {
    const double L = xb - xa;
    if (!(M0 > 0.0) || !(M1 > 0.0))
        throw construction_error(std::string(what) +
                                 ": bridge area constraint unsatisfiable (moment budget <= 0)");

    auto decay_integral = [&](double w) { return w * (0.5 * s0 + t0 * w / 12.0); };
    auto decay_centroid = [&](double w) {  // distance of the decay mass from xa
        const double num = w * (3.0 * s0 / 20.0 + t0 * w / 30.0);
        return w * num / std::max(decay_integral(w), 1e-300);
    };
    auto decay_moment_right = [&](double w) {
        return decay_integral(w) * (L - decay_centroid(w));
    };

    double w_cap = 0.45 * L;
    if (t0 < 0.0) w_cap = std::min(w_cap, 2.9 * s0 / (-t0));
    double wA = w_cap;
    // Shrink the decay until it leaves room in both moment budgets.
    if (decay_moment_right(wA) > 0.65 * M1 || decay_integral(wA) > 0.8 * M0) {
        double lo = 0.0, hi = wA;
        for (int it = 0; it < 120; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (decay_moment_right(mid) > 0.65 * M1 || decay_integral(mid) > 0.8 * M0)
                hi = mid;
            else
                lo = mid;
        }
        wA = lo;
    }
    if (!(wA > 0.0))
        throw construction_error(std::string(what) + ": left curvature jet exhausts the bridge budget");

    const double IA = decay_integral(wA);
    const double MA = decay_moment_right(wA);
    const double M0B = M0 - IA;
    const double M1B = M1 - MA;
    if (!(M0B > 0.0) || !(M1B > 0.0))
        throw construction_error(std::string(what) + ": bridge area constraint unsatisfiable");
    const double c = M1B / M0B;  // bump centroid distance from xb
    if (2.0 * c > L - wA - 1e-12 * L || c < 1e-9 * L)
        throw construction_error(std::string(what) + ": bump placement infeasible");
    const double wB = c;
    const double beta = M0B * 35.0 / (32.0 * wB);

    PiecewisePoly kappa;
    kappa.breaks = {xa, xa + wA, xb - 2.0 * wB, xb};
    // Piece 1: cubic Hermite (s0, t0) -> (0, 0) on width wA, in u = x - xa.
    {
        // h(u) = s0 + t0 u + c2 u^2 + c3 u^3 with h(w)=h'(w)=0.
        const double w = wA;
        const double c2 = (-3.0 * s0 - 2.0 * t0 * w) / (w * w);
        const double c3 = (2.0 * s0 + t0 * w) / (w * w * w);
        kappa.coef.push_back({s0, t0, c2, c3});
    }
    kappa.coef.push_back({0.0});
    // Piece 3: beta (1 - v^2)^3 with v = (u - wB)/wB, u = x - (xb - 2 wB).
    {
        std::array<double, 7> even = {1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0};  // (1 - v^2)^3
        // Substitute v = (u - wB)/wB and expand in powers of u.
        std::vector<double> out(7, 0.0);
        for (int k = 0; k <= 6; ++k) {
            if (even[k] == 0.0) continue;
            // (u/wB - 1)^k expanded binomially.
            double binom = 1.0;
            for (int j = 0; j <= k; ++j) {
                const double term = even[k] * binom * std::pow(-1.0, k - j) / std::pow(wB, j);
                out[j] += term;
                binom = binom * (k - j) / (j + 1.0);
            }
        }
        for (double& v : out) v *= beta;
        kappa.coef.push_back(out);
    }
    return kappa;
}

}  // namespace detail

/// Compactly supported convex replacement for the hyperbola branch
/// f(x) = eps / (2x). Exact on [sqrt(eps/2), exact_end] (which contains
/// [sqrt(eps/2), 2 sqrt(eps)]), convex and decaying on the bridge, and
/// identically zero past support_end = 2 T0 sqrt(eps).
class Profile1D {
public:
    Profile1D(double eps, double T0) : eps_(eps) {
        if (!(eps > 0.0 && eps < 0.5)) throw construction_error("Profile1D: need 0 < eps < 1/2");
        delta_ = std::sqrt(0.5 * eps);
        support_end_ = 2.0 * T0 * std::sqrt(eps);
        x_exact_end_ = 0.84 * T0 * std::sqrt(eps);
        if (x_exact_end_ < 2.0 * std::sqrt(eps) * (1.0 - 1e-12))
            throw construction_error("Profile1D: T0 too small (exact branch would not reach 2 sqrt(eps))");
        const double xm = x_exact_end_, tau = support_end_, L = tau - xm;
        const double M0 = 0.5 * eps / (xm * xm);           // total slope change
        const double M1 = M0 * (L - xm);                   // gap closed by curvature
        if (!(M1 > 0.0))
            throw construction_error("Profile1D: bridge area constraint unsatisfiable (need tau > 2 x_m)");
        curvature_ = detail::nonneg_curvature(xm, tau, eps / (xm * xm * xm),
                                              -3.0 * eps / (xm * xm * xm * xm), M0, M1, "Profile1D");
        slope_ = curvature_.antiderivative(-0.5 * eps / (xm * xm));
        value_ = slope_.antiderivative(0.5 * eps / xm);
        // Algebraic closure at the support end.
        if (std::abs(slope_.eval(tau)) > 1e-12 || std::abs(value_.eval(tau)) > 1e-12)
            throw construction_error("Profile1D: bridge failed to close at the support end");
    }

    double eps() const { return eps_; }
    double delta() const { return delta_; }
    double support_end() const { return support_end_; }
    double exact_end() const { return x_exact_end_; }
    /// Abscissae where the bridge's curvature is only C^1; finite-difference
    /// second derivatives near these need a collar.
    std::vector<double> bridge_knots() const { return curvature_.breaks; }

    double value(double x) const {
        require_domain(x);
        if (x >= support_end_) return 0.0;
        if (x <= x_exact_end_) return 0.5 * eps_ / x;
        return value_.eval(x);
    }
    double deriv(double x) const {
        require_domain(x);
        if (x >= support_end_) return 0.0;
        if (x <= x_exact_end_) return -0.5 * eps_ / (x * x);
        return slope_.eval(x);
    }
    double deriv2(double x) const {
        require_domain(x);
        if (x >= support_end_) return 0.0;
        if (x <= x_exact_end_) return eps_ / (x * x * x);
        return curvature_.eval(x);
    }

private:
    void require_domain(double x) const {
        if (x < delta_ * (1.0 - 1e-12)) throw domain_error("Profile1D: x below sqrt(eps/2)");
    }

    double eps_, delta_, support_end_, x_exact_end_;
    detail::PiecewisePoly curvature_, slope_, value_;
};

/// Even convex profile: exactly sqrt(y^2 + eps) for |y| <= Y0, exactly |y|
/// for |y| >= Y1, convex with |slope| < 1 strictly on the open bridge.
class EvenProfile {
public:
    EvenProfile(double eps, double Y0, double Y1) : eps_(eps), Y0_(Y0), Y1_(Y1) {
        if (!(eps > 0.0)) throw construction_error("EvenProfile: eps must be positive");
        if (Y0 < std::sqrt(2.0 * eps) * (1.0 - 1e-12))
            throw construction_error("EvenProfile: need Y0 >= sqrt(2 eps)");
        if (!(Y1 > 2.0 * Y0)) throw construction_error("EvenProfile: need Y1 > 2 Y0");
        const double L = Y1 - Y0;
        const double r0 = std::sqrt(Y0 * Y0 + eps);
        const double m0 = Y0 / r0;
        const double M0 = 1.0 - m0;
        const double M1 = M0 * L - (r0 - Y0);  // gap left after the tangent line
        curvature_ = detail::nonneg_curvature(Y0, Y1, eps / std::pow(Y0 * Y0 + eps, 1.5),
                                              -3.0 * eps * Y0 / std::pow(Y0 * Y0 + eps, 2.5), M0,
                                              M1, "EvenProfile");
        slope_ = curvature_.antiderivative(m0);
        value_ = slope_.antiderivative(r0);
        if (std::abs(slope_.eval(Y1) - 1.0) > 1e-12 || std::abs(value_.eval(Y1) - Y1) > 1e-10)
            throw construction_error("EvenProfile: bridge failed to close at Y1");
    }

    double eps() const { return eps_; }
    double Y0() const { return Y0_; }
    double Y1() const { return Y1_; }
    std::vector<double> bridge_knots() const { return curvature_.breaks; }

    double value(double y) const {
        const double a = std::abs(y);
        if (a >= Y1_) return a;
        if (a <= Y0_) return std::sqrt(y * y + eps_);
        return value_.eval(a);
    }
    double deriv(double y) const {
        const double a = std::abs(y);
        double m;
        if (a >= Y1_)
            m = 1.0;
        else if (a <= Y0_)
            m = a / std::sqrt(a * a + eps_);
        else
            m = slope_.eval(a);
        return y < 0.0 ? -m : m;
    }
    double deriv2(double y) const {
        const double a = std::abs(y);
        if (a >= Y1_) return 0.0;
        if (a <= Y0_) return eps_ / std::pow(a * a + eps_, 1.5);
        return curvature_.eval(a);
    }

private:
    double eps_, Y0_, Y1_;
    detail::PiecewisePoly curvature_, slope_, value_;
};

inline EvenProfile build_even_profile(double eps, double Y0, double Y1) {
    return EvenProfile(eps, Y0, Y1);
}

inline Profile1D build_f_tilde(double eps, double T0) { return Profile1D(eps, T0); }

}  // namespace seclab::smoothing
