#pragma once

// Sectorial Hamiltonians H = rho(s_{phi,kappa}) with rho' > 0, nonnegative
// isotopy families, and first-jet certification of the confinement
// identities: the pointwise energy identity of the perturbed equation, the
// continuation inequality's exact margin, and the structure of the
// Hamiltonian field of the end profile.

#include "seclab/acs.hpp"
#include "seclab/end_profile.hpp"
#include "seclab/lagrangian.hpp"
#include "seclab/numerics.hpp"
#include "seclab/sector.hpp"
#include "seclab/types.hpp"

#include <cmath>
#include <functional>

namespace seclab::floer {

/// Monotone reparametrization rho with its derivative.
struct SectorialH {
    std::function<double(double)> rho;
    std::function<double(double)> rho_prime;

    static SectorialH linear(double c0, double c1) {
        if (!(c1 > 0.0)) throw construction_error("SectorialH: rho' must be positive");
        return {[c0, c1](double z) { return c0 + c1 * z; }, [c1](double) { return c1; }};
    }
    static SectorialH softplus(double scale = 1.0) {
        return {[scale](double z) { return z + scale * std::log1p(std::exp(z)); },
                [scale](double z) { return 1.0 + scale / (1.0 + std::exp(-z)); }};
    }
};

/// Family rho^s(z) = base(z) + s * gain(z) with gain >= 0, elongated by a
/// decreasing cut-off chi; chi' is exact (the polynomial's derivative).
class IsotopyFamily {
public:
    IsotopyFamily(SectorialH base, std::function<double(double)> gain,
                  std::function<double(double)> gain_prime)
        : base_(std::move(base)), gain_(std::move(gain)), gain_prime_(std::move(gain_prime)) {}

    double rho(double s, double z) const { return base_.rho(z) + s * gain_(z); }
    double drho_dz(double s, double z) const { return base_.rho_prime(z) + s * gain_prime_(z); }
    double drho_ds(double /*s*/, double z) const { return gain_(z); }

    /// chi: 1 at -infinity, 0 at +infinity, chi' <= 0 (quintic step on [-1, 1]).
    static double chi(double tau) {
        if (tau <= -1.0) return 1.0;
        if (tau >= 1.0) return 0.0;
        const double t = 0.5 * (tau + 1.0);
        return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    }
    static double chi_prime(double tau) {
        if (tau <= -1.0 || tau >= 1.0) return 0.0;
        const double t = 0.5 * (tau + 1.0);
        return -15.0 * t * t * (1.0 - t) * (1.0 - t);
    }

private:
    SectorialH base_;
    std::function<double(double)> gain_, gain_prime_;
};

struct Jet1 {
    Point p;
    Vec v_tau, v_t;
};

/// First jet of a solution of the perturbed equation at p:
/// v_tau = -J (v_t - X_H(p)), pointwise exact by construction.
inline Jet1 make_floer_jet(const Point& p, const Vec& v_t, const SectorialH& H,
                           const profile::EndProfile& ep, const Mat& cotangent_J) {
    const auto& model = ep.model();
    const double s_val = ep.value(p);
    Covector dH = Covector(Vec(H.rho_prime(s_val) * ep.gradient(p).comps));
    const Vec XH = model.ham_vf(dH);
    const Mat Jt = cotangent_J.transpose();
    Jet1 jet;
    jet.p = p;
    jet.v_t = v_t;
    jet.v_tau = -(Jt * (v_t - XH));
    return jet;
}

/// Residual of the proof-level energy identity
///   dlambda(v_tau, v_t) = dlambda(v_tau, J v_tau) - rho'(s) ds_phi(v_tau).
inline double energy_identity_residual(const Jet1& jet, const SectorialH& H,
                                       const profile::EndProfile& ep, const Mat& cotangent_J) {
    const auto& model = ep.model();
    const TwoForm omega = model.omega();
    const Mat Jt = cotangent_J.transpose();
    const double s_val = ep.value(jet.p);
    const double lhs = omega(jet.v_tau, jet.v_t);
    const double rhs = omega(jet.v_tau, Jt * jet.v_tau) -
                       H.rho_prime(s_val) * ep.gradient(jet.p)(jet.v_tau);
    return std::abs(lhs - rhs);
}

struct ContinuationMargin {
    double closed_form = 0.0;
    double assembled = 0.0;  // sixth-order tau stencil; exact for the quintic chi
};

/// Exact gap between the two sides of the continuation inequality:
/// -chi'(tau) * d_s rho^s |_{s = chi(tau)} at the jet's profile value.
inline ContinuationMargin continuation_sign_check(const Jet1& jet, const IsotopyFamily& fam,
                                                  double tau, const profile::EndProfile& ep) {
    const double z = ep.value(jet.p);
    ContinuationMargin out;
    out.closed_form = -IsotopyFamily::chi_prime(tau) * fam.drho_ds(IsotopyFamily::chi(tau), z);
    const double h = 1e-2;
    auto F = [&](double t) { return fam.rho(IsotopyFamily::chi(t), z); };
    out.assembled = -(-F(tau - 3 * h) + 9.0 * F(tau - 2 * h) - 45.0 * F(tau - h) +
                      45.0 * F(tau + h) - 9.0 * F(tau + 2 * h) + F(tau + 3 * h)) /
                    (60.0 * h);
    return out;
}

struct HamStructureReport {
    double coeff_dI = 0.0;   // of d/dI, expected d1 phi / phi
    double coeff_Xs = 0.0;   // of X_s, expected d2 phi e^{-s} / phi
    double decomposition_residual = 0.0;
    double formula_residual = 0.0;
};

/// Decompose X_{s_phi} against d/dI and X_s and compare with the stated
/// coefficients (k = 1 charts).
inline HamStructureReport ham_vf_structure_check(const profile::EndProfile& ep, const Point& p) {
    const auto& model = ep.model();
    if (model.k() != 1) throw domain_error("ham_vf_structure_check: stated for k = 1");
    const Vec X = model.ham_vf(ep.gradient(p));
    const Vec Xs = model.ham_vf(model.ds_at(p));
    Vec eI = Vec::Zero(model.dim());
    eI[model.idxI(0)] = 1.0;

    Mat basis(model.dim(), 2);
    basis.col(0) = eI;
    basis.col(1) = Xs;
    const Vec coeff = (basis.transpose() * basis).ldlt().solve(basis.transpose() * X);
    HamStructureReport rep;
    rep.coeff_dI = coeff[0];
    rep.coeff_Xs = coeff[1];
    rep.decomposition_residual = (X - basis * coeff).norm();

    double s = 0.0;
    const Vec args = ep.args(p, &s);
    const double phi_val = ep.phi().value(args);
    const Covector dphi = ep.phi().gradient(args);
    rep.formula_residual =
        std::max(std::abs(rep.coeff_dI - dphi.comps[0] / phi_val),
                 std::abs(rep.coeff_Xs - dphi.comps[1] * args[1] / phi_val));
    return rep;
}

}  // namespace seclab::floer
