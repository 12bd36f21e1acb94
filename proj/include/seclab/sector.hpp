#pragma once

// Concrete model Liouville sectors: a fiber factor (a point or the Liouville
// plane) times k copies of the right half plane with coordinates (R_i, I_i)
// and the eccentric one-form (1-a) R dI - a I dR, plus an exact bump term df.
//
// The radial function s is the Liouville flow time from the unit level of the
// eccentric quadratic, so Z[s] = 1 holds for every eccentricity (the
// logarithm of the quadratic itself only works at eccentricity 1/2, where the
// two coincide).

#include "seclab/numerics.hpp"
#include "seclab/types.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace seclab::sector {

enum class Fiber { point, plane };

/// C^2 smoothstep 10 t^3 - 15 t^4 + 6 t^5 with exact 0/1 tails.
struct Smoothstep {
    double lo = 0.0, hi = 1.0;

    double value(double x) const {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        const double t = (x - lo) / (hi - lo);
        return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    }
    double deriv(double x) const {
        if (x <= lo || x >= hi) return 0.0;
        const double t = (x - lo) / (hi - lo);
        return 30.0 * t * t * (1.0 - t) * (1.0 - t) / (hi - lo);
    }
};

/// C^5 smoothstep (degree 11); used for the bump profiles so the deformation
/// field is C^4 and the RK4 flow keeps its full refinement order.
struct Smoothstep11 {
    double lo = 0.0, hi = 1.0;

    double value(double x) const {
        if (x <= lo) return 0.0;
        if (x >= hi) return 1.0;
        const double t = (x - lo) / (hi - lo);
        const double t6 = t * t * t * t * t * t;
        return t6 * (462.0 + t * (-1980.0 + t * (3465.0 + t * (-3080.0 + t * (1386.0 - 252.0 * t)))));
    }
    double deriv(double x) const {
        if (x <= lo || x >= hi) return 0.0;
        const double t = (x - lo) / (hi - lo);
        const double u = t * (1.0 - t);
        return 2772.0 * u * u * u * u * u / (hi - lo);
    }
};

struct ConstantsLedger {
    double eps0 = 0.5;
    double eps1 = 1e-3;
    double T0 = 10.377;
    double N0 = 5.0;
    double N1 = 8.0;
    double beta = 0.25;

    double N2() const { return -std::log(2.0 * std::sqrt(eps1)); }
};

/// Bump amplitude and profiles. f(y, R, I) = a chi0(h_F) eta(I_1) zeta(R_1),
/// supported inside F0 x {|I| <= N0} x {R <= eps0/2}; the R window keeps the
/// deformation field inside the support the flow theorem declares.
struct BumpF {
    double amplitude = 0.0;
    Smoothstep11 chi0_down;  // in h_F; chi0 = 1 - step
    Smoothstep11 eta_down;   // in I^2
    Smoothstep11 zeta_down;  // in R

    bool active() const { return amplitude != 0.0; }
};

struct CheckReport {
    struct Item {
        std::string name;
        bool pass = true;
        double margin = 0.0;  // positive slack when passing
        double value = 0.0;
    };
    std::vector<Item> items;
    bool all_pass() const {
        for (const auto& it : items)
            if (!it.pass) return false;
        return true;
    }
};

class SectorModel {
public:
    SectorModel(double alpha, int k, Fiber fiber, double F0, double F0prime, double bump_amplitude,
                ConstantsLedger ledger)
        : alpha_(alpha), k_(k), fiber_(fiber), F0_(F0), F0prime_(F0prime), ledger_(ledger) {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw construction_error("SectorModel: alpha in (0,1]");
        if (k != 1 && k != 2) throw construction_error("SectorModel: k must be 1 or 2");
        if (fiber == Fiber::point && ledger_.beta != 0.0)
            throw construction_error("SectorModel: point fiber forces beta = 0");
        if (bump_amplitude != 0.0 && k != 1)
            throw construction_error("SectorModel: the bump term is modeled for k = 1 only");
        if (!(F0 < F0prime)) throw construction_error("SectorModel: need F0 < F0prime");
        bump_.amplitude = bump_amplitude;
        bump_.chi0_down = {0.5 * F0, F0};
        const double n0 = ledger_.N0;
        bump_.eta_down = {(0.6 * n0) * (0.6 * n0), (0.9 * n0) * (0.9 * n0)};
        bump_.zeta_down = {0.25 * ledger_.eps0, 0.5 * ledger_.eps0};
    }

    double alpha() const { return alpha_; }
    int k() const { return k_; }
    Fiber fiber() const { return fiber_; }
    double F0() const { return F0_; }
    double F0prime() const { return F0prime_; }
    const ConstantsLedger& ledger() const { return ledger_; }
    const BumpF& bump() const { return bump_; }

    int fiber_dim() const { return fiber_ == Fiber::plane ? 2 : 0; }
    int dim() const { return fiber_dim() + 2 * k_; }
    int idxR(int i) const { return fiber_dim() + 2 * i; }
    int idxI(int i) const { return fiber_dim() + 2 * i + 1; }

    num::StencilDomain chart_domain() const {
        Vec floors = Vec::Constant(dim(), -std::numeric_limits<double>::infinity());
        for (int i = 0; i < k_; ++i) floors[idxR(i)] = 0.0;
        return num::StencilDomain::with_floors(floors);
    }

    // ---- fiber quantities (plane fiber) -------------------------------
    double h_F(const Point& p) const {
        if (fiber_ != Fiber::plane) return 0.0;
        return 0.5 * (p[0] * p[0] + p[1] * p[1]);
    }
    double s_F(const Point& p) const { return std::log(h_F(p)); }

    // ---- bump ----------------------------------------------------------
    double f_at(const Point& p) const {
        if (!bump_.active()) return 0.0;
        const double chi = fiber_ == Fiber::plane ? 1.0 - bump_.chi0_down.value(h_F(p)) : 1.0;
        if (chi == 0.0) return 0.0;
        const double I = p[idxI(0)], R = p[idxR(0)];
        const double eta = 1.0 - bump_.eta_down.value(I * I);
        if (eta == 0.0) return 0.0;
        const double zeta = 1.0 - bump_.zeta_down.value(R);
        if (zeta == 0.0) return 0.0;
        return bump_.amplitude * chi * eta * zeta;
    }

    Covector df_at(const Point& p) const {
        Vec g = Vec::Zero(dim());
        if (!bump_.active()) return Covector(g);
        const double I = p[idxI(0)], R = p[idxR(0)];
        const double chi = fiber_ == Fiber::plane ? 1.0 - bump_.chi0_down.value(h_F(p)) : 1.0;
        const double eta = 1.0 - bump_.eta_down.value(I * I);
        const double zeta = 1.0 - bump_.zeta_down.value(R);
        const double a = bump_.amplitude;
        if (fiber_ == Fiber::plane) {
            const double dchi_dh = -bump_.chi0_down.deriv(h_F(p));
            g[0] = a * dchi_dh * p[0] * eta * zeta;
            g[1] = a * dchi_dh * p[1] * eta * zeta;
        }
        const double deta_dI = -bump_.eta_down.deriv(I * I) * 2.0 * I;
        const double dzeta_dR = -bump_.zeta_down.deriv(R);
        g[idxI(0)] = a * chi * deta_dI * zeta;
        g[idxR(0)] = a * chi * eta * dzeta_dR;
        return Covector(g);
    }

    // ---- Liouville data --------------------------------------------------
    /// lambda = pi_F^* lambda_F + sum_i pi_C^* lambda_C^alpha + df.
    Covector lambda_at(const Point& p) const {
        Vec c = Vec::Zero(dim());
        if (fiber_ == Fiber::plane) {
            c[0] = -0.5 * p[1];
            c[1] = 0.5 * p[0];
        }
        for (int i = 0; i < k_; ++i) {
            c[idxR(i)] = -alpha_ * p[idxI(i)];
            c[idxI(i)] = (1.0 - alpha_) * p[idxR(i)];
        }
        Covector lam(c);
        if (bump_.active()) lam = lam + df_at(p);
        return lam;
    }

    /// The split part of lambda without the bump term.
    Covector lambda_split_at(const Point& p) const {
        Covector lam = Covector::zero(dim());
        Vec& c = lam.comps;
        if (fiber_ == Fiber::plane) {
            c[0] = -0.5 * p[1];
            c[1] = 0.5 * p[0];
        }
        for (int i = 0; i < k_; ++i) {
            c[idxR(i)] = -alpha_ * p[idxI(i)];
            c[idxI(i)] = (1.0 - alpha_) * p[idxR(i)];
        }
        return lam;
    }

    /// omega = d lambda is the constant block symplectic matrix (the bump is
    /// exact and drops out).
    TwoForm omega() const {
        Mat m = Mat::Zero(dim(), dim());
        if (fiber_ == Fiber::plane) {
            m(0, 1) = 1.0;
            m(1, 0) = -1.0;
        }
        for (int i = 0; i < k_; ++i) {
            m(idxR(i), idxI(i)) = 1.0;
            m(idxI(i), idxR(i)) = -1.0;
        }
        return TwoForm(m);
    }

    Vec liouville_Z_at(const Point& p) const { return num::omega_dual(omega(), lambda_at(p)); }

    Vec ham_vf(const Covector& dH) const { return num::omega_dual(omega(), dH); }
    Vec ham_vf(const num::ScalarField& H, const Point& p, double h = num::kDefaultStep) const {
        return ham_vf(num::fd_gradient(H, p, h, chart_domain()));
    }

    // ---- radial function -------------------------------------------------
    /// True when p lies in the compact box the corner neighborhood excludes
    /// (only meaningful when the bump is active; without it F0 is empty).
    bool in_excluded_box(const Point& p) const {
        if (!bump_.active()) return false;
        if (fiber_ == Fiber::plane && h_F(p) > F0_) return false;
        return std::abs(p[idxI(0)]) <= ledger_.N0 && p[idxR(0)] <= 2.0 * ledger_.eps0;
    }

    /// Flow time of Z_C from the unit level of h_C; Z_C[s_C] = 1 exactly.
    double s_C(const Point& p) const {
        double A = 0.0, B = 0.0;
        for (int i = 0; i < k_; ++i) {
            A += 0.5 * (1.0 - alpha_) * p[idxR(i)] * p[idxR(i)];
            B += 0.5 * alpha_ * p[idxI(i)] * p[idxI(i)];
        }
        if (A + B <= 0.0) throw domain_error("s_C: degenerate point on the scaling axis");
        if (alpha_ == 0.5) return std::log(A + B);
        if (A == 0.0) return std::log(B) / (2.0 * alpha_);
        if (B == 0.0) return std::log(A) / (2.0 * (1.0 - alpha_));
        // Solve A e^{-2(1-a)t} + B e^{-2at} = 1, strictly decreasing in t:
        // bracket, bisect, then polish with Newton.
        auto F = [&](double t) {
            return A * std::exp(-2.0 * (1.0 - alpha_) * t) + B * std::exp(-2.0 * alpha_ * t) - 1.0;
        };
        double t_lo = std::log(A + B) / (2.0 * std::max(alpha_, 1.0 - alpha_)) - 1.0;
        double t_hi = std::log(A + B) / (2.0 * std::min(alpha_, 1.0 - alpha_)) + 1.0;
        while (F(t_lo) < 0.0) t_lo -= 4.0;
        while (F(t_hi) > 0.0) t_hi += 4.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (t_lo + t_hi);
            (F(mid) > 0.0 ? t_lo : t_hi) = mid;
        }
        double t = 0.5 * (t_lo + t_hi);
        for (int it = 0; it < 4; ++it) {
            const double ea = std::exp(-2.0 * (1.0 - alpha_) * t);
            const double eb = std::exp(-2.0 * alpha_ * t);
            const double Ft = -2.0 * (1.0 - alpha_) * A * ea - 2.0 * alpha_ * B * eb;
            t -= (A * ea + B * eb - 1.0) / Ft;
        }
        return t;
    }

    /// Components of ds_C against (dR_i, dI_i), by implicit differentiation
    /// of the flow-time equation.
    Covector ds_C(const Point& p) const {
        const double t = s_C(p);
        Vec g = Vec::Zero(dim());
        const double ea = std::exp(-2.0 * (1.0 - alpha_) * t);
        const double eb = std::exp(-2.0 * alpha_ * t);
        double Ft = 0.0;
        for (int i = 0; i < k_; ++i) {
            Ft += -2.0 * (1.0 - alpha_) * 0.5 * (1.0 - alpha_) * p[idxR(i)] * p[idxR(i)] * ea -
                  2.0 * alpha_ * 0.5 * alpha_ * p[idxI(i)] * p[idxI(i)] * eb;
        }
        for (int i = 0; i < k_; ++i) {
            g[idxR(i)] = -(1.0 - alpha_) * p[idxR(i)] * ea / Ft;
            g[idxI(i)] = -alpha_ * p[idxI(i)] * eb / Ft;
        }
        return Covector(g);
    }

    /// s = beta s_F + (1 - beta) s_C on the region where the splitting radial
    /// function applies; queries inside the excluded compact box are refused.
    double radial_s_at(const Point& p) const {
        if (in_excluded_box(p))
            throw region_error("radial_s_at: point lies in the excluded compact box");
        const double beta = ledger_.beta;
        double s = (1.0 - beta) * s_C(p);
        if (beta != 0.0) s += beta * s_F(p);
        return s;
    }

    Covector ds_at(const Point& p) const {
        if (in_excluded_box(p))
            throw region_error("ds_at: point lies in the excluded compact box");
        const double beta = ledger_.beta;
        Covector g = Covector((1.0 - beta) * ds_C(p).comps);
        if (beta != 0.0 && fiber_ == Fiber::plane) {
            const double h = h_F(p);
            g.comps[0] += beta * p[0] / h;
            g.comps[1] += beta * p[1] / h;
        }
        return g;
    }

    // ---- diagnostics -------------------------------------------------------
    /// Residuals of Z[R] - (1-a) R, Z[I] - a I and omega(X_R, X_I) - 1.
    CheckReport check_ZRZI(const Point& p) const {
        CheckReport rep;
        const Vec Z = liouville_Z_at(p);
        for (int i = 0; i < k_; ++i) {
            const double zr = Z[idxR(i)] - (1.0 - alpha_) * p[idxR(i)];
            const double zi = Z[idxI(i)] - alpha_ * p[idxI(i)];
            rep.items.push_back({"Z[R_" + std::to_string(i) + "]", std::abs(zr) < 1e-6,
                                 1e-6 - std::abs(zr), zr});
            rep.items.push_back({"Z[I_" + std::to_string(i) + "]", std::abs(zi) < 1e-6,
                                 1e-6 - std::abs(zi), zi});
            Covector dR = Covector::zero(dim());
            dR.comps[idxR(i)] = 1.0;
            Covector dI = Covector::zero(dim());
            dI.comps[idxI(i)] = 1.0;
            const Vec XR = ham_vf(dR), XI = ham_vf(dI);
            const double w = omega()(XR, XI) - 1.0;
            rep.items.push_back({"omega(X_R, X_I)_" + std::to_string(i), std::abs(w) < 1e-6,
                                 1e-6 - std::abs(w), w});
        }
        return rep;
    }

    /// Sampled bound on |X_f| over {0 <= R <= 2 eps0, |I| <= N0} (and the
    /// bump's fiber support), grid spacing 0.01 in R and I.
    double sampled_C_f() const {
        if (!bump_.active()) return 0.0;
        double worst = 0.0;
        const int nR = static_cast<int>(2.0 * ledger_.eps0 / 0.01) + 1;
        const int nI = static_cast<int>(2.0 * ledger_.N0 / 0.01) + 1;
        const int nh = fiber_ == Fiber::plane ? 64 : 1;
        Point p = Point::zero(dim());
        for (int ih = 0; ih < nh; ++ih) {
            if (fiber_ == Fiber::plane) {
                const double h = F0_ * (ih + 0.5) / nh;
                p[0] = std::sqrt(2.0 * h);
                p[1] = 0.0;  // |df_F| depends only on h_F
            }
            for (int ir = 0; ir < nR; ++ir) {
                p[idxR(0)] = 2.0 * ledger_.eps0 * ir / (nR - 1.0);
                for (int ii = 0; ii < nI; ++ii) {
                    p[idxI(0)] = -ledger_.N0 + 2.0 * ledger_.N0 * ii / (nI - 1.0);
                    // X_f = Omega df and Omega is orthogonal, so |X_f| = |df|.
                    worst = std::max(worst, df_at(p).norm());
                }
            }
        }
        return worst;
    }

    CheckReport validate_constants(double smoother_wd, double smoother_ht) const {
        CheckReport rep;
        const auto& L = ledger_;
        const double win = 2.0 * L.T0 * std::sqrt(L.eps1);
        rep.items.push_back({"5 eps0 / 4 <= 2 T0 sqrt(eps1)", win >= 1.25 * L.eps0,
                             win - 1.25 * L.eps0, win});
        rep.items.push_back({"2 T0 sqrt(eps1) <= 3 eps0 / 2", win <= 1.5 * L.eps0,
                             1.5 * L.eps0 - win, win});
        rep.items.push_back({"N2 = -log(2 sqrt(eps1))", true, 0.0, L.N2()});
        const double sw = std::sqrt(2.0) * smoother_wd;
        rep.items.push_back({"exp(-N1) < sqrt(2) wd", std::exp(-L.N1) < sw,
                             sw - std::exp(-L.N1), std::exp(-L.N1)});
        rep.items.push_back({"kappa window sqrt(2) wd < ht", sw < smoother_ht, smoother_ht - sw, sw});
        const double C = sampled_C_f();
        const double cap = C > 0.0 ? std::min(alpha_, 1.0 / C) : alpha_;
        rep.items.push_back({"beta < min(alpha, 1/C_f)", L.beta < cap, cap - L.beta, L.beta});
        rep.items.push_back({"N0 < N1", L.N0 < L.N1, L.N1 - L.N0, L.N0});
        return rep;
    }

private:
    double alpha_;
    int k_;
    Fiber fiber_;
    double F0_, F0prime_;
    ConstantsLedger ledger_;
    BumpF bump_;
};

// ---- JSON configuration ----------------------------------------------------

inline SectorModel model_from_json(const nlohmann::json& j) {
    auto need = [&](const nlohmann::json& node, const char* key) -> const nlohmann::json& {
        if (!node.contains(key))
            throw construction_error(std::string("model config: missing field '") + key + "'");
        return node.at(key);
    };
    const double alpha = need(j, "alpha").get<double>();
    const int k = need(j, "k").get<int>();
    const std::string fib = need(j, "fiber").get<std::string>();
    Fiber fiber;
    if (fib == "point")
        fiber = Fiber::point;
    else if (fib == "plane")
        fiber = Fiber::plane;
    else
        throw construction_error("model config: fiber must be 'point' or 'plane'");
    const double F0 = need(j, "F0").get<double>();
    const double F0p = need(j, "F0prime").get<double>();
    const auto& jb = need(j, "bump");
    const auto& jl = need(j, "ledger");
    ConstantsLedger led;
    led.eps0 = need(jl, "eps0").get<double>();
    led.eps1 = need(jl, "eps1").get<double>();
    led.T0 = need(jl, "T0").get<double>();
    led.N0 = need(jl, "N0").get<double>();
    led.N1 = need(jl, "N1").get<double>();
    led.beta = need(jl, "beta").get<double>();
    const double amp = need(jb, "a").get<double>();
    if (need(jb, "N0").get<double>() != led.N0)
        throw construction_error("model config: bump.N0 must match ledger.N0");
    return SectorModel(alpha, k, fiber, F0, F0p, amp, led);
}

}  // namespace seclab::sector
