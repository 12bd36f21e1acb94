#pragma once

// Cut-off function kappa, the end-profile function s_phi = -log phi(R, e^-s)
// and the deformed Liouville form lambda_kappa = lambda - d((1-kappa) f).
//
// On the declared linearity cylinders the end profile returns the radial
// function s, respectively -log R_i, through explicit branches, so those
// region formulas hold bitwise.

#include "seclab/numerics.hpp"
#include "seclab/sector.hpp"
#include "seclab/smoother.hpp"
#include "seclab/types.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>
#include <vector>

namespace seclab::profile {

/// kappa(y, R, I) = kappa0(h_F) kappa1(R) kappa2(I): 0 near the boundary and
/// the bump region, 1 far out. Thresholds come from the ledger and smoother.
class Kappa {
public:
    Kappa(const sector::SectorModel& model, const smoothing::Smoother& phi)
        : model_(&model) {
        const double wd = phi.width(), ht = phi.height();
        k1_ = {std::sqrt(2.0) * wd, ht};
        const double n0 = model.ledger().N0, n1 = model.ledger().N1;
        k2_ = {n0 * n0, n1 * n1};  // in I^2
        k0_ = {model.F0(), model.F0prime()};  // in h_F
    }

    double kappa0(const Point& p) const {
        if (model_->fiber() == sector::Fiber::point) return model_->bump().active() ? 0.0 : 1.0;
        return k0_.value(model_->h_F(p));
    }
    double kappa1(double R) const { return k1_.value(R); }
    double kappa2(double I) const { return k2_.value(I * I); }

    double value(const Point& p) const {
        const double k0 = kappa0(p);
        if (k0 == 0.0) return 0.0;
        const double k1 = kappa1(p[model_->idxR(0)]);
        if (k1 == 0.0) return 0.0;
        return k0 * k1 * kappa2(p[model_->idxI(0)]);
    }

    Covector d_at(const Point& p) const {
        const int n = model_->dim();
        Vec g = Vec::Zero(n);
        const double R = p[model_->idxR(0)], I = p[model_->idxI(0)];
        const double k0 = kappa0(p), k1 = kappa1(R), k2 = kappa2(I);
        if (model_->fiber() == sector::Fiber::plane) {
            const double dk0 = k0_.deriv(model_->h_F(p));
            g[0] = dk0 * p[0] * k1 * k2;
            g[1] = dk0 * p[1] * k1 * k2;
        }
        g[model_->idxR(0)] = k0 * k1_.deriv(R) * k2;
        g[model_->idxI(0)] = k0 * k1 * k2_.deriv(I * I) * 2.0 * I;
        return Covector(g);
    }

private:
    const sector::SectorModel* model_;
    sector::Smoothstep k0_, k1_, k2_;
};

inline double kappa_at(const Kappa& k, const Point& p) { return k.value(p); }

/// lambda_kappa = lambda - d((1 - kappa) f), assembled analytically via the
/// product rule d((1-kappa) f) = (1-kappa) df - f dkappa.
inline Covector lambda_kappa_at(const sector::SectorModel& model, const Kappa& kappa,
                                const Point& p) {
    Covector lam = model.lambda_at(p);
    const double f = model.f_at(p);
    const double kap = kappa.value(p);
    Covector correction((1.0 - kap) * model.df_at(p).comps - f * kappa.d_at(p).comps);
    return lam - correction;
}

inline Covector d_one_minus_kappa_f(const sector::SectorModel& model, const Kappa& kappa,
                                    const Point& p) {
    return Covector((1.0 - kappa.value(p)) * model.df_at(p).comps -
                    model.f_at(p) * kappa.d_at(p).comps);
}

class EndProfile {
public:
    EndProfile(const sector::SectorModel& model, const smoothing::Smoother& phi)
        : model_(&model), phi_(&phi) {
        if (phi.k() != model.k() + 1)
            throw construction_error("EndProfile: smoother arity must be k + 1");
    }

    const sector::SectorModel& model() const { return *model_; }
    const smoothing::Smoother& phi() const { return *phi_; }

    /// Smoother arguments (R_1, ..., R_k, e^{-s}) at p.
    Vec args(const Point& p, double* s_out = nullptr) const {
        const double s = model_->radial_s_at(p);
        Vec a(model_->k() + 1);
        for (int i = 0; i < model_->k(); ++i) a[i] = p[model_->idxR(i)];
        a[model_->k()] = std::exp(-s);
        if (s_out) *s_out = s;
        return a;
    }

    double value(const Point& p) const {
        double s = 0.0;
        const Vec a = args(p, &s);
        const int lin = phi_->linear_index(a);
        if (lin == model_->k()) return s;                       // s-linear region, bitwise
        if (lin >= 0) return -std::log(p[model_->idxR(lin)]);   // mu-linear region
        const double v = phi_->value(a);
        if (!(v > 0.0))
            throw domain_error("s_phi: phi(R, e^-s) <= 0 (inside the cut-out corner)");
        return -std::log(v);
    }

    /// Analytic gradient via the chain rule through the rotation and the
    /// radial function.
    Covector gradient(const Point& p) const {
        double s = 0.0;
        const Vec a = args(p, &s);
        const double v = phi_->value(a);
        if (!(v > 0.0)) throw domain_error("grad s_phi: phi <= 0");
        const Covector dphi = phi_->gradient(a);
        const Covector ds = model_->ds_at(p);
        Vec g = Vec::Zero(model_->dim());
        for (int i = 0; i < model_->k(); ++i) g[model_->idxR(i)] = -dphi.comps[i] / v;
        const double w = dphi.comps[model_->k()] * a[model_->k()] / v;  // d(e^-s) factor
        g += w * ds.comps;
        return Covector(g);
    }

private:
    const sector::SectorModel* model_;
    const smoothing::Smoother* phi_;
};

inline double s_phi_at(const EndProfile& ep, const Point& p) { return ep.value(p); }
inline Covector grad_s_phi(const EndProfile& ep, const Point& p) { return ep.gradient(p); }

struct LevelPoint {
    Point p;
    double grad_norm = 0.0;
};

struct LevelReport {
    double level = 0.0;
    int requested = 0;
    std::vector<LevelPoint> points;
    double min_grad_norm = 0.0;
    double min_R = 0.0, max_R = 0.0, max_abs_I = 0.0;
    bool empty() const { return points.empty(); }
};

/// Root-find points on {s_phi = r} by shooting rays from a low-level anchor
/// in the (R, I) chart of the first pair, and report the smallest gradient
/// norm found (regularity certificate) together with coordinate bounds.
inline LevelReport check_level_regularity(const EndProfile& ep, double r, int n_samples,
                                          const Point& anchor) {
    if (!(r > 0.0)) throw domain_error("check_level_regularity: level must be positive");
    const auto& model = ep.model();
    LevelReport rep;
    rep.level = r;
    rep.requested = n_samples;
    rep.min_grad_norm = std::numeric_limits<double>::infinity();
    rep.min_R = std::numeric_limits<double>::infinity();

    auto value_or_nan = [&](const Point& q) {
        try {
            return ep.value(q);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    const double v0 = value_or_nan(anchor);
    if (!(v0 < r)) return rep;  // anchor must sit below the level

    const int iR = model.idxR(0), iI = model.idxI(0);
    for (int dir = 0; dir < n_samples; ++dir) {
        const double theta = 2.0 * M_PI * (dir + 0.5) / n_samples;
        const double cR = std::cos(theta), cI = std::sin(theta);
        // Walk outward until the level is bracketed, then bisect. Steps never
        // cover more than a fraction of the remaining distance to the R = 0
        // wall, so thin shells near the boundary are not skipped.
        double t_lo = 0.0, t_hi = 0.0;
        bool bracketed = false;
        const double t_max = 40.0;
        double prev_t = 0.0, t = 0.02;
        for (int step = 0; step < 400 && t <= t_max; ++step) {
            Point q = anchor;
            q[iR] += t * cR;
            q[iI] += t * cI;
            if (q[iR] <= 1e-12) break;
            const double v = value_or_nan(q);
            if (std::isnan(v)) break;
            if (v >= r) {
                t_lo = prev_t;
                t_hi = t;
                bracketed = true;
                break;
            }
            prev_t = t;
            double next = t * 1.3;
            if (cR < 0.0) next = std::min(next, t + 0.45 * q[iR] / (-cR));
            t = next;
        }
        if (!bracketed) continue;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (t_lo + t_hi);
            Point q = anchor;
            q[iR] += mid * cR;
            q[iI] += mid * cI;
            const double v = value_or_nan(q);
            if (std::isnan(v) || v >= r)
                t_hi = mid;
            else
                t_lo = mid;
        }
        Point q = anchor;
        q[iR] += t_hi * cR;
        q[iI] += t_hi * cI;
        const double v = value_or_nan(q);
        if (std::isnan(v) || std::abs(v - r) > 1e-6) continue;
        LevelPoint lp;
        lp.p = q;
        lp.grad_norm = ep.gradient(q).norm();
        rep.points.push_back(lp);
        rep.min_grad_norm = std::min(rep.min_grad_norm, lp.grad_norm);
        rep.min_R = std::min(rep.min_R, q[iR]);
        rep.max_R = std::max(rep.max_R, q[iR]);
        rep.max_abs_I = std::max(rep.max_abs_I, std::abs(q[iI]));
    }
    return rep;
}

inline void write_level_csv(const std::string& path, const std::vector<LevelReport>& reports,
                            const sector::SectorModel& model) {
    std::ofstream os(path);
    os << std::setprecision(17);
    os << "level";
    for (int i = 0; i < model.dim(); ++i) os << ",x" << i;
    os << ",grad_norm\n";
    for (const auto& rep : reports) {
        for (const auto& lp : rep.points) {
            os << rep.level;
            for (int i = 0; i < model.dim(); ++i) os << "," << lp.p[i];
            os << "," << lp.grad_norm << "\n";
        }
    }
}

}  // namespace seclab::profile
