#pragma once

// Model Lagrangians that are invariant under the Liouville field outside a
// compact cap: a radial line through the fiber origin (plane fiber) times a
// pair of Z_C orbit rays in the (R, I) half plane, joined by a Hermite cap
// kept away from {R = 0}. A deliberately tilted line is provided as the
// negative control for the boundary identity.

#include "seclab/sector.hpp"
#include "seclab/types.hpp"

#include <cmath>
#include <vector>

namespace seclab::floer {

struct LagrangianSample {
    Point p;
    std::vector<Vec> tangent;  // basis of T_p L
    bool on_ray = false;       // Z-invariant locus
};

class SectorialLagrangian {
public:
    /// Orbit rays through (R_join, +- I_join), optional cap, fiber line at
    /// angle theta0 for plane-fiber models.
    SectorialLagrangian(const sector::SectorModel& model, double R_join, double I_join,
                        bool with_cap, double theta0 = 0.3)
        : model_(&model), R_join_(R_join), I_join_(I_join), with_cap_(with_cap), theta0_(theta0) {
        if (!(R_join > 0.0) || !(I_join > 0.0))
            throw construction_error("SectorialLagrangian: join point must have R, I > 0");
    }

    const sector::SectorModel& model() const { return *model_; }
    bool with_cap() const { return with_cap_; }

    /// Curve point in the (R, I) chart: |u| >= 1 are the orbit rays
    /// (parameter t = |u| - 1), |u| < 1 the Hermite cap.
    void curve(double u, double& R, double& I, double& dR, double& dI) const {
        const double alpha = model_->alpha();
        if (std::abs(u) >= 1.0) {
            const double t = std::abs(u) - 1.0;
            const double sgn = u >= 0.0 ? 1.0 : -1.0;
            R = R_join_ * std::exp((1.0 - alpha) * t);
            I = sgn * I_join_ * std::exp(alpha * t);
            // d/du along increasing u: the Z_C direction, mirrored below.
            dR = sgn * (1.0 - alpha) * R;
            dI = sgn * alpha * I;
            return;
        }
        if (!with_cap_) throw domain_error("SectorialLagrangian: no cap on this model");
        // Cubic Hermite from (R_join, -I_join) to (R_join, +I_join) with the
        // inward orbit tangents; stays at R >= R_min by construction for the
        // shipped parameters (verified by sampling in z_level callers).
        const double t = 0.5 * (u + 1.0);  // 0..1
        const double m = 2.0;              // tangent scale
        const double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        const double h10 = t * (1.0 - t) * (1.0 - t);
        const double h01 = t * t * (3.0 - 2.0 * t);
        const double h11 = t * t * (t - 1.0);
        const double TR0 = m * (1.0 - alpha) * R_join_, TI0 = m * alpha * I_join_;
        R = h00 * R_join_ + h10 * TR0 + h01 * R_join_ + h11 * (-TR0);
        I = h00 * (-I_join_) + h10 * TI0 + h01 * I_join_ + h11 * TI0;
        const double d00 = 6.0 * t * (t - 1.0);
        const double d10 = (1.0 - t) * (1.0 - 3.0 * t);
        const double d01 = -d00;
        const double d11 = t * (3.0 * t - 2.0);
        dR = 0.5 * (d00 * R_join_ + d10 * TR0 + d01 * R_join_ + d11 * (-TR0));
        dI = 0.5 * (d00 * (-I_join_) + d10 * TI0 + d01 * I_join_ + d11 * TI0);
    }

    LagrangianSample sample(double u, double fiber_r = 1.0) const {
        LagrangianSample out;
        out.on_ray = std::abs(u) >= 1.0;
        out.p = Point::zero(model_->dim());
        double R, I, dR, dI;
        curve(u, R, I, dR, dI);
        out.p[model_->idxR(0)] = R;
        out.p[model_->idxI(0)] = I;
        Vec vc = Vec::Zero(model_->dim());
        vc[model_->idxR(0)] = dR;
        vc[model_->idxI(0)] = dI;
        out.tangent.push_back(vc);
        if (model_->fiber() == sector::Fiber::plane) {
            out.p[0] = fiber_r * std::cos(theta0_);
            out.p[1] = fiber_r * std::sin(theta0_);
            Vec vf = Vec::Zero(model_->dim());
            vf[0] = std::cos(theta0_);
            vf[1] = std::sin(theta0_);
            out.tangent.push_back(vf);
        }
        return out;
    }

private:
    const sector::SectorModel* model_;
    double R_join_, I_join_;
    bool with_cap_;
    double theta0_;
};

/// Straight line {I = R + offset} -- not Z-invariant; the boundary identity
/// must fail on it.
inline LagrangianSample tilted_line_sample(const sector::SectorModel& model, double R,
                                           double offset) {
    LagrangianSample out;
    out.on_ray = true;
    out.p = Point::zero(model.dim());
    out.p[model.idxR(0)] = R;
    out.p[model.idxI(0)] = R + offset;
    Vec v = Vec::Zero(model.dim());
    v[model.idxR(0)] = 1.0 / std::sqrt(2.0);
    v[model.idxI(0)] = 1.0 / std::sqrt(2.0);
    out.tangent.push_back(v);
    if (model.fiber() == sector::Fiber::plane) out.p[0] = 1.0;
    return out;
}

struct BoundaryReport {
    double max_tangency_residual = 0.0;  // Z against T_p L, ray locus
    double max_lambda_on_L = 0.0;        // |lambda(v)| over unit basis vectors
    int n_ray = 0;
    double cap_max_tangency = 0.0;       // informational
};

inline BoundaryReport lagrangian_boundary_check(const SectorialLagrangian& L,
                                                const sector::SectorModel& model, int n) {
    BoundaryReport rep;
    auto visit = [&](double u) {
        const LagrangianSample smp = L.sample(u);
        Mat basis(model.dim(), static_cast<int>(smp.tangent.size()));
        for (size_t j = 0; j < smp.tangent.size(); ++j)
            basis.col(static_cast<int>(j)) = smp.tangent[j].normalized();
        const Vec Z = model.liouville_Z_at(smp.p);
        const Vec proj = basis * (basis.transpose() * basis).ldlt().solve(basis.transpose() * Z);
        const double tangency = (Z - proj).norm();
        if (smp.on_ray) {
            rep.n_ray += 1;
            rep.max_tangency_residual = std::max(rep.max_tangency_residual, tangency);
            const Covector lam = model.lambda_at(smp.p);
            for (size_t j = 0; j < smp.tangent.size(); ++j)
                rep.max_lambda_on_L =
                    std::max(rep.max_lambda_on_L, std::abs(lam(smp.tangent[j].normalized())));
        } else {
            rep.cap_max_tangency = std::max(rep.cap_max_tangency, tangency);
        }
    };
    for (int i = 0; i < n; ++i) {
        const double t = 3.0 * (i + 0.5) / n;  // ray parameter
        visit(1.0 + t);
        visit(-1.0 - t);
        if (L.with_cap()) visit(-1.0 + 2.0 * (i + 0.5) / n);
    }
    return rep;
}

/// Largest radial value over the non-Z-invariant locus (the cap); for a pure
/// ray pair this is the radial value at the declared join.
inline double z_level(const SectorialLagrangian& L, const sector::SectorModel& model,
                      int samples = 200) {
    double level = -std::numeric_limits<double>::infinity();
    if (!L.with_cap()) {
        return model.radial_s_at(L.sample(1.0, 1.3).p);
    }
    for (int i = 0; i <= samples; ++i) {
        const double u = -1.0 + 2.0 * i / samples;
        try {
            level = std::max(level, model.radial_s_at(L.sample(u, 1.3).p));
        } catch (const region_error&) {
            // cap points inside the excluded box carry no radial value
        }
    }
    return level;
}

/// Distance proxy to the boundary: the smallest R over the sampled curve.
inline double dist_to_boundary(const SectorialLagrangian& L, const sector::SectorModel& model,
                               int samples = 400) {
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= samples; ++i) {
        const double u = -4.0 + 8.0 * i / samples;
        if (std::abs(u) < 1.0 && !L.with_cap()) continue;
        mn = std::min(mn, L.sample(u).p[model.idxR(0)]);
    }
    return mn;
}

}  // namespace seclab::floer
