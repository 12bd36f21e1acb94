#pragma once

// Pointwise construction of the almost complex structures dual to the end
// profile: -d s_phi . J = lambda_kappa on the certified corner neighborhood.
//
// All data lives on the cotangent fiber. The component matrix acts per
// C-pair through the block [[a, c], [b, d]] and on the fiber block through A,
// with M(dR) = eta_u + a dR + b dI and M(dI) = eta_v + c dR + d dI; then
// G^2 = -1 forces a^2 + bc = -1, d = -a and eta_v = -(A + a) eta_u / b.
// The duality equations determine (a, b, c, d) uniquely in closed form (the
// constraint is linear in a after elimination), solvable exactly when the
// pair block of d s_phi is not parallel to the pair block of lambda_kappa;
// the sign of that determinant also decides whether the solved structure is
// tame or anti-tame, which is what delimits the certified region.

#include "seclab/end_profile.hpp"
#include "seclab/moser.hpp"
#include "seclab/numerics.hpp"
#include "seclab/sector.hpp"
#include "seclab/types.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace seclab::acs {

struct PairBlock {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

/// Solve [a c; b d] (u1, u2)^T = (w1, w2)^T subject to a^2 + bc = -1, d = -a.
/// The solution is unique; it fails exactly on span{u}.
inline PairBlock solve_ab(double u1, double u2, double w1, double w2) {
    const double scale = std::sqrt((u1 * u1 + u2 * u2) * (w1 * w1 + w2 * w2));
    if (u1 == 0.0 && u2 == 0.0)
        throw degeneracy_error("solve_ab: zero pair block of d s_phi");
    const double den = u2 * w1 - u1 * w2;
    if (std::abs(den) <= 1e-14 * (scale + 1e-300))
        throw degeneracy_error("solve_ab: target lies in the excluded span of the pair block");
    PairBlock blk;
    if (u1 != 0.0 && u2 != 0.0) {
        blk.a = -(u1 * u2 + w1 * w2) / den;
        blk.b = (w2 + blk.a * u2) / u1;
        blk.c = (w1 - blk.a * u1) / u2;
        // Re-derive the smaller of (b, c) from the quadratic constraint so
        // G^2 = -1 holds to rounding even when the block is large.
        if (std::abs(blk.b) >= std::abs(blk.c))
            blk.c = -(1.0 + blk.a * blk.a) / blk.b;
        else
            blk.b = -(1.0 + blk.a * blk.a) / blk.c;
    } else if (u2 == 0.0) {
        blk.a = w1 / u1;
        blk.b = w2 / u1;
        blk.c = -(1.0 + blk.a * blk.a) / blk.b;
    } else {  // u1 == 0
        blk.a = -w2 / u2;
        blk.c = w1 / u2;
        blk.b = -(1.0 + blk.a * blk.a) / blk.c;
    }
    blk.d = -blk.a;
    return blk;
}

/// Block data for one C-pair over a fiber block.
struct BlockACS {
    Mat A;          // fiber x fiber (possibly 0 x 0)
    Vec eta_u, eta_v;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    int fiber_dim() const { return static_cast<int>(A.rows()); }

    /// Full component matrix [[A, eta_u, eta_v], [0, a, c], [0, b, d]].
    Mat matrix() const {
        const int nf = fiber_dim();
        Mat m = Mat::Zero(nf + 2, nf + 2);
        m.topLeftCorner(nf, nf) = A;
        if (nf > 0) {
            m.block(0, nf, nf, 1) = eta_u;
            m.block(0, nf + 1, nf, 1) = eta_v;
        }
        m(nf, nf) = a;
        m(nf, nf + 1) = c;
        m(nf + 1, nf) = b;
        m(nf + 1, nf + 1) = d;
        return m;
    }

    double square_defect() const {
        const Mat m = matrix();
        return (m * m + Mat::Identity(m.rows(), m.cols())).operatorNorm();
    }
};

/// Completion of (A, eta_u, a, b) to a square root of -1: the remaining data
/// is forced.
inline BlockACS complete_block(const Mat& A, const Vec& eta_u, double a, double b) {
    if (b == 0.0)
        throw construction_error("complete_block: b must be a non-zero real number");
    BlockACS blk;
    blk.A = A;
    blk.eta_u = eta_u;
    blk.a = a;
    blk.b = b;
    blk.c = -(1.0 + a * a) / b;
    blk.d = -a;
    const int nf = static_cast<int>(A.rows());
    if (nf > 0) {
        blk.eta_v = -(A + a * Mat::Identity(nf, nf)) * eta_u / b;
    } else {
        blk.eta_u = Vec::Zero(0);
        blk.eta_v = Vec::Zero(0);
    }
    if (blk.square_defect() > 1e-10)
        throw construction_error("complete_block: completed block fails G^2 = -1");
    return blk;
}

/// Solve u1 eta_u + u2 eta_v = target under eta_v = -(A + a) eta_u / b.
inline std::pair<Vec, Vec> solve_etas(const Mat& A, double a, double b, double u1, double u2,
                                      const Vec& target) {
    const int nf = static_cast<int>(A.rows());
    if (nf == 0) return {Vec::Zero(0), Vec::Zero(0)};
    if (u1 == 0.0 && u2 == 0.0) throw degeneracy_error("solve_etas: zero pair block");
    const Mat op = u1 * Mat::Identity(nf, nf) - (u2 / b) * (A + a * Mat::Identity(nf, nf));
    const Vec eta_u = op.partialPivLu().solve(target);
    if ((op * eta_u - target).norm() > 1e-10 * (1.0 + target.norm()))
        throw degeneracy_error("solve_etas: fiber system solve failed");
    const Vec eta_v = -(A + a * Mat::Identity(nf, nf)) * eta_u / b;
    return {eta_u, eta_v};
}

/// Compatible (hence tame) almost complex structure from a symplectic matrix
/// and an SPD metric via the polar construction; used for the reference
/// extension outside the certified region.
inline Mat compatible_from_metric(const Mat& omega, const Mat& metric) {
    const Eigen::LLT<Mat> llt(metric);
    const Mat L = llt.matrixL();
    const Mat C = L.inverse() * omega * L.transpose().inverse();  // skew
    const Mat S = -C * C;                                         // SPD
    Eigen::SelfAdjointEigenSolver<Mat> es(S);
    const Mat Sinvhalf =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        es.eigenvectors().transpose();
    const Mat Jc = -C * Sinvhalf;
    // Tangent structure; return its cotangent component matrix (transpose).
    const Mat Jt = L.transpose().inverse() * Jc * L.transpose();
    return Jt.transpose();
}

struct Assembly {
    Mat J;                 // cotangent component matrix
    double duality_residual = 0.0;
    double square_defect = 0.0;
    std::vector<double> D;  // per-pair determinant
    bool certified = false;
};

/// Almost complex structure field adapted to an end profile and cut-off.
class ACSField {
public:
    ACSField(const profile::EndProfile& ep, const profile::Kappa& kappa)
        : ep_(&ep), kappa_(&kappa), model_(&ep.model()) {
        const auto& P = ep.phi().pair_profile();
        lobeA_R_cap_ = std::sqrt(2.0) * P.Y0();
        N2_ = model_->ledger().N2();
        wd_ = ep.phi().width();
        ht_ = ep.phi().height();
        omega_ = model_->omega().mat;
        reference_ = compatible_from_metric(omega_, Mat::Identity(model_->dim(), model_->dim()));
    }

    const sector::SectorModel& model() const { return *model_; }
    const profile::EndProfile& end_profile() const { return *ep_; }

    /// Pair components of d phi (unnormalized u vector) for pair i.
    std::pair<double, double> u_vector_at(const Point& p, int pair = 0) const {
        double s = 0.0;
        const Vec args = ep_->args(p, &s);
        const Covector dphi = ep_->phi().gradient(args);
        const Covector ds = model_->ds_at(p);
        const double w = dphi.comps[model_->k()] * args[model_->k()];
        const double u1 = dphi.comps[pair] - w * ds.comps[model_->idxR(pair)];
        const double u2 = -w * ds.comps[model_->idxI(pair)];
        if (u1 == 0.0 && u2 == 0.0)
            throw degeneracy_error("u_vector_at: vanishing pair differential");
        return {u1, u2};
    }

    /// Determinant deciding solvability and tameness of the pair block. It is
    /// strictly negative on the certified region.
    double det_D_at(const Point& p, int pair = 0) const {
        const auto [u1, u2] = u_vector_at(p, pair);
        return (1.0 - model_->alpha()) * p[model_->idxR(pair)] * u1 +
               model_->alpha() * p[model_->idxI(pair)] * u2;
    }

    /// Pair scalars of the duality solve (cheap, no fiber work).
    PairBlock pair_block_at(const Point& p, int pair) const {
        double s = 0.0;
        const Vec args = ep_->args(p, &s);
        const double phi_val = ep_->phi().value(args);
        const Covector lam_kappa = profile::lambda_kappa_at(*model_, *kappa_, p);
        const auto [u1, u2] = u_vector_at(p, pair);
        return solve_ab(u1, u2, phi_val * lam_kappa.comps[model_->idxR(pair)],
                        phi_val * lam_kappa.comps[model_->idxI(pair)]);
    }

    /// Membership in the certified corner neighborhood: the union of the deep
    /// hyperbola lobe and the pure contact lobe on the R >= e^{-s} side, with
    /// negative pair determinants and a conditioning cap. The cap is honest
    /// geometry: the dual structure's norm grows like e^s toward infinity and
    /// like 1/phi toward the cut-out core, and the certified tolerances are
    /// only meaningful while G^2 + 1 stays at rounding level.
    bool in_certified_region(const Point& p) const {
        double s = 0.0;
        Vec args;
        try {
            args = ep_->args(p, &s);
        } catch (const std::exception&) {
            return false;
        }
        const double es = args[model_->k()];
        double Rmin = 1e300, Rmax = 0.0;
        for (int i = 0; i < model_->k(); ++i) {
            Rmin = std::min(Rmin, args[i]);
            Rmax = std::max(Rmax, args[i]);
        }
        const bool lobeA = s >= N2_ && es <= Rmin && Rmax <= lobeA_R_cap_;
        const bool lobeB = es <= wd_ && Rmin >= ht_;
        if (!lobeA && !lobeB) return false;
        if (!(ep_->phi().value(args) > 0.0)) return false;
        try {
            for (int i = 0; i < model_->k(); ++i) {
                if (!(det_D_at(p, i) < 0.0)) return false;
                const PairBlock blk = pair_block_at(p, i);
                if (std::abs(blk.a) + std::abs(blk.b) + std::abs(blk.c) > norm_cap_) return false;
            }
            if (model_->fiber() == sector::Fiber::plane) {
                const double d_last = ep_->phi().gradient(args).comps[model_->k()];
                if (!(d_last > 0.0)) return false;
            }
        } catch (const degeneracy_error&) {
            return false;
        } catch (const region_error&) {
            return false;
        }
        return true;
    }

    /// Fiber block (plane fiber): A acts on span{d s_F, lambda_F} = T*F by a
    /// scaled rotation fixed by A w_F = phi lambda_F.
    Mat fiber_A_at(const Point& p) const {
        if (model_->fiber() != sector::Fiber::plane)
            throw domain_error("fiber_A_at: point fiber has no fiber block");
        double s = 0.0;
        const Vec args = ep_->args(p, &s);
        const double phi_val = ep_->phi().value(args);
        const double d_last = ep_->phi().gradient(args).comps[model_->k()];
        if (!(d_last > 0.0))
            throw region_error("fiber_A_at: vanishing last partial outside the duality region");
        const double beta = model_->ledger().beta;
        if (!(beta > 0.0)) throw region_error("fiber_A_at: beta = 0 has no fiber radial part");
        const double rhat = phi_val * std::exp(s) / (beta * d_last);

        const double x = p[0], y = p[1];
        const double h = model_->h_F(p);
        if (h < 1e-12) throw domain_error("fiber_A_at: fiber origin is degenerate");
        Vec sigma(2), ell(2);
        sigma << x / h, y / h;   // d s_F
        ell << -0.5 * y, 0.5 * x;  // lambda_F
        Mat frame(2, 2), images(2, 2);
        frame.col(0) = sigma;
        frame.col(1) = ell;
        images.col(0) = -rhat * ell;
        images.col(1) = sigma / rhat;
        return images * frame.inverse();
    }

    /// The scalar r as stated for the fiber equations (negative by its
    /// convention); rhat = -r / beta is the positive scale actually used.
    double fiber_r_at(const Point& p) const {
        double s = 0.0;
        const Vec args = ep_->args(p, &s);
        const double phi_val = ep_->phi().value(args);
        const double d_last = ep_->phi().gradient(args).comps[model_->k()];
        if (!(d_last > 0.0)) throw region_error("fiber_r_at: vanishing last partial");
        return -std::exp(s) * phi_val / d_last;
    }

    /// Assemble the duality structure at p (throws outside the solvable set).
    Assembly assemble(const Point& p) const {
        const int n = model_->dim(), nf = model_->fiber_dim(), k = model_->k();
        double s = 0.0;
        const Vec args = ep_->args(p, &s);
        const double phi_val = ep_->phi().value(args);
        if (!(phi_val > 0.0)) throw domain_error("assemble: phi <= 0");
        const Covector lam_kappa = profile::lambda_kappa_at(*model_, *kappa_, p);

        Assembly out;
        out.J = Mat::Zero(n, n);
        for (int i = 0; i < k; ++i) {
            const auto [u1, u2] = u_vector_at(p, i);
            const double w1 = phi_val * lam_kappa.comps[model_->idxR(i)];
            const double w2 = phi_val * lam_kappa.comps[model_->idxI(i)];
            const PairBlock blk = solve_ab(u1, u2, w1, w2);
            out.J(model_->idxR(i), model_->idxR(i)) = blk.a;
            out.J(model_->idxR(i), model_->idxI(i)) = blk.c;
            out.J(model_->idxI(i), model_->idxR(i)) = blk.b;
            out.J(model_->idxI(i), model_->idxI(i)) = blk.d;
            out.D.push_back(det_D_at(p, i));
        }
        if (nf > 0) {
            out.J.topLeftCorner(nf, nf) = fiber_A_at(p);
            // The fiber part of d(kappa f) vanishes identically for these
            // models (kappa f == 0), so the eta covectors are zero; a nonzero
            // fiber target would be solved through solve_etas.
        }

        // Duality residual: M(d s_phi) = -lambda_kappa.
        const Covector ds_phi = ep_->gradient(p);
        out.duality_residual = (out.J * ds_phi.comps + lam_kappa.comps).norm();
        Mat sq = out.J * out.J + Mat::Identity(n, n);
        out.square_defect = sq.operatorNorm();
        out.certified = in_certified_region(p);
        return out;
    }

    /// Field evaluation: the duality structure on the certified region, the
    /// fixed compatible reference outside, blended over a collar through the
    /// metric polar construction (tameness survives the blend; duality is
    /// only claimed on the certified region).
    Mat J_at(const Point& p) const {
        const bool inside = in_certified_region(p);
        if (inside) return assemble(p).J;
        std::optional<Mat> dual;
        try {
            Assembly a = assemble(p);
            bool all_neg = true;
            for (double d : a.D) all_neg = all_neg && d < 0.0;
            if (all_neg && a.square_defect < 1e-8) dual = a.J;
        } catch (const std::exception&) {
        }
        if (!dual) return reference_;
        // Collar weight from the distance to the certified lobes in the
        // profile arguments, normalized by the lobe width.
        double sdum = 0.0;
        const Vec args = ep_->args(p, &sdum);
        const double es = args[model_->k()];
        double dist = 0.0;
        for (int i = 0; i < model_->k(); ++i) {
            dist = std::max(dist, (args[i] - lobeA_R_cap_) / lobeA_R_cap_);
            dist = std::max(dist, (es - args[i]) / std::max(es, 1e-12));
        }
        const sector::Smoothstep step{0.0, 1.0};
        const double w = 1.0 - step.value(std::clamp(dist, 0.0, 1.0));
        if (w <= 0.0) return reference_;
        if (w >= 1.0) return *dual;
        const Mat g_dual = metric_of(*dual);
        const Mat g_ref = metric_of(reference_);
        return compatible_from_metric(omega_, (1.0 - w) * g_ref + w * g_dual);
    }

    /// Tangent-space matrix paired with the stored cotangent action.
    Mat tangent_of(const Mat& cotangent_J) const { return cotangent_J.transpose(); }

    /// Symmetrized metric omega(., J .) of a tame structure.
    Mat metric_of(const Mat& cotangent_J) const {
        const Mat Jt = tangent_of(cotangent_J);
        const Mat g = omega_ * Jt;
        return 0.5 * (g + g.transpose());
    }

    /// Minimum of eta(v, J v) over random unit tangent directions.
    double pinching_lower_bound(const TwoForm& eta, const Mat& cotangent_J, int samples,
                                std::mt19937_64& rng) const {
        const Mat Jt = tangent_of(cotangent_J);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double lo = std::numeric_limits<double>::infinity();
        for (int i = 0; i < samples; ++i) {
            Vec v(model_->dim());
            for (int d = 0; d < model_->dim(); ++d) v[d] = gauss(rng);
            v.normalize();
            lo = std::min(lo, eta(v, Jt * v));
        }
        return lo;
    }

    /// Levi form -d(d s_phi . J) assembled by finite differences of the
    /// one-form field q -> (d s_phi . J)(q).
    TwoForm levi_form_at(const Point& p, double h = 1e-5) const {
        num::OneFormField theta = [this](const Point& q) {
            const Covector ds_phi = ep_->gradient(q);
            return Covector(Vec(-(assemble(q).J * ds_phi.comps)));
        };
        return num::fd_two_form(theta, p, h, model_->chart_domain());
    }

    /// Pulled-back structure (dPsi)^{-1} J(Psi_1(p)) dPsi, acting on tangent
    /// vectors; returned as the matching cotangent component matrix.
    Mat pullback_J_at(const moser::FlowMap& fm, const Point& p, int steps = 0,
                      double h = 3e-6) const {
        num::PointMap map = [&](const Point& q) { return fm.flow(q, 1.0, steps); };
        const Point image = map(p);
        const LinearMap dpsi = num::fd_jacobian(map, p, h, model_->chart_domain());
        Eigen::PartialPivLU<Mat> lu(dpsi.mat);
        if (!(lu.rcond() > 1e-12)) throw degeneracy_error("pullback_J_at: near-singular dPsi");
        const Mat Jt_image = tangent_of(J_at(image));
        const Mat Jt = lu.solve(Jt_image * dpsi.mat);
        return Jt.transpose();
    }

private:
    const profile::EndProfile* ep_;
    const profile::Kappa* kappa_;
    const sector::SectorModel* model_;
    double lobeA_R_cap_ = 0.0, N2_ = 0.0, wd_ = 0.0, ht_ = 0.0;
    double norm_cap_ = 1e5;
    Mat omega_;
    Mat reference_;
};

/// Residual of the convex-interpolation identity
///   -d(dG . J) = sum_ij phi_ij (dg_j . J) ^ dg_i + sum_i phi_i (-d(dg_i . J))
/// with G = phi(g_1, ..., g_m), everything assembled by finite differences.
struct ConvexInterpProblem {
    std::function<double(const Vec&)> phi;
    std::function<Vec(const Vec&)> grad_phi;
    std::function<Mat(const Vec&)> hess_phi;
    std::vector<num::ScalarField> g;
    std::function<Mat(const Point&)> J;  // cotangent matrix field
};

inline double convex_interp_check(const ConvexInterpProblem& prob, const Point& p,
                                  double h = 1e-4) {
    const int m = static_cast<int>(prob.g.size());
    const int n = p.dim();

    auto gvals = [&](const Point& q) {
        Vec v(m);
        for (int i = 0; i < m; ++i) v[i] = prob.g[i](q);
        return v;
    };
    num::OneFormField dG_J = [&](const Point& q) {
        const Vec gv = gvals(q);
        const Vec w = prob.grad_phi(gv);
        Vec dG = Vec::Zero(n);
        for (int i = 0; i < m; ++i) dG += w[i] * num::fd_gradient(prob.g[i], q, h).comps;
        return Covector(Vec(prob.J(q) * dG));
    };
    const Mat lhs = -num::fd_two_form(dG_J, p, h).mat;

    const Vec gv = gvals(p);
    const Mat H = prob.hess_phi(gv);
    const Vec w = prob.grad_phi(gv);
    Mat rhs = Mat::Zero(n, n);
    std::vector<Vec> dg(m), dgJ(m);
    for (int i = 0; i < m; ++i) {
        dg[i] = num::fd_gradient(prob.g[i], p, h).comps;
        dgJ[i] = prob.J(p) * dg[i];
    }
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            rhs += H(j, i) * (dgJ[j] * dg[i].transpose() - dg[i] * dgJ[j].transpose());
    for (int i = 0; i < m; ++i) {
        num::OneFormField dgi_J = [&, i](const Point& q) {
            return Covector(Vec(prob.J(q) * num::fd_gradient(prob.g[i], q, h).comps));
        };
        rhs += w[i] * (-num::fd_two_form(dgi_J, p, h).mat);
    }
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace seclab::acs
