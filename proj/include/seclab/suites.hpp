#pragma once

// Verification sweeps over a configured model: each suite evaluates one
// family of invariants at the stated tolerances and reports worst margins.
// All randomness comes from the caller's generator, in a fixed order, so a
// fixed seed reproduces reports byte for byte.

#include "seclab/acs.hpp"
#include "seclab/end_profile.hpp"
#include "seclab/floer.hpp"
#include "seclab/lagrangian.hpp"
#include "seclab/moser.hpp"
#include "seclab/numerics.hpp"
#include "seclab/report.hpp"
#include "seclab/sector.hpp"
#include "seclab/smoother.hpp"
#include "seclab/types.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>

namespace seclab::suites {

inline double solve_T0(double eps0, double eps) {
    return 1.05 * (1.25 * eps0) / (2.0 * std::sqrt(eps));
}

/// Everything the sweeps need, owned together so lifetimes are simple.
struct Context {
    sector::SectorModel model;
    smoothing::Smoother phi;
    profile::Kappa kappa;
    profile::EndProfile ep;
    acs::ACSField field;
    moser::MoserField mf;
    moser::FlowMap fm;

    explicit Context(sector::SectorModel m)
        : model(std::move(m)),
          phi(model.k() + 1, model.ledger().eps1, model.ledger().T0),
          kappa(model, phi),
          ep(model, phi),
          field(ep, kappa),
          mf(model, kappa, +1),
          fm(mf, 1000) {}
};

// ---- on-manifold samplers ---------------------------------------------------

/// Chart point with prescribed (R_i) and radial value s; |I_1| solves the
/// flow-time equation (share rho splits |I| across pairs for k = 2).
inline Point point_with_Rs(const sector::SectorModel& m, const std::vector<double>& R, double s,
                           double sign, double fiber_h, double share = 0.55) {
    const double alpha = m.alpha();
    Point p = Point::zero(m.dim());
    double sC = s;
    if (m.fiber() == sector::Fiber::plane) {
        p[0] = std::sqrt(2.0 * fiber_h);
        p[1] = 0.0;
        const double beta = m.ledger().beta;
        sC = (s - beta * std::log(fiber_h)) / (1.0 - beta);
    }
    double A = 0.0;
    for (int i = 0; i < m.k(); ++i) {
        p[m.idxR(i)] = R[i];
        A += 0.5 * (1.0 - alpha) * R[i] * R[i];
    }
    const double B = (1.0 - A * std::exp(-2.0 * (1.0 - alpha) * sC)) * std::exp(2.0 * alpha * sC);
    if (!(B > 0.0)) throw domain_error("point_with_Rs: infeasible radial target");
    if (m.k() == 1) {
        p[m.idxI(0)] = sign * std::sqrt(2.0 * B / alpha);
    } else {
        p[m.idxI(0)] = sign * std::sqrt(2.0 * B * share / alpha);
        p[m.idxI(1)] = -sign * std::sqrt(2.0 * B * (1.0 - share) / alpha);
    }
    return p;
}

/// Random point of the certified corner neighborhood (deep lobe / contact lobe).
inline Point sample_certified(const Context& ctx, std::mt19937_64& rng, bool lobeB) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& led = ctx.model.ledger();
    const double Rcap = std::sqrt(2.0) * ctx.phi.pair_profile().Y0();
    for (int attempt = 0; attempt < 600; ++attempt) {
        double s;
        std::vector<double> R(ctx.model.k());
        if (lobeB) {
            s = -std::log(ctx.phi.width()) + 0.05 + 1.8 * u(rng);
            for (double& r : R) r = ctx.phi.height() + (1.5 * led.eps0 - ctx.phi.height()) * u(rng);
        } else {
            s = led.N2() + 0.02 + (5.9 - led.N2()) * u(rng);
            const double floor = std::max(std::exp(-s), 0.6 * led.eps1 * std::exp(s));
            if (floor > 0.95 * Rcap) continue;
            for (double& r : R) r = floor + (0.95 * Rcap - floor) * u(rng);
        }
        try {
            Point p = point_with_Rs(ctx.model, R, s, u(rng) > 0.5 ? 1.0 : -1.0,
                                    2.2 + 1.5 * u(rng), 0.35 + 0.3 * u(rng));
            if (ctx.field.in_certified_region(p)) return p;
        } catch (const std::exception&) {
        }
    }
    throw construction_error("sample_certified: sampler exhausted");
}

// ---- suites -----------------------------------------------------------------

inline SuiteReport run_validate(const Context& ctx, double tol_scale = 1.0) {
    (void)tol_scale;
    SuiteReport rep;
    rep.name = "validate";
    const sector::CheckReport cr = ctx.model.validate_constants(ctx.phi.width(), ctx.phi.height());
    for (const auto& item : cr.items) rep.add(item.name, item.pass, item.margin);
    return rep;
}

inline SuiteReport run_smoothing(double eps0, std::mt19937_64& rng, double ts = 1.0,
                                 const std::string& outdir = "") {
    SuiteReport rep;
    rep.name = "smooth";
    for (double eps : {1e-2, 1e-3}) {
        const double T0 = solve_T0(eps0, eps);
        smoothing::Smoother phi2 = smoothing::build_phi(2, eps, T0);
        smoothing::Smoother phi3 = smoothing::build_phi(3, eps, T0);
        const std::string tag = eps == 1e-2 ? "[1e-2] " : "[1e-3] ";

        // P1: gradient bounds on a 101 x 101 grid over [0, 4 ht]^2.
        double lo = 1e300, hi = -1e300;
        const double ext = 4.0 * phi2.height();
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                Vec x(2);
                x << ext * i / 100.0, ext * j / 100.0;
                const Covector g = phi2.gradient(x);
                lo = std::min({lo, g.comps[0], g.comps[1]});
                hi = std::max({hi, g.comps[0], g.comps[1]});
            }
        rep.add(tag + "P1 gradient bounds", lo >= -1e-9 * ts && hi <= 1.0 + 1e-9 * ts,
                std::min(lo, 1.0 - hi));

        // P2: superlevel convexity on random triples.
        std::uniform_real_distribution<double> u(0.0, ext);
        double worst2 = 1e300;
        for (int i = 0; i < 1000; ++i) {
            Vec a(2), b(2);
            a << u(rng), u(rng);
            b << u(rng), u(rng);
            const double c = std::min(phi2.value(a), phi2.value(b));
            worst2 = std::min(worst2, phi2.value(Vec(0.5 * (a + b))) - c);
        }
        rep.add(tag + "P2 superlevel convexity", worst2 >= -1e-9 * ts, worst2);

        // P3: weighted-derivative inequality on the on-domain half box.
        double worst3 = 1e300;
        const double x2max = 2.0 * std::sqrt(eps), x1max = 0.5 * eps0;
        for (int i = 0; i <= 120; ++i)
            for (int j = 0; j <= 120; ++j) {
                Vec x(2);
                x << x1max * i / 120.0, x2max * j / 120.0;
                if (x[1] > x[0] || phi2.value(x) <= 0.0) continue;
                const Covector g = phi2.gradient(x);
                worst3 = std::min(worst3, x[1] * g.comps[1] - x[0] * g.comps[0]);
            }
        rep.add(tag + "P3 box inequality", worst3 >= -1e-8 * ts, worst3);

        // P4: the profile clauses on 1e4 samples.
        smoothing::Profile1D f = smoothing::build_f_tilde(eps, T0);
        double min_fpp = 1e300, min_fp = 1e300, max_fp = -1e300, min_h = 1e300, min_hp = 1e300;
        double exact_dev = 0.0;
        const double window_end = 0.55 * f.exact_end();
        for (int i = 0; i <= 10000; ++i) {
            const double x = f.delta() + (1.2 * f.support_end() - f.delta()) * i / 10000.0;
            min_fpp = std::min(min_fpp, f.deriv2(x));
            min_fp = std::min(min_fp, f.deriv(x));
            max_fp = std::max(max_fp, f.deriv(x));
            if (x <= 2.0 * std::sqrt(eps)) exact_dev = std::max(exact_dev, std::abs(f.value(x) - 0.5 * eps / x));
            if (x <= window_end) {
                min_h = std::min(min_h, f.value(x) + x * f.deriv(x));
                min_hp = std::min(min_hp, 2.0 * f.deriv(x) + x * f.deriv2(x));
            }
        }
        rep.add(tag + "P4 clause 1 exact hyperbola", exact_dev == 0.0, exact_dev);
        rep.add(tag + "P4 clause 2 slope bounds", min_fp >= -1.0 && max_fp <= 0.0,
                std::min(min_fp + 1.0, -max_fp));
        rep.add(tag + "P4 clause 3+4 convexity", min_fpp >= -1e-9 * ts, min_fpp);
        rep.add(tag + "P4 clause 5 f + x f' (window)", min_h >= -1e-9 * ts, min_h);
        rep.add(tag + "P4 2f' + x f'' (window)", min_hp >= -1e-9 * ts, min_hp);

        // P5: restriction of the 3-smoother to deep faces.
        std::uniform_real_distribution<double> uw(0.0, 1.0);
        double worst5 = 0.0;
        for (int i = 0; i < 500; ++i) {
            Vec x2(2);
            x2 << uw(rng) * phi2.width(), uw(rng) * phi2.width();
            Vec x3(3);
            x3 << x2[0], x2[1], phi3.height() * (1.0 + uw(rng));
            worst5 = std::max(worst5, std::abs(phi3.value(x3) - phi2.value(x2)));
        }
        rep.add(tag + "P5 restriction compatibility", worst5 <= 1e-6 * ts, worst5);

        // Width/height book-keeping.
        const bool wh = phi2.width() == 0.25 * std::sqrt(eps) &&
                        phi2.height() == 2.0 * T0 * std::sqrt(eps);
        rep.add(tag + "width/height values", wh, phi2.height() / phi2.width() - 8.0 * T0);
    }
    if (!outdir.empty()) {
        const double T0 = solve_T0(eps0, 1e-3);
        smoothing::Smoother phi2 = smoothing::build_phi(2, 1e-3, T0);
        phi2.write_csv(outdir + "/smoother_phi2.csv", 41, 2.0 * phi2.height());
        phi2.write_level_svg(outdir + "/smoother_levels.svg",
                             {0.0, 0.02, 0.05, 0.1, 0.2, 0.4}, 1.6 * phi2.height());
    }
    return rep;
}

inline SuiteReport run_splitting(const Context& ctx, std::mt19937_64& rng, double ts = 1.0) {
    SuiteReport rep;
    rep.name = "splitting";
    std::uniform_real_distribution<double> uR(0.05, 1.4), uI(5.5, 14.0), cs(-1.0, 1.0);
    for (double alpha : {0.25, 0.5, 1.0}) {
        sector::ConstantsLedger led = ctx.model.ledger();
        led.beta = 0.0;
        sector::SectorModel m(alpha, 1, sector::Fiber::point, ctx.model.F0(), ctx.model.F0prime(),
                              0.0, led);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            Vec x(2);
            x << uR(rng), uI(rng) * (cs(rng) > 0 ? 1.0 : -1.0);
            Point p(x);
            const Vec Z = m.liouville_Z_at(p);
            worst = std::max(worst, std::abs(Z[0] - (1.0 - alpha) * p[0]));
            worst = std::max(worst, std::abs(Z[1] - alpha * p[1]));
            worst = std::max(worst, std::abs(m.ds_at(p)(Z) - 1.0));
            Covector dR = Covector::zero(2), dI = Covector::zero(2);
            dR.comps[0] = 1.0;
            dI.comps[1] = 1.0;
            worst = std::max(worst, std::abs(m.omega()(m.ham_vf(dR), m.ham_vf(dI)) - 1.0));
        }
        rep.add("alpha = " + std::to_string(alpha).substr(0, 4) + " identities", worst <= 1e-6 * ts,
                worst);
    }
    // The configured model itself (mixed radial function, bump included).
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> R(ctx.model.k());
        for (double& r : R) r = uR(rng);
        Point p = point_with_Rs(ctx.model, R, 3.0 + 3.0 * std::abs(cs(rng)), cs(rng) > 0 ? 1 : -1,
                                2.2 + std::abs(cs(rng)));
        const Vec Z = ctx.model.liouville_Z_at(p);
        worst = std::max(worst, std::abs(ctx.model.ds_at(p)(Z) - 1.0));
        if (!ctx.model.check_ZRZI(p).all_pass()) worst = std::max(worst, 1.0);
    }
    rep.add("configured model Z[s] and ZRZI", worst <= 1e-6 * ts, worst);
    return rep;
}

inline SuiteReport run_end_profile(const Context& ctx, std::mt19937_64& rng, double ts = 1.0,
                                   const std::string& outdir = "") {
    SuiteReport rep;
    rep.name = "profile";
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Exact region formulas, bitwise on the analytic path.
    double s_dev = 0.0, mu_dev = 0.0;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> R(ctx.model.k());
        for (double& r : R) r = ctx.phi.height() * (1.1 + 2.0 * u(rng));
        const double starget = -std::log(ctx.phi.width()) + 0.1 + 2.0 * u(rng);
        Point p = point_with_Rs(ctx.model, R, starget, u(rng) > 0.5 ? 1 : -1, 2.3);
        const double s = ctx.model.radial_s_at(p);
        if (ctx.ep.value(p) != s) s_dev = std::max(s_dev, std::abs(ctx.ep.value(p) - s) + 1.0);

        std::vector<double> Rmu(ctx.model.k());
        Rmu[0] = (0.2 + 0.7 * u(rng)) * ctx.phi.width();
        for (int j = 1; j < ctx.model.k(); ++j) Rmu[j] = ctx.phi.height() * (1.1 + u(rng));
        Point q = point_with_Rs(ctx.model, Rmu, -std::log(ctx.phi.height()) - 0.2 - u(rng),
                                u(rng) > 0.5 ? 1 : -1, 2.3);
        if (ctx.ep.value(q) != -std::log(q[ctx.model.idxR(0)]))
            mu_dev = std::max(mu_dev, 1.0);
    }
    rep.add("s-region formula bitwise", s_dev == 0.0, s_dev);
    rep.add("mu-region formula bitwise", mu_dev == 0.0, mu_dev);

    // Gradient versus finite differences through the interpolation zone.
    double grad_dev = 0.0;
    num::ScalarField f = [&](const Point& q) { return ctx.ep.value(q); };
    for (int i = 0; i < 200; ++i) {
        Point p = sample_certified(ctx, rng, i % 2 == 0);
        const Covector fd = num::fd_gradient(f, p, 3e-6, ctx.model.chart_domain());
        grad_dev = std::max(grad_dev, (fd.comps - ctx.ep.gradient(p).comps).norm());
    }
    rep.add("analytic gradient vs fd", grad_dev <= 1e-6 * ts, grad_dev);

    // Level regularity at r in {1, 3, 5}.
    Point anchor = Point::zero(ctx.model.dim());
    if (ctx.model.fiber() == sector::Fiber::plane) anchor[0] = std::sqrt(2.0 * 3.0);
    anchor[ctx.model.idxR(0)] = 1.2;
    for (int j = 1; j < ctx.model.k(); ++j) anchor[ctx.model.idxR(j)] = 1.2;
    std::vector<profile::LevelReport> levels;
    for (double r : {1.0, 3.0, 5.0}) {
        profile::LevelReport lr = profile::check_level_regularity(ctx.ep, r, 350, anchor);
        const bool ok = static_cast<int>(lr.points.size()) >= 300 && lr.min_grad_norm > 0.0;
        rep.add("level r = " + std::to_string(static_cast<int>(r)) + " regular", ok,
                lr.min_grad_norm);
        levels.push_back(std::move(lr));
    }
    // lambda_kappa correction is closed.
    num::OneFormField corr = [&](const Point& q) {
        return profile::d_one_minus_kappa_f(ctx.model, ctx.kappa, q);
    };
    double closed_dev = 0.0;
    std::uniform_real_distribution<double> ub(0.05, 2.0);
    for (int i = 0; i < 100; ++i) {
        Point p = Point::zero(ctx.model.dim());
        if (ctx.model.fiber() == sector::Fiber::plane) {
            p[0] = ub(rng);
            p[1] = ub(rng);
        }
        for (int j = 0; j < ctx.model.k(); ++j) {
            p[ctx.model.idxR(j)] = ub(rng);
            p[ctx.model.idxI(j)] = 3.0 * ub(rng);
        }
        closed_dev = std::max(closed_dev,
                              num::fd_two_form(corr, p, 2e-5, ctx.model.chart_domain())
                                  .mat.cwiseAbs()
                                  .maxCoeff());
    }
    rep.add("d(lambda_kappa - lambda) = 0", closed_dev <= 1e-6 * ts, closed_dev);

    if (!outdir.empty()) profile::write_level_csv(outdir + "/levels.csv", levels, ctx.model);
    return rep;
}

inline SuiteReport run_moser(const Context& ctx, std::mt19937_64& rng, double ts = 1.0,
                             const std::string& outdir = "") {
    SuiteReport rep;
    rep.name = "flow";
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool has_bump = ctx.model.bump().active();

    // Sample the bump's transition shells (where the field is nonzero). The
    // I < 0 branch is used so the R-drift of the flow points away from the
    // boundary and time-one trajectories stay in the chart.
    auto supp_point = [&]() {
        Point p = Point::zero(ctx.model.dim());
        if (ctx.model.fiber() == sector::Fiber::plane) {
            p[0] = 0.8 + 0.6 * u(rng);
            p[1] = 0.4 * u(rng);
        }
        p[ctx.model.idxR(0)] = 0.13 + 0.11 * u(rng);
        p[ctx.model.idxI(0)] = -(3.05 + 1.4 * u(rng));
        return p;
    };

    double err_omega = 0.0, err_corr = 0.0, err_raw_min = 1e300;
    nlohmann::ordered_json diag = nlohmann::ordered_json::array();
    const int n_pull = has_bump ? 200 : 20;
    for (int i = 0; i < n_pull; ++i) {
        Point p = supp_point();
        moser::PullbackReport pr = ctx.fm.pullback_lambda_report(p, 1.0, 1000);
        err_omega = std::max(err_omega, pr.err_omega);
        err_corr = std::max(err_corr, pr.err_corrected);
        err_raw_min = std::min(err_raw_min, pr.err_raw);
        if (i < 16) {
            nlohmann::ordered_json d;
            d["point"] = std::vector<double>(p.coords.data(), p.coords.data() + p.dim());
            d["err_raw"] = pr.err_raw;
            d["err_corrected"] = pr.err_corrected;
            d["err_omega"] = pr.err_omega;
            d["displaced_distance"] = pr.displaced_distance;
            diag.push_back(d);
        }
    }
    rep.add("omega preservation", err_omega <= 1e-6 * ts, err_omega);
    rep.add("corrected pullback", err_corr <= 1e-5 * ts, err_corr);

    // Identity outside the declared support (500 exterior points).
    double id_dev = 0.0;
    int found = 0;
    while (found < 500) {
        Point p = Point::zero(ctx.model.dim());
        const bool fiber_in = u(rng) < 0.5;
        if (ctx.model.fiber() == sector::Fiber::plane) {
            const double hF = fiber_in ? 0.2 + 0.7 * u(rng) : 2.2 + u(rng);
            p[0] = std::sqrt(2.0 * hF);
        }
        for (int j = 0; j < ctx.model.k(); ++j) {
            p[ctx.model.idxR(j)] = 0.5 * ctx.model.ledger().eps0 + 0.01 + 2.0 * u(rng);
            p[ctx.model.idxI(j)] =
                fiber_in ? 20.0 * (u(rng) - 0.5)
                         : (ctx.model.ledger().N2() + 0.05 + 8.0 * u(rng)) * (u(rng) > 0.5 ? 1 : -1);
        }
        if (moser::in_declared_support(ctx.model, p)) continue;
        ++found;
        id_dev = std::max(id_dev, (ctx.fm.flow(p, 1.0, 50).coords - p.coords).norm());
    }
    rep.add("identity outside declared support", id_dev <= 1e-9 * ts, id_dev);

    // Closedness of the pullback discrepancy.
    double closed_dev = 0.0;
    if (has_bump) {
        auto disc = ctx.fm.pullback_discrepancy_field(1.0, 500, 1e-5);
        for (int i = 0; i < 8; ++i) {
            Point p = supp_point();
            closed_dev = std::max(closed_dev,
                                  num::fd_two_form(disc, p, 2e-5, ctx.model.chart_domain())
                                      .mat.cwiseAbs()
                                      .maxCoeff());
        }
    }
    rep.add("closedness of pullback discrepancy", closed_dev <= 1e-5 * ts, closed_dev);

    // Documented refinement order of the corrected pullback (sigma oracle).
    double order = 4.0;
    if (has_bump) {
        Point p = supp_point();
        const double e1 = ctx.fm.pullback_lambda_report(p, 1.0, 12).err_corrected;
        const double e2 = ctx.fm.pullback_lambda_report(p, 1.0, 24).err_corrected;
        order = std::log2(e1 / e2);
    }
    rep.add("refinement order >= 2", order >= 2.0, order);
    rep.extra["refinement_order"] = order;
    rep.extra["diagnostics"] = diag;

    if (!outdir.empty()) {
        std::ofstream os(outdir + "/moser_diagnostics.json");
        os << diag.dump(2) << "\n";
    }
    return rep;
}

inline SuiteReport run_acs(const Context& ctx, std::mt19937_64& rng, double ts = 1.0,
                           const std::string& outdir = "") {
    SuiteReport rep;
    rep.name = "acs";

    double sq_max = 0.0, dual_max = 0.0, tame_min = 1e300, levi_max = 0.0, D_max = -1e300;
    int fails = 0;
    const TwoForm omega = ctx.model.omega();
    std::vector<Point> subsample;
    for (int i = 0; i < 10000; ++i) {
        Point p = sample_certified(ctx, rng, i % 3 == 0);
        const acs::Assembly a = ctx.field.assemble(p);
        sq_max = std::max(sq_max, a.square_defect);
        dual_max = std::max(dual_max, a.duality_residual);
        for (double d : a.D) D_max = std::max(D_max, d);
        if (!a.certified) ++fails;
        if (i % 10 == 0) subsample.push_back(p);
    }
    rep.add("G^2 + 1 operator norm", sq_max <= 1e-10 * ts, sq_max);
    rep.add("duality residual", dual_max <= 1e-6 * ts, dual_max);
    rep.add("certified at all sampled points", fails == 0, static_cast<double>(fails));

    for (const Point& p : subsample) {
        const Mat J = ctx.field.assemble(p).J;
        tame_min = std::min(tame_min, ctx.field.pinching_lower_bound(omega, J, 1000, rng));
    }
    rep.add("tameness min d lambda(v, Jv)", tame_min > 0.0, tame_min);

    int levi_done = 0;
    while (levi_done < 200) {
        Point p = sample_certified(ctx, rng, levi_done % 2 == 0);
        bool interior = true;
        for (int d = 0; d < ctx.model.dim() && interior; ++d) {
            for (double sgn : {-1.0, 1.0}) {
                Point q = p;
                q[d] += sgn * 2e-5;
                interior = interior && ctx.field.in_certified_region(q);
            }
        }
        if (!interior) continue;
        ++levi_done;
        const TwoForm levi = ctx.field.levi_form_at(p, 1e-5);
        levi_max = std::max(levi_max, (levi.mat - omega.mat).cwiseAbs().maxCoeff());
    }
    rep.add("Levi identity vs d lambda_kappa", levi_max <= 1e-5 * ts, levi_max);

    // Determinant grid over the certified parametrization (50 x 50 x 50).
    const auto& led = ctx.model.ledger();
    const double Rcap = std::sqrt(2.0) * ctx.phi.pair_profile().Y0();
    double Dg_max = -1e300;
    long grid_n = 0;
    for (int is = 0; is < 50; ++is) {
        const double sA = led.N2() + 0.02 + (5.9 - led.N2()) * is / 49.0;
        const double sB = -std::log(ctx.phi.width()) + 0.05 + 1.8 * is / 49.0;
        for (int ir = 0; ir < 50; ++ir) {
            for (int ih = 0; ih < 50; ++ih) {
                const double fiber_h = 2.2 + 1.5 * ih / 49.0;
                const double sign = ih % 2 == 0 ? 1.0 : -1.0;
                for (int lobe = 0; lobe < 2; ++lobe) {
                    const double s = lobe ? sB : sA;
                    double R;
                    if (lobe) {
                        R = ctx.phi.height() + (1.5 * led.eps0 - ctx.phi.height()) * ir / 49.0;
                    } else {
                        const double floor =
                            std::max(std::exp(-s), 0.6 * led.eps1 * std::exp(s));
                        if (floor > 0.95 * Rcap) continue;
                        R = floor + (0.95 * Rcap - floor) * ir / 49.0;
                    }
                    try {
                        std::vector<double> Rv(ctx.model.k(), R);
                        Point p = point_with_Rs(ctx.model, Rv, s, sign, fiber_h);
                        if (!(ctx.ep.phi().value(ctx.ep.args(p)) > 0.0)) continue;
                        for (int pair = 0; pair < ctx.model.k(); ++pair)
                            Dg_max = std::max(Dg_max, ctx.field.det_D_at(p, pair));
                        ++grid_n;
                    } catch (const std::exception&) {
                    }
                }
            }
        }
    }
    rep.add("determinant D < 0 on the grid", Dg_max < 0.0, Dg_max);
    rep.extra["n_points"] = 10000;
    rep.extra["duality_max"] = dual_max;
    rep.extra["tame_min"] = tame_min;
    rep.extra["levi_max_dev"] = levi_max;
    rep.extra["D_max"] = Dg_max;
    rep.extra["D_grid_points"] = grid_n;
    rep.extra["failures"] = nlohmann::ordered_json::array();

    if (!outdir.empty()) {
        std::ofstream os(outdir + "/acs_sweep.json");
        os << rep.extra.dump(2) << "\n";
    }
    return rep;
}

inline SuiteReport run_lambda_sectorial(const Context& ctx, std::mt19937_64& rng,
                                        double ts = 1.0) {
    SuiteReport rep;
    rep.name = "lambda_sectorial";
    double worst = 0.0, sq = 0.0;
    num::ScalarField wig = [&](const Point& q) {
        return moser::wiggled_profile_at(ctx.fm, ctx.ep, q, 200);
    };
    for (int i = 0; i < 200; ++i) {
        Point p = sample_certified(ctx, rng, i % 2 == 0);
        const Mat Jl = ctx.field.pullback_J_at(ctx.fm, p, 200);
        const Covector d_wig = num::fd_gradient(wig, p, 3e-6, ctx.model.chart_domain());
        const Vec residual = Jl * d_wig.comps + ctx.model.lambda_at(p).comps;
        worst = std::max(worst, residual.norm());
        sq = std::max(sq, (Jl * Jl + Mat::Identity(ctx.model.dim(), ctx.model.dim())).norm());
    }
    rep.add("pulled-back duality residual", worst <= 5e-5 * ts, worst);
    rep.add("pulled-back square defect", sq <= 1e-7 * ts, sq);
    return rep;
}

inline SuiteReport run_floer(const Context& ctx, std::mt19937_64& rng, double ts = 1.0,
                             const std::string& outdir = "") {
    SuiteReport rep;
    rep.name = "floer";
    std::normal_distribution<double> gauss(0.0, 1.0);
    const bool analytic_path = !ctx.model.bump().active();
    const double energy_tol = (analytic_path ? 1e-8 : 1e-6) * ts;

    floer::SectorialH H = floer::SectorialH::linear(0.0, 1.0);
    double energy_max = 0.0, fact_max = 0.0, struct_min = 1e300, struct_dev = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Point p = sample_certified(ctx, rng, i % 2 == 0);
        const Mat J = ctx.field.assemble(p).J;
        Vec vt(ctx.model.dim());
        for (int d = 0; d < ctx.model.dim(); ++d) vt[d] = gauss(rng);
        floer::Jet1 jet = floer::make_floer_jet(p, vt, H, ctx.ep, J);
        energy_max = std::max(energy_max, floer::energy_identity_residual(jet, H, ctx.ep, J));

        const double sv = ctx.ep.value(p);
        const Covector dH = Covector(Vec(H.rho_prime(sv) * ctx.ep.gradient(p).comps));
        const Vec XH = ctx.model.ham_vf(dH);
        const Vec Xs = ctx.model.ham_vf(ctx.ep.gradient(p));
        fact_max = std::max(fact_max,
                            (XH - H.rho_prime(sv) * Xs).norm() / (1.0 + XH.norm()));

        if (ctx.model.k() == 1 && i < 500) {
            const floer::HamStructureReport hs = floer::ham_vf_structure_check(ctx.ep, p);
            struct_min = std::min({struct_min, hs.coeff_dI, hs.coeff_Xs});
            struct_dev = std::max(struct_dev, hs.formula_residual);
        }
    }
    rep.add("energy identity residual", energy_max <= energy_tol, energy_max);
    rep.add("X_H = rho' X_s", fact_max <= 1e-6 * ts, fact_max);
    if (ctx.model.k() == 1) {
        rep.add("ham field coefficients >= 0", struct_min >= -1e-8 * ts, struct_min);
        rep.add("ham field structure formula", struct_dev <= 1e-6 * ts, struct_dev);
    }

    // Continuation margin: exact agreement and nonnegativity.
    floer::IsotopyFamily fam(H, [](double z) { return 1.0 + std::tanh(z) * std::tanh(z); },
                             [](double z) {
                                 const double t = std::tanh(z);
                                 return 2.0 * t * (1.0 - t * t);
                             });
    double margin_min = 1e300, margin_dev = 0.0;
    std::uniform_real_distribution<double> utau(-1.5, 1.5);
    for (int i = 0; i < 200; ++i) {
        Point p = sample_certified(ctx, rng, i % 2 == 0);
        Vec vt = Vec::Ones(ctx.model.dim());
        floer::Jet1 jet = floer::make_floer_jet(p, vt, H, ctx.ep, ctx.field.assemble(p).J);
        const double tau = utau(rng);
        const floer::ContinuationMargin m = floer::continuation_sign_check(jet, fam, tau, ctx.ep);
        margin_min = std::min(margin_min, m.closed_form);
        if (std::abs(tau) < 1.0 - 0.05) {  // keep the stencil inside the window
            margin_dev = std::max(margin_dev, std::abs(m.closed_form - m.assembled));
        }
    }
    rep.add("continuation margin >= 0", margin_min >= 0.0, margin_min);
    rep.add("margin closed form vs assembled", margin_dev <= 1e-10 * ts, margin_dev);

    // Boundary identity on the shipped Lagrangian.
    floer::SectorialLagrangian L(ctx.model, 2.0, 2.0, true);
    const floer::BoundaryReport br = floer::lagrangian_boundary_check(L, ctx.model, 120);
    rep.add("Z tangency on rays", br.max_tangency_residual <= 1e-8 * ts,
            br.max_tangency_residual);
    rep.add("lambda annihilates T L", br.max_lambda_on_L <= 1e-10 * ts, br.max_lambda_on_L);

    rep.extra["n_jets"] = 1000;
    rep.extra["max_residual"] = energy_max;
    rep.extra["min_margin"] = margin_min;
    rep.extra["boundary_max"] = br.max_lambda_on_L;
    if (!outdir.empty()) {
        std::ofstream os(outdir + "/floer_jets.json");
        os << rep.extra.dump(2) << "\n";
    }
    return rep;
}

/// Negative controls: violating the beta bound must flip the determinant sign
/// somewhere, and a tilted line must break the boundary identity.
inline SuiteReport run_negative_controls(const Context& ctx, std::mt19937_64& rng,
                                         double ts = 1.0) {
    (void)ts;
    SuiteReport rep;
    rep.name = "negative_controls";
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // beta = 2 alpha on an alpha = 1/4 plane model (beta stays < 1).
    sector::ConstantsLedger led = ctx.model.ledger();
    led.beta = 0.5;
    sector::SectorModel bad(0.25, 1, sector::Fiber::plane, ctx.model.F0(), ctx.model.F0prime(),
                            0.0, led);
    Context bctx{sector::SectorModel(bad)};
    int violations = 0;
    const double Rcap = std::sqrt(2.0) * bctx.phi.pair_profile().Y0();
    for (int i = 0; i < 4000; ++i) {
        const double s = led.N2() + 0.02 + (5.9 - led.N2()) * u(rng);
        const double floor = std::max(std::exp(-s), 0.55 * led.eps1 * std::exp(s));
        if (floor > 0.95 * Rcap) continue;
        const double R = floor + (0.95 * Rcap - floor) * u(rng) * 0.3;
        try {
            Point p = point_with_Rs(bctx.model, {R}, s, u(rng) > 0.5 ? 1 : -1, 2.4);
            if (!(bctx.ep.phi().value(bctx.ep.args(p)) > 0.0)) continue;
            if (bctx.field.det_D_at(p) >= 0.0) ++violations;
        } catch (const std::exception&) {
        }
    }
    rep.add("beta = 2 alpha flips D somewhere", violations >= 1,
            static_cast<double>(violations));
    const bool beta_rejected =
        !bctx.model.validate_constants(bctx.phi.width(), bctx.phi.height()).all_pass();
    rep.add("beta = 2 alpha fails validation", beta_rejected, beta_rejected ? 1.0 : 0.0);

    // Tilted line: the boundary identity fails by a visible margin.
    double worst = 0.0;
    for (double R : {0.5, 1.0, 2.0, 3.0}) {
        const floer::LagrangianSample t = floer::tilted_line_sample(ctx.model, R, 1.0);
        worst = std::max(worst, std::abs(ctx.model.lambda_at(t.p)(t.tangent[0])));
    }
    rep.add("tilted line breaks the boundary identity", worst >= 1e-3, worst);
    return rep;
}

}  // namespace seclab::suites
