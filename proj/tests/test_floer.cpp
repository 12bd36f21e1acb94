#include "seclab/floer.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace seclab;
using namespace seclab::sector;
using namespace seclab::profile;
using namespace seclab::floer;

namespace {

ConstantsLedger default_ledger(double beta) {
    ConstantsLedger led;
    led.beta = beta;
    led.T0 = 1.05 * 1.25 * led.eps0 / (2.0 * std::sqrt(led.eps1));
    return led;
}

struct Rig {
    SectorModel model;
    smoothing::Smoother phi;
    Kappa kappa;
    EndProfile ep;
    acs::ACSField field;

    explicit Rig(SectorModel m)
        : model(std::move(m)),
          phi(model.k() + 1, model.ledger().eps1, model.ledger().T0),
          kappa(model, phi),
          ep(model, phi),
          field(ep, kappa) {}
};

Rig point_rig() { return Rig(SectorModel(0.5, 1, Fiber::point, 1.0, 2.0, 0.0, default_ledger(0.0))); }
Rig plane_rig() {
    return Rig(SectorModel(0.5, 1, Fiber::plane, 1.0, 2.0, 0.1, default_ledger(0.25)));
}

Point with_Rs(const SectorModel& m, double R, double s, double sign = 1.0, double h_target = 2.42) {
    const double alpha = m.alpha();
    double sC = s;
    Point p = Point::zero(m.dim());
    if (m.fiber() == Fiber::plane) {
        p[0] = std::sqrt(2.0 * h_target);
        const double beta = m.ledger().beta;
        sC = (s - beta * std::log(h_target)) / (1.0 - beta);
    }
    const double A = 0.5 * (1.0 - alpha) * R * R;
    const double B = (1.0 - A * std::exp(-2.0 * (1.0 - alpha) * sC)) * std::exp(2.0 * alpha * sC);
    p[m.idxR(0)] = R;
    p[m.idxI(0)] = sign * std::sqrt(2.0 * B / alpha);
    return p;
}

Point sample_certified(const Rig& rig, std::mt19937_64& rng, bool lobeB) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto& led = rig.model.ledger();
    const double Rcap = std::sqrt(2.0) * rig.phi.pair_profile().Y0();
    for (int attempt = 0; attempt < 500; ++attempt) {
        double R, s;
        if (lobeB) {
            s = -std::log(rig.phi.width()) + 0.05 + 1.5 * u(rng);
            R = rig.phi.height() + (1.5 * led.eps0 - rig.phi.height()) * u(rng);
        } else {
            s = led.N2() + 0.02 + (5.9 - led.N2()) * u(rng);
            const double floor = std::max(std::exp(-s), 0.6 * led.eps1 * std::exp(s));
            if (floor > 0.95 * Rcap) continue;
            R = floor + (0.95 * Rcap - floor) * u(rng);
        }
        Point p = with_Rs(rig.model, R, s, u(rng) > 0.5 ? 1.0 : -1.0);
        if (rig.field.in_certified_region(p)) return p;
    }
    throw std::runtime_error("sample_certified: no point found");
}

}  // namespace

TEST_CASE("floer jet: defining relation and special cases") {
    Rig rig = point_rig();
    std::mt19937_64 rng(131);
    SectorialH H = SectorialH::linear(0.2, 1.3);

    Point p = sample_certified(rig, rng, false);
    const Mat J = rig.field.assemble(p).J;
    const Mat Jt = J.transpose();

    // v_t = X_H gives v_tau = 0.
    const double sv = rig.ep.value(p);
    Covector dH = Covector(Vec(H.rho_prime(sv) * rig.ep.gradient(p).comps));
    const Vec XH = rig.model.ham_vf(dH);
    Jet1 still = make_floer_jet(p, XH, H, rig.ep, J);
    CHECK(still.v_tau.norm() <= 1e-12 * (1.0 + XH.norm()));

    // Constant H: v_tau = -J v_t.
    SectorialH flat{[](double) { return 1.0; }, [](double) { return 1e-30; }};
    Vec vt(2);
    vt << 0.3, -0.8;
    Jet1 jc = make_floer_jet(p, vt, flat, rig.ep, J);
    CHECK((jc.v_tau + Jt * vt).norm() <= 1e-12);

    // Random jets: J v_tau = v_t - X_H via G^2 = -1.
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        Vec v(2);
        v << gauss(rng), gauss(rng);
        Jet1 j = make_floer_jet(p, v, H, rig.ep, J);
        CHECK((Jt * j.v_tau - (v - XH)).norm() <= 1e-10 * (1.0 + v.norm() + XH.norm()));
    }
}

TEST_CASE("energy identity residual across the certified lobes") {
    std::mt19937_64 rng(137);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (bool plane : {false, true}) {
        Rig rig = plane ? plane_rig() : point_rig();
        SectorialH H = SectorialH::linear(0.0, 1.0);
        SectorialH H10 = SectorialH::linear(0.0, 10.0);
        const double tol = plane ? 1e-6 : 1e-8;
        for (int i = 0; i < 300; ++i) {
            Point p = sample_certified(rig, rng, i % 2 == 0);
            const Mat J = rig.field.assemble(p).J;
            Vec vt(rig.model.dim());
            for (int d = 0; d < rig.model.dim(); ++d) vt[d] = gauss(rng);
            Jet1 jet = make_floer_jet(p, vt, H, rig.ep, J);
            CHECK(energy_identity_residual(jet, H, rig.ep, J) <= tol);
            // The identity is rho-covariant term by term.
            Jet1 jet10 = make_floer_jet(p, vt, H10, rig.ep, J);
            CHECK(energy_identity_residual(jet10, H10, rig.ep, J) <= tol * 10.0);
        }
    }
}

TEST_CASE("continuation margin: exact, nonnegative, zero in the flat regimes") {
    Rig rig = point_rig();
    std::mt19937_64 rng(139);
    SectorialH base = SectorialH::linear(0.0, 1.0);
    // gain(z) = 1 + tanh(z)^2 >= 0 with closed-form derivative.
    IsotopyFamily fam(base, [](double z) { return 1.0 + std::tanh(z) * std::tanh(z); },
                      [](double z) {
                          const double t = std::tanh(z);
                          return 2.0 * t * (1.0 - t * t);
                      });

    Point p = sample_certified(rig, rng, false);
    Vec vt = Vec::Ones(2);
    Jet1 jet = make_floer_jet(p, vt, base, rig.ep, rig.field.assemble(p).J);

    for (double tau : {-0.6, -0.2, 0.0, 0.35, 0.8}) {
        ContinuationMargin m = continuation_sign_check(jet, fam, tau, rig.ep);
        CHECK(m.closed_form >= 0.0);
        CHECK(std::abs(m.closed_form - m.assembled) <= 1e-10);
    }
    // chi' = 0 outside the elongation window.
    CHECK(continuation_sign_check(jet, fam, -5.0, rig.ep).closed_form == 0.0);
    CHECK(continuation_sign_check(jet, fam, 5.0, rig.ep).closed_form == 0.0);

    // s-independent family: margin identically zero.
    IsotopyFamily constant(base, [](double) { return 0.0; }, [](double) { return 0.0; });
    CHECK(continuation_sign_check(jet, constant, 0.3, rig.ep).closed_form == 0.0);

    // Active window with positive gain: strictly positive margin.
    CHECK(continuation_sign_check(jet, fam, 0.0, rig.ep).closed_form > 0.0);
}

TEST_CASE("X_H factorizes through rho'") {
    Rig rig = point_rig();
    std::mt19937_64 rng(149);
    SectorialH H = SectorialH::softplus(0.7);
    for (int i = 0; i < 200; ++i) {
        Point p = sample_certified(rig, rng, i % 2 == 0);
        const double sv = rig.ep.value(p);
        Covector dH = Covector(Vec(H.rho_prime(sv) * rig.ep.gradient(p).comps));
        const Vec XH = rig.model.ham_vf(dH);
        const Vec Xs = rig.model.ham_vf(rig.ep.gradient(p));
        CHECK((XH - H.rho_prime(sv) * Xs).norm() <= 1e-6 * (1.0 + XH.norm()));
    }
}

TEST_CASE("Hamiltonian field structure of the end profile") {
    Rig rig = point_rig();
    std::mt19937_64 rng(151);

    // s-linear region: the d/dI coefficient vanishes.
    Point ps = with_Rs(rig.model, rig.phi.height() * 1.2, 5.2);
    HamStructureReport rs = ham_vf_structure_check(rig.ep, ps);
    CHECK(std::abs(rs.coeff_dI) <= 1e-10);
    CHECK(rs.formula_residual <= 1e-6);

    // mu-linear region: X is proportional to d/dI with coefficient 1/R.
    const double Rmu = 0.5 * rig.phi.width();
    Point pm = with_Rs(rig.model, Rmu, -std::log(rig.phi.height()) - 0.3);
    HamStructureReport rm = ham_vf_structure_check(rig.ep, pm);
    CHECK(rm.coeff_dI == Catch::Approx(1.0 / Rmu).epsilon(1e-9));
    CHECK(std::abs(rm.coeff_Xs) <= 1e-9);

    // Both coefficients stay nonnegative across the certified zone.
    for (int i = 0; i < 200; ++i) {
        Point p = sample_certified(rig, rng, i % 2 == 0);
        HamStructureReport r = ham_vf_structure_check(rig.ep, p);
        CHECK(r.coeff_dI >= -1e-8);
        CHECK(r.coeff_Xs >= -1e-8);
        CHECK(r.decomposition_residual <= 1e-6 * (1.0 + std::abs(r.coeff_dI) + std::abs(r.coeff_Xs)));
        CHECK(r.formula_residual <= 1e-6);
    }
}

TEST_CASE("boundary identity on Z-invariant loci") {
    for (bool plane : {false, true}) {
        Rig rig = plane ? plane_rig() : point_rig();
        SectorialLagrangian L(rig.model, 2.0, 2.0, true);
        BoundaryReport rep = lagrangian_boundary_check(L, rig.model, 60);
        CHECK(rep.n_ray >= 120);
        CHECK(rep.max_tangency_residual <= 1e-8);
        CHECK(rep.max_lambda_on_L <= 1e-10);
    }

    // The stated value at (2, 2) for alpha = 1/2: lambda(v) = 0 on the ray.
    Rig rig = point_rig();
    SectorialLagrangian ray(rig.model, 2.0, 2.0, false);
    LagrangianSample smp = ray.sample(1.0);
    CHECK(rig.model.lambda_at(smp.p)(smp.tangent[0]) == 0.0);

    // Negative control: a tilted line fails by a visible margin.
    double worst = 0.0;
    for (double R : {0.5, 1.0, 2.0, 3.0}) {
        LagrangianSample t = tilted_line_sample(rig.model, R, 1.0);
        worst = std::max(worst, std::abs(rig.model.lambda_at(t.p)(t.tangent[0])));
    }
    CHECK(worst >= 1e-3);
}

TEST_CASE("z level and boundary distance") {
    Rig rig = point_rig();
    SectorialLagrangian capped(rig.model, 2.0, 2.0, true);
    SectorialLagrangian pure(rig.model, 2.0, 2.0, false);

    // Pure ray pair: the level is the radial value at the join.
    CHECK(z_level(pure, rig.model) ==
          Catch::Approx(rig.model.radial_s_at(pure.sample(1.0).p)).margin(1e-12));

    // The cap's level is finite and at least the join level.
    const double zc = z_level(capped, rig.model);
    CHECK(std::isfinite(zc));
    CHECK(zc >= z_level(pure, rig.model) - 1e-9);

    // Distance proxy decreases monotonically as the cap shrinks toward the
    // boundary (smaller R_join).
    double prev = std::numeric_limits<double>::infinity();
    for (double Rj : {3.0, 2.0, 1.2}) {
        SectorialLagrangian L(rig.model, Rj, 2.0, true);
        const double d = dist_to_boundary(L, rig.model);
        CHECK(d > 0.0);
        CHECK(d < prev);
        prev = d;
    }
}
