#include "seclab/moser.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace seclab;
using namespace seclab::sector;
using namespace seclab::profile;
using namespace seclab::moser;

namespace {

struct Rig {
    SectorModel model;
    smoothing::Smoother phi;
    Kappa kappa;
    EndProfile ep;
    MoserField field;
    FlowMap fm;

    Rig(SectorModel m, int sigma = +1, int steps = 400)
        : model(std::move(m)),
          phi(model.k() + 1, model.ledger().eps1, model.ledger().T0),
          kappa(model, phi),
          ep(model, phi),
          field(model, kappa, sigma),
          fm(field, steps) {}
};

ConstantsLedger default_ledger(double beta) {
    ConstantsLedger led;
    led.beta = beta;
    led.T0 = 1.05 * 1.25 * led.eps0 / (2.0 * std::sqrt(led.eps1));
    return led;
}

Rig plane_rig(double bump = 0.1, int sigma = +1, int steps = 400) {
    return Rig(SectorModel(0.5, 1, Fiber::plane, 1.0, 2.0, bump, default_ledger(0.25)), sigma,
               steps);
}

Rig point_rig(double bump = 0.1, int sigma = +1, int steps = 400) {
    return Rig(SectorModel(0.5, 1, Fiber::point, 1.0, 2.0, bump, default_ledger(0.0)), sigma,
               steps);
}

Point pt(std::initializer_list<double> v) {
    Vec x(static_cast<int>(v.size()));
    int i = 0;
    for (double c : v) x[i++] = c;
    return Point(x);
}

// A generic point inside the bump's transition shell (nonzero field).
Point supp_point_plane() { return pt({0.9, 0.9, 0.17, 3.4}); }
Point supp_point_point() { return pt({0.17, 3.4}); }

}  // namespace

TEST_CASE("field vanishes where kappa is flat or f is zero") {
    Rig rig = plane_rig();
    // kappa = 1 far region: the perturbation is exactly zero.
    CHECK(moser_field_at(rig.field, pt({2.5, 0.0, 1.0, 9.0})).isZero(0.0));

    // f == 0 model: zero everywhere.
    Rig zero = plane_rig(0.0);
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.05, 2.0);
    for (int i = 0; i < 50; ++i) {
        CHECK(moser_field_at(zero.field, pt({u(rng), u(rng), u(rng), u(rng)})).isZero(0.0));
    }
}

TEST_CASE("defining equation residual at generic support points") {
    Rig rig = plane_rig();
    for (const Point& p : {supp_point_plane(), pt({0.2, 0.3, 0.2, 0.8})}) {
        const Vec X = moser_field_at(rig.field, p);
        CHECK(X.norm() > 0.0);
        const Vec contraction = rig.model.omega().mat.transpose() * X;
        CHECK((contraction - rig.field.perturbation(p).comps).norm() <= 1e-10);
    }
}

TEST_CASE("flow: identity cases and fourth-order step refinement") {
    Rig rig = point_rig();
    // Outside the support the integrator never sees a nonzero stage.
    Point outside = pt({0.9, 0.5});
    CHECK((flow_psi(rig.fm, outside, 1.0).coords - outside.coords).norm() == 0.0);
    CHECK(potential_A(rig.fm, outside, 1.0) == 0.0);

    // Zero-amplitude model: identity everywhere.
    Rig zero = point_rig(0.0);
    Point q = pt({0.2, 0.4});
    CHECK((flow_psi(zero.fm, q, 1.0).coords - q.coords).norm() == 0.0);

    // Endpoint drift shrinks by about 2^4 when the step count doubles.
    Point p = supp_point_point();
    const Vec e3 = flow_psi(rig.fm, p, 1.0, 1600).coords;
    const double d1 = (flow_psi(rig.fm, p, 1.0, 100).coords - e3).norm();
    const double d2 = (flow_psi(rig.fm, p, 1.0, 200).coords - e3).norm();
    CHECK(d1 / d2 > 10.0);
    CHECK(d1 / d2 < 24.0);
}

TEST_CASE("pullback certificates: corrected error converges, raw error does not") {
    Rig rig = point_rig();
    Point p = supp_point_point();

    PullbackReport rep = rig.fm.pullback_lambda_report(p, 1.0, 800);
    CHECK(rep.displaced_distance > 1e-4);
    CHECK(rep.err_omega <= 1e-6);
    CHECK(rep.err_corrected <= 1e-5);
    // The strict identity fails: the discrepancy is exact but nonzero.
    CHECK(rep.err_raw > 10.0 * rep.err_corrected);

    // Refinement order of the corrected error is at least 2 until the
    // finite-difference floor of dA takes over.
    PullbackReport coarse = rig.fm.pullback_lambda_report(p, 1.0, 12);
    PullbackReport fine = rig.fm.pullback_lambda_report(p, 1.0, 24);
    const double order = std::log2(coarse.err_corrected / fine.err_corrected);
    CHECK(order >= 2.0);

    // The opposite orientation of the defining equation does not converge.
    Rig wrong = point_rig(0.1, -1);
    PullbackReport bad = wrong.fm.pullback_lambda_report(p, 1.0, 800);
    CHECK(bad.err_corrected > 100.0 * rep.err_corrected);
}

TEST_CASE("omega preservation along the flow") {
    Rig rig = plane_rig();
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u(0.05, 1.4);
    int done = 0;
    while (done < 25) {
        Point p = pt({u(rng), u(rng), 0.4 * u(rng), 2.0 * u(rng)});
        PullbackReport rep = rig.fm.pullback_lambda_report(p, 1.0, 1000);
        CHECK(rep.err_omega <= 1e-6);
        ++done;
    }
}

TEST_CASE("identity outside the declared support region") {
    Rig rig = plane_rig();
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int found = 0;
    while (found < 500) {
        // Exterior of {R <= eps0/2} u (F - F0) x {|I| <= N2}: R beyond eps0/2
        // and either a fiber point inside F0 or |I| above N2.
        Point p = Point::zero(4);
        const bool fiber_in = u(rng) < 0.5;
        const double hF = fiber_in ? 0.2 + 0.7 * u(rng) : 2.2 + u(rng);
        p[0] = std::sqrt(2.0 * hF);
        p[1] = 0.0;
        p[rig.model.idxR(0)] = 0.5 * rig.model.ledger().eps0 + 0.01 + 2.0 * u(rng);
        p[rig.model.idxI(0)] =
            fiber_in ? 20.0 * (u(rng) - 0.5)
                     : (rig.model.ledger().N2() + 0.05 + 8.0 * u(rng)) * (u(rng) > 0.5 ? 1 : -1);
        if (in_declared_support(rig.model, p)) continue;
        ++found;
        CHECK((flow_psi(rig.fm, p, 1.0, 50).coords - p.coords).norm() <= 1e-9);
    }
}

TEST_CASE("closedness of the pullback discrepancy") {
    Rig rig = point_rig();
    auto disc = rig.fm.pullback_discrepancy_field(1.0, 500, 1e-5);
    // The discrepancy equals dA_1 whose third derivatives through the bump
    // transitions are large, so the outer stencil must be tight.
    for (const Point& p : {supp_point_point(), pt({0.22, 3.8}), pt({0.15, 3.2})}) {
        TwoForm d = num::fd_two_form(disc, p, 2e-5, rig.model.chart_domain());
        CHECK(d.mat.cwiseAbs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("wiggled profile agrees with the plain profile off the support") {
    Rig rig = plane_rig();
    // Far region: flow is the identity, the composition is the plain value.
    Point far = pt({2.5, 0.0, 0.8, 9.5});
    CHECK(wiggled_profile_at(rig.fm, rig.ep, far) == rig.ep.value(far));

    // Zero bump: identical functions wherever defined.
    Rig zero = plane_rig(0.0);
    Point q = pt({1.8, 0.0, 0.4, 7.0});
    CHECK(wiggled_profile_at(zero.fm, zero.ep, q) == zero.ep.value(q));
}
