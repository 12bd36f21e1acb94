#include "seclab/sector.hpp"
#include "seclab/smoother.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace seclab;
using namespace seclab::sector;

namespace {

SectorModel point_model(double alpha, double bump = 0.0) {
    ConstantsLedger led;
    led.beta = 0.0;
    led.T0 = 1.05 * 1.25 * led.eps0 / (2.0 * std::sqrt(led.eps1));
    return SectorModel(alpha, 1, Fiber::point, 1.0, 2.0, bump, led);
}

SectorModel plane_model(double alpha = 0.5, double bump = 0.1, double beta = 0.25) {
    ConstantsLedger led;
    led.beta = beta;
    led.T0 = 1.05 * 1.25 * led.eps0 / (2.0 * std::sqrt(led.eps1));
    return SectorModel(alpha, 1, Fiber::plane, 1.0, 2.0, bump, led);
}

Point pt(std::initializer_list<double> v) {
    Vec x(static_cast<int>(v.size()));
    int i = 0;
    for (double c : v) x[i++] = c;
    return Point(x);
}

}  // namespace

TEST_CASE("lambda: eccentric one-form values") {
    SectorModel m = point_model(0.5);
    Covector lam = m.lambda_at(pt({1.0, 2.0}));
    CHECK(lam.comps[0] == -1.0);  // -alpha I
    CHECK(lam.comps[1] == 0.5);   // (1 - alpha) R

    SectorModel m1 = point_model(1.0);
    Covector lam1 = m1.lambda_at(pt({3.0, 5.0}));
    CHECK(lam1.comps[0] == -5.0);
    CHECK(lam1.comps[1] == 0.0);
}

TEST_CASE("with the bump, the C-components match the bump-free form at large |I|") {
    SectorModel m = point_model(0.5, 0.1);
    // eta vanishes identically for |I| >= N0, so the match is bitwise.
    for (double I : {5.0, 6.5, 9.0, -5.5}) {
        Point p = pt({0.2, I});
        Covector a = m.lambda_at(p), b = m.lambda_split_at(p);
        CHECK(a.comps[0] == b.comps[0]);
        CHECK(a.comps[1] == b.comps[1]);
    }
    // Inside the bump support they differ.
    Point q = pt({0.15, 0.3});  // inside the zeta transition shell
    CHECK((m.lambda_at(q) - m.lambda_split_at(q)).norm() > 0.0);
}

TEST_CASE("omega, Liouville field and Hamiltonian fields") {
    SectorModel m = point_model(0.5);
    TwoForm w = m.omega();
    CHECK(w.mat(0, 1) == 1.0);

    Vec Z = m.liouville_Z_at(pt({1.0, 1.0}));
    CHECK(std::abs(Z[0] - 0.5) < 1e-14);
    CHECK(std::abs(Z[1] - 0.5) < 1e-14);

    Covector dR = Covector::zero(2);
    dR.comps[0] = 1.0;
    Vec XR = m.ham_vf(dR);
    CHECK(std::abs(XR[0]) < 1e-14);
    CHECK(std::abs(XR[1] + 1.0) < 1e-14);
}

TEST_CASE("ZRZI residuals") {
    SectorModel m = point_model(0.25);
    Vec Z = m.liouville_Z_at(pt({2.0, 0.7}));
    CHECK(std::abs(Z[0] - 1.5) < 1e-12);  // Z[R] = (1 - alpha) R
    CHECK(m.check_ZRZI(pt({2.0, 0.7})).all_pass());
    CHECK(std::abs(m.liouville_Z_at(pt({0.0, 1.3}))[0]) < 1e-14);  // boundary fixed

    SectorModel mb = plane_model();
    CHECK(mb.check_ZRZI(pt({1.1, 0.2, 1.5, 7.0})).all_pass());
}

TEST_CASE("radial function: values, Z[s] = 1 for all eccentricities") {
    SectorModel m = point_model(0.5);
    CHECK(std::abs(m.radial_s_at(pt({2.0, 0.0}))) < 1e-12);  // h_C = 1
    CHECK(std::abs(m.radial_s_at(pt({0.0, 2.0}))) < 1e-12);

    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> uR(0.05, 3.0), uI(0.5, 9.0), sgn(-1.0, 1.0);
    for (double alpha : {0.25, 0.5, 1.0}) {
        SectorModel ma = point_model(alpha);
        for (int i = 0; i < 1000; ++i) {
            Point p = pt({uR(rng), uI(rng) * (sgn(rng) > 0 ? 1.0 : -1.0)});
            const Vec Z = ma.liouville_Z_at(p);
            const double zs = ma.ds_at(p)(Z);
            CHECK(std::abs(zs - 1.0) < 1e-6);
        }
    }

    // Mixed radial function on the plane-fiber model, sampled off the box.
    SectorModel mp = plane_model();
    for (int i = 0; i < 1000; ++i) {
        Point p = pt({0.3 + uR(rng), 0.2 * sgn(rng), uR(rng), uI(rng) + 5.0});
        const Vec Z = mp.liouville_Z_at(p);
        CHECK(std::abs(mp.ds_at(p)(Z) - 1.0) < 1e-6);
    }

    // Queries inside the excluded compact box are refused when the bump is on.
    CHECK_THROWS_AS(plane_model().radial_s_at(pt({0.1, 0.1, 0.3, 1.0})), region_error);
}

TEST_CASE("fd two-form of lambda matches the constant omega, including in the bump") {
    SectorModel m = plane_model();
    num::OneFormField lam = [&](const Point& p) { return m.lambda_at(p); };
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.05, 2.5);
    const TwoForm w = m.omega();
    for (int i = 0; i < 200; ++i) {
        Point p = pt({u(rng), u(rng), u(rng), u(rng)});
        TwoForm fd = num::fd_two_form(lam, p, 2e-5, m.chart_domain());
        CHECK((fd.mat - w.mat).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("Liouville identity d(lambda(Z)) + Z . dlambda = lambda") {
    SectorModel m = plane_model();
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    num::ScalarField lamZ = [&](const Point& p) {
        return m.lambda_at(p)(m.liouville_Z_at(p));
    };
    for (int i = 0; i < 200; ++i) {
        Point p = pt({u(rng), u(rng), u(rng), u(rng)});
        Covector dlz = num::fd_gradient(lamZ, p, 1e-4, m.chart_domain());
        // Cartan: L_Z lambda = d(lambda(Z)) + Z . dlambda, with the
        // contraction assembled as omega^T Z.
        Vec contraction = m.omega().mat.transpose() * m.liouville_Z_at(p);
        Vec lhs = dlz.comps + contraction;
        CHECK((lhs - m.lambda_at(p).comps).norm() < 1e-5);
    }
}

TEST_CASE("constants ledger validation") {
    SectorModel m = plane_model();
    smoothing::Smoother phi = smoothing::build_phi(2, m.ledger().eps1, m.ledger().T0);
    CheckReport rep = m.validate_constants(phi.width(), phi.height());
    CHECK(rep.all_pass());

    // f == 0 reduces the beta constraint to beta < alpha.
    SectorModel m0 = plane_model(0.5, 0.0, 0.25);
    CHECK(m0.sampled_C_f() == 0.0);
    CHECK(m0.validate_constants(phi.width(), phi.height()).all_pass());

    // beta = alpha violates the strict bound.
    SectorModel bad = plane_model(0.5, 0.1, 0.5);
    CHECK_FALSE(bad.validate_constants(phi.width(), phi.height()).all_pass());

    // The stated example: eps0 = 0.5, eps1 = 1e-3, T0 = 10.38 lands in the
    // window [0.625, 0.75], and N2 is close to 2.76.
    const double win = 2.0 * 10.38 * std::sqrt(1e-3);
    CHECK(win > 0.625);
    CHECK(win < 0.75);
    CHECK(m.ledger().N2() == Catch::Approx(2.7608).margin(1e-3));
}

TEST_CASE("json config round trip and validation") {
    nlohmann::json j = {
        {"alpha", 0.5},
        {"k", 1},
        {"fiber", "plane"},
        {"F0", 1.0},
        {"F0prime", 2.0},
        {"bump", {{"a", 0.1}, {"N0", 5.0}}},
        {"ledger",
         {{"eps0", 0.5}, {"eps1", 1e-3}, {"T0", 10.377}, {"N0", 5.0}, {"N1", 8.0}, {"beta", 0.25}}}};
    SectorModel m = model_from_json(j);
    CHECK(m.alpha() == 0.5);
    CHECK(m.dim() == 4);

    nlohmann::json missing = j;
    missing.erase("alpha");
    CHECK_THROWS_AS(model_from_json(missing), construction_error);

    nlohmann::json mismatched = j;
    mismatched["bump"]["N0"] = 4.0;
    CHECK_THROWS_AS(model_from_json(mismatched), construction_error);
}

TEST_CASE("point fiber forces beta = 0; bump restricted to k = 1") {
    ConstantsLedger led;
    led.beta = 0.1;
    CHECK_THROWS_AS(SectorModel(0.5, 1, Fiber::point, 1.0, 2.0, 0.0, led), construction_error);
    led.beta = 0.25;
    CHECK_THROWS_AS(SectorModel(0.5, 2, Fiber::plane, 1.0, 2.0, 0.1, led), construction_error);
    CHECK_NOTHROW(SectorModel(0.5, 2, Fiber::plane, 1.0, 2.0, 0.0, led));
}
