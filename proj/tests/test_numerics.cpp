#include "seclab/numerics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace seclab;
using namespace seclab::num;

namespace {
Point pt2(double a, double b) {
    Vec v(2);
    v << a, b;
    return Point(v);
}
}  // namespace

TEST_CASE("fd_gradient on polynomials and the alpha-quadratic") {
    ScalarField sq = [](const Point& p) { return p[0] * p[0]; };
    Covector g = fd_gradient(sq, pt2(1.0, 0.0), 1e-4);
    CHECK(std::abs(g.comps[0] - 2.0) < 1e-7);
    CHECK(std::abs(g.comps[1]) < 1e-7);

    ScalarField constant = [](const Point&) { return 3.75; };
    Covector gc = fd_gradient(constant, pt2(0.3, -2.0));
    CHECK(gc.norm() == 0.0);

    // h_C^{1/2}(x, y) = ((1-a) x^2 + a y^2)/2 at a = 1/2: gradient (x/2, y/2).
    ScalarField h_half = [](const Point& p) { return 0.25 * (p[0] * p[0] + p[1] * p[1]); };
    Covector gh = fd_gradient(h_half, pt2(1.0, 1.0));
    CHECK(std::abs(gh.comps[0] - 0.5) < 1e-7);
    CHECK(std::abs(gh.comps[1] - 0.5) < 1e-7);
}

TEST_CASE("fd_gradient one-sided fallback at a chart floor") {
    Vec floors(2);
    floors << 0.0, -std::numeric_limits<double>::infinity();
    auto dom = StencilDomain::with_floors(floors);
    ScalarField f = [](const Point& p) { return p[0] * p[0] * p[0] + p[1]; };
    Covector g = fd_gradient(f, pt2(0.0, 1.0), 1e-4, dom);
    CHECK(std::abs(g.comps[0]) < 1e-6);
    CHECK(std::abs(g.comps[1] - 1.0) < 1e-9);

    CHECK_THROWS_AS(fd_gradient(f, pt2(-0.5, 0.0), 1e-4, dom), domain_error);
}

TEST_CASE("fd_two_form: Liouville one-forms and closed forms") {
    // theta = (1-a) x dy - a y dx has d theta = dx ^ dy for every a.
    for (double a : {0.25, 0.5, 1.0}) {
        OneFormField theta = [a](const Point& p) {
            Vec c(2);
            c << -a * p[1], (1.0 - a) * p[0];
            return Covector(c);
        };
        TwoForm w = fd_two_form(theta, pt2(0.7, -1.3));
        CHECK(std::abs(w.mat(0, 1) - 1.0) < 1e-7);
        CHECK(w.antisymmetry_defect() == 0.0);
    }

    // d(df) = 0 for smooth f.
    OneFormField df = [](const Point& p) {
        Vec c(2);
        c << std::cos(p[0]) * p[1], std::sin(p[0]);
        return Covector(c);
    };
    TwoForm z = fd_two_form(df, pt2(0.4, 0.9));
    CHECK(std::abs(z.mat(0, 1)) < 1e-6);

    // x dy + y dx is exact.
    OneFormField exact = [](const Point& p) {
        Vec c(2);
        c << p[1], p[0];
        return Covector(c);
    };
    CHECK(std::abs(fd_two_form(exact, pt2(1.1, 2.2)).mat(0, 1)) < 1e-7);
}

TEST_CASE("omega_dual solves the contraction equation") {
    Mat w(2, 2);
    w << 0.0, 1.0, -1.0, 0.0;
    TwoForm omega(w);

    Vec dx(2);
    dx << 1.0, 0.0;
    Vec v = omega_dual(omega, Covector(dx));
    CHECK(std::abs(v[0]) < 1e-14);
    CHECK(std::abs(v[1] + 1.0) < 1e-14);

    // xi = lambda^{1/2} at (1, 0) gives the Liouville field (1/2, 0).
    Vec lam(2);
    lam << 0.0, 0.5;
    Vec z = omega_dual(omega, Covector(lam));
    CHECK(std::abs(z[0] - 0.5) < 1e-14);
    CHECK(std::abs(z[1]) < 1e-14);

    CHECK(omega_dual(omega, Covector::zero(2)).norm() == 0.0);

    Mat sing = Mat::Zero(2, 2);
    sing(0, 1) = 1e-18;
    sing(1, 0) = -1e-18;
    CHECK_THROWS_AS(omega_dual(TwoForm(sing), Covector(dx)), degeneracy_error);
}

TEST_CASE("omega_dual residual bound on random nondegenerate forms") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Mat m(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = u(rng);
        Mat a = m - m.transpose().eval();
        a(0, 1) += 2.0;
        a(1, 0) -= 2.0;
        a(2, 3) += 2.0;
        a(3, 2) -= 2.0;
        TwoForm omega(a);
        Vec xi(4);
        for (int i = 0; i < 4; ++i) xi[i] = u(rng);
        Vec v = omega_dual(omega, Covector(xi));
        CHECK((a.transpose() * v - xi).norm() <= 1e-10 * (1.0 + xi.norm()));
    }
}

TEST_CASE("fd_jacobian: identity, linear maps, frozen flows") {
    PointMap id = [](const Point& p) { return p; };
    LinearMap j = fd_jacobian(id, pt2(0.3, 0.4));
    CHECK((j.mat - Mat::Identity(2, 2)).norm() < 1e-10);

    Mat L(2, 2);
    L << 2.0, -1.0, 0.5, 3.0;
    PointMap lin = [&L](const Point& p) { return Point(Vec(L * p.coords)); };
    CHECK((fd_jacobian(lin, pt2(1.0, -2.0)).mat - L).norm() < 1e-9);

    VectorField zero = [](double, const Point& p) { return Vec(Vec::Zero(p.dim())); };
    PointMap frozen = [&zero](const Point& p) { return rk4_flow(zero, p, 1.0, 16).end; };
    CHECK((fd_jacobian(frozen, pt2(0.1, 0.2)).mat - Mat::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("rk4_flow basics and fourth-order convergence") {
    VectorField zero = [](double, const Point& p) { return Vec(Vec::Zero(p.dim())); };
    Point p0 = pt2(0.4, -0.7);
    CHECK((rk4_flow(zero, p0, 2.0, 10).end.coords - p0.coords).norm() == 0.0);

    Vec c(2);
    c << 0.3, -0.8;
    VectorField constant = [&c](double, const Point&) { return c; };
    Point pc = rk4_flow(constant, p0, 1.0, 8).end;
    CHECK((pc.coords - (p0.coords + c)).norm() < 1e-12);

    // Rotation field: after time 2 pi the point returns; halving the step
    // size shrinks the endpoint error by about 2^4.
    VectorField rot = [](double, const Point& p) {
        Vec v(2);
        v << -p[1], p[0];
        return v;
    };
    const double T = 2.0 * M_PI;
    auto err = [&](int steps) {
        return (rk4_flow(rot, pt2(1.0, 0.0), T, steps).end.coords - pt2(1.0, 0.0).coords).norm();
    };
    const double e1 = err(64), e2 = err(128);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);

    // Escape detection.
    Vec floors(2);
    floors << 0.0, -std::numeric_limits<double>::infinity();
    VectorField down = [](double, const Point&) {
        Vec v(2);
        v << -1.0, 0.0;
        return v;
    };
    CHECK_THROWS_AS(rk4_flow(down, pt2(0.1, 0.0), 1.0, 100, StencilDomain::with_floors(floors)),
                    domain_error);
}

TEST_CASE("Richardson order check for the fd operators") {
    // Smooth analytic field with rich derivatives.
    ScalarField f = [](const Point& p) { return std::sin(1.3 * p[0]) * std::exp(0.7 * p[1]); };
    Point p = pt2(0.37, 0.81);
    const double exact0 = 1.3 * std::cos(1.3 * 0.37) * std::exp(0.7 * 0.81);
    auto err_at = [&](double h) {
        return std::abs(fd_gradient(f, p, h).comps[0] - exact0);
    };
    const double r = err_at(2e-2) / err_at(1e-2);
    CHECK(r > 3.5);
    CHECK(r < 4.5);

    OneFormField theta = [](const Point& q) {
        Vec c(2);
        c << std::sin(q[1]), q[0] * q[0] * q[1];
        return Covector(c);
    };
    const double exact = 2.0 * 0.37 * 0.81 - std::cos(0.81);
    auto err2 = [&](double h) { return std::abs(fd_two_form(theta, p, h).mat(0, 1) - exact); };
    const double r2 = err2(2e-2) / err2(1e-2);
    CHECK(r2 > 3.5);
    CHECK(r2 < 4.5);
}
