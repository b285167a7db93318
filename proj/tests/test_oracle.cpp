#include <cmath>
#include <random>

#include <doctest.h>

#include "thermistor/errors.hpp"
#include "thermistor/oracle.hpp"
#include "thermistor/parabolic.hpp"

using namespace thermistor;

TEST_SUITE_BEGIN("oracle");

TEST_CASE("dense solve on the hand case") {
    GridSpec g = GridSpec::line(5, 1.0);
    Field sig(g, 1.0);
    Field bc = sample(g, [](double x, double) { return x; });
    Field phi = oracle::dense_elliptic_solve(assemble(sigma_faces(sig), bc));
    CHECK(phi.at(1, 0) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(phi.at(2, 0) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(phi.at(3, 0) == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("dense solve respects identity regularization") {
    GridSpec g = GridSpec::line(5, 1.0);
    Field sig(g, 0.0);
    Field bc = sample(g, [](double x, double) { return 1.0 + x; });
    Field phi = oracle::dense_elliptic_solve(assemble(sigma_faces(sig), bc));
    CHECK(phi.at(1, 0) == doctest::Approx(1.0));
    CHECK(phi.at(3, 0) == doctest::Approx(2.0));
}

TEST_CASE("dense solve rejects oversized systems") {
    GridSpec g = GridSpec::line(500, 1.0);
    Field sig(g, 1.0), bc(g, 0.0);
    CHECK_THROWS_AS(oracle::dense_elliptic_solve(assemble(sigma_faces(sig), bc)), ArgumentError);
}

TEST_CASE("explicit reference basics") {
    GridSpec g = GridSpec::line(21, 1.0);
    Field zero(g, 0.0);
    auto zf = [](double, double, double) { return 0.0; };
    Field u = oracle::explicit_reference(zero, zf, zf, g.h * g.h / 5.0, 0.1);
    for (int k = 0; k < u.size(); ++k) CHECK(u[k] == 0.0);

    // Constant source settles on x(1-x)/2.
    auto one = [](double, double, double) { return 1.0; };
    u = oracle::explicit_reference(zero, one, zf, g.h * g.h / 5.0, 3.0);
    CHECK(u.max() == doctest::Approx(0.125).epsilon(2e-3));

    CHECK_THROWS_AS(oracle::explicit_reference(zero, zf, zf, g.h * g.h, 0.1), ArgumentError);
}

TEST_CASE("implicit stepper is first order against the explicit reference") {
    GridSpec g = GridSpec::line(41, 1.0);
    auto src = [](double x, double, double t) { return std::exp(-0.5 * t) * (1.0 + x); };
    auto zf = [](double, double, double) { return 0.0; };
    Field u0 = sample(g, [](double x, double) { return x * (1.0 - x); });
    const double T = 0.25;
    Field ref = oracle::explicit_reference(u0, src, zf, g.h * g.h / 5.0, T);

    std::vector<double> dts = {T / 10, T / 20, T / 40, T / 80}, errs;
    for (double dt : dts) {
        Field u = u0;
        double t = 0.0;
        const long n = std::lround(T / dt);
        for (long s = 0; s < n; ++s) {
            Field q = sample(g, [&](double x, double y) { return src(x, y, t); });
            Field zero(g, 0.0);
            u = implicit_euler_step(u, q, dt, zero);
            t += dt;
        }
        double e = 0.0;
        for (int k = 0; k < u.size(); ++k) e = std::max(e, std::abs(u[k] - ref[k]));
        errs.push_back(e);
    }
    const double order = oracle::loglog_slope(dts, errs);
    CHECK(order >= 0.8);
    CHECK(order <= 1.3);
}

TEST_CASE("manufactured forcing balances the continuous operators") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> xd(0.0, 1.0), td(0.0, 1.0);
    for (const auto& mcase : {oracle::mms_affine_quadratic(), oracle::mms_sin_decay()}) {
        for (int k = 0; k < 100; ++k) {
            const double x = xd(rng), t = td(rng);
            const double u = mcase.u_exact(x, 0.0, t);
            const double residual = mcase.u_t(x, 0.0, t) - mcase.lap_u(x, 0.0, t) -
                                    mcase.sigma.eval(std::max(0.0, u)) *
                                        mcase.grad_phi_sq(x, 0.0, t) -
                                    mcase.forcing(x, 0.0, t);
            CHECK(std::abs(residual) <= 1e-8);
        }
    }
}

TEST_CASE("quadratic case is discretely exact") {
    oracle::ConvergenceResult r = oracle::convergence_study(oracle::mms_affine_quadratic(),
                                                            {11, 21, 41}, {0.1, 0.05, 0.025});
    CHECK(r.exact);
}

TEST_CASE("sin case converges at the expected orders") {
    oracle::ConvergenceResult r = oracle::convergence_study(
        oracle::mms_sin_decay(), {11, 21, 41, 81}, {0.05, 0.025, 0.0125, 0.00625});
    CHECK(r.exact == false);
    CHECK(std::abs(r.spatial_order - 2.0) <= 0.2);
    CHECK(std::abs(r.temporal_order - 1.0) <= 0.15);
}

TEST_CASE("convergence study wants enough levels") {
    CHECK_THROWS_AS(oracle::convergence_study(oracle::mms_sin_decay(), {11, 21}, {0.1, 0.05, 0.025}),
                    ArgumentError);
}

TEST_SUITE_END();
