#include <cmath>
#include <random>

#include <doctest.h>

#include "thermistor/coupler.hpp"
#include "thermistor/elliptic.hpp"
#include "thermistor/errors.hpp"
#include "test_helpers.hpp"

using namespace thermistor;
using thermistor::testing::reference_config;

namespace {

bool bitwise_equal(const Field& a, const Field& b) {
    if (a.size() != b.size()) return false;
    for (int k = 0; k < a.size(); ++k)
        if (a[k] != b[k]) return false;
    return true;
}

}  // namespace

TEST_SUITE_BEGIN("coupler");

TEST_CASE("constant sigma makes the map independent of v") {
    SolverConfig cfg = reference_config();
    cfg.sigma = ConductivityModel::constant(1.0);
    Field u_old(cfg.grid, 0.0);
    Field v1 = sample(cfg.grid, [](double x, double) { return x * x; });
    Field v2 = sample(cfg.grid, [](double x, double) { return 3.0 - x; });
    BResult r1 = apply_B(v1, cfg.dt, cfg.dt, u_old, cfg);
    BResult r2 = apply_B(v2, cfg.dt, cfg.dt, u_old, cfg);
    CHECK(bitwise_equal(r1.u, r2.u));
    CHECK(bitwise_equal(r1.phi, r2.phi));
}

TEST_CASE("constant potential data gives a pure heat step") {
    SolverConfig cfg = reference_config();
    cfg.bdata.phi0 = [](double, double, double) { return 0.75; };
    Field u_old = sample(cfg.grid, [](double x, double) { return x * (1.0 - x); });
    BResult r = apply_B(u_old, cfg.dt, cfg.dt, u_old, cfg);
    for (int k = 0; k < r.phi.size(); ++k) CHECK(r.phi[k] == doctest::Approx(0.75).epsilon(1e-12));
    Field zero(cfg.grid, 0.0);
    StepOptions opts;
    opts.tol = cfg.parabolic_tol;
    Field heat = implicit_euler_step(u_old, zero, cfg.dt, zero, opts);
    for (int k = 0; k < r.u.size(); ++k) CHECK(r.u[k] == doctest::Approx(heat[k]).epsilon(1e-10));
}

TEST_CASE("reference benchmark map keeps u >= 0 and |phi| <= 1") {
    SolverConfig cfg = reference_config();
    Field u_old(cfg.grid, 0.0);
    BResult r = apply_B(u_old, cfg.dt, cfg.dt, u_old, cfg);
    CHECK(r.u.min() >= -1e-12);
    CHECK(r.phi.max_abs() <= 1.0 + 1e-8);
}

TEST_CASE("picard converges in one comparison when the map ignores v") {
    SolverConfig cfg = reference_config();
    cfg.sigma = ConductivityModel::constant(1.0);
    SimState s0 = initial_state(cfg);
    SimState s1 = picard_advance(s0, cfg.dt, cfg);
    CHECK(s1.picard_iters_last == 1);

    SolverConfig cfg2 = reference_config();
    cfg2.bdata.phi0 = [](double, double, double) { return 2.0; };
    SimState t0 = initial_state(cfg2);
    SimState t1 = picard_advance(t0, cfg2.dt, cfg2);
    CHECK(t1.picard_iters_last == 1);
}

TEST_CASE("picard on the reference benchmark stays under 10 iterations") {
    SolverConfig cfg = reference_config();
    SimState s = initial_state(cfg);
    for (int step = 0; step < 5; ++step) {
        s = picard_advance(s, cfg.dt, cfg);
        CHECK(s.picard_iters_last <= 10);
    }
    CHECK(s.t == doctest::Approx(5 * cfg.dt));
}

TEST_CASE("picard nonconvergence names the remedy") {
    SolverConfig cfg = reference_config();
    cfg.picard_max = 1;
    cfg.picard_tol = 1e-300;  // unattainable
    SimState s = initial_state(cfg);
    CHECK_THROWS_WITH_AS(picard_advance(s, cfg.dt, cfg),
                         doctest::Contains("reduce dt"), NonconvergenceError);
}

TEST_CASE("fixed point satisfies both discrete equations") {
    SolverConfig cfg = reference_config();
    cfg.picard_tol = 1e-12;
    cfg.elliptic_tol = 1e-12;
    SimState s0 = initial_state(cfg);
    SimState s1 = picard_advance(s0, cfg.dt, cfg);

    // Elliptic residual with sigma evaluated at the accepted u.
    Field sig(cfg.grid);
    for (int k = 0; k < sig.size(); ++k) sig[k] = cfg.sigma.eval(std::max(0.0, s1.u[k]));
    Field phi_bc = sample(cfg.grid, [](double x, double) { return x; });
    LinearSystem sys = assemble(sigma_faces(sig), phi_bc);
    std::vector<double> x(sys.A.n), ax(sys.A.n);
    for (int i = 0; i < sys.A.n; ++i) x[i] = s1.phi[sys.interior_nodes[i]];
    sys.A.apply(x, ax);
    double rnorm = 0.0, bnorm = 0.0;
    for (int i = 0; i < sys.A.n; ++i) {
        rnorm += (ax[i] - sys.rhs[i]) * (ax[i] - sys.rhs[i]);
        bnorm += sys.rhs[i] * sys.rhs[i];
    }
    CHECK(std::sqrt(rnorm) <= 10.0 * cfg.elliptic_tol * std::sqrt(bnorm));

    // Implicit-Euler residual with the stored pair.
    Field q = joule_density(sig, s1.phi, phi_bc);
    Field lap = laplacian_apply(s1.u, Field(cfg.grid, 0.0));
    double resid = 0.0;
    const GridSpec& g = cfg.grid;
    for (int i = 1; i < g.nx - 1; ++i) {
        const int k = g.node_index(i, 0);
        resid = std::max(resid,
                         std::abs(s1.u[k] - cfg.dt * lap[k] - s0.u[k] - cfg.dt * q[k]));
    }
    CHECK(resid <= 10.0 * cfg.picard_tol);
}

TEST_CASE("zero-length run returns the initial state only") {
    SolverConfig cfg = reference_config();
    cfg.t_final = 0.0;
    RunResult res = run_simulation(cfg);
    CHECK(res.status == RunStatus::Completed);
    CHECK(res.traj.states.size() == 1);
    CHECK(res.traj.states[0].t == 0.0);
    CHECK(res.traj.reports.size() == 1);
}

TEST_CASE("unit sigma run approaches x(1-x)/2 monotonically") {
    SolverConfig cfg = reference_config(41, 5e-3, 0.8);
    cfg.sigma = ConductivityModel::constant(1.0);
    RunResult res = run_simulation(cfg);
    REQUIRE(res.status == RunStatus::Completed);
    const GridSpec& g = cfg.grid;
    double prev_gap = 1e300;
    for (const SimState& s : res.traj.states) {
        double gap = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.node_x(i);
            gap = std::max(gap, std::abs(s.u.at(i, 0) - 0.5 * x * (1.0 - x)));
        }
        CHECK(gap <= prev_gap * (1.0 + 1e-10));
        prev_gap = gap;
    }
    CHECK(prev_gap <= 2e-3);
}

TEST_CASE("reference run honors the trajectory invariants") {
    SolverConfig cfg = reference_config(41, 1e-3, 0.05);
    RunResult res = run_simulation(cfg);
    REQUIRE(res.status == RunStatus::Completed);
    CHECK(res.traj.violations.empty());
    for (const SimState& s : res.traj.states) {
        CHECK(comparison_floor(s.u) <= 1e-12);
        CHECK(s.phi.max_abs() <= 1.0 + 1e-8);
    }
    for (const EstimateReport& r : res.traj.reports) {
        CHECK(r.all_finite());
        CHECK(r.joule_energy <= r.joule_energy_bc * (1.0 + 1e-8));
    }
}

TEST_CASE("identical configs march identically") {
    SolverConfig cfg = reference_config(31, 2e-3, 0.02);
    RunResult a = run_simulation(cfg);
    RunResult b = run_simulation(cfg);
    REQUIRE(a.traj.states.size() == b.traj.states.size());
    for (size_t i = 0; i < a.traj.states.size(); ++i) {
        CHECK(bitwise_equal(a.traj.states[i].u, b.traj.states[i].u));
        CHECK(bitwise_equal(a.traj.states[i].phi, b.traj.states[i].phi));
    }
}

TEST_CASE("homotopy sweep") {
    SolverConfig cfg = reference_config(31, 2e-3, 0.02);
    const std::vector<double> eps = {0.25, 0.5, 0.75, 1.0};
    auto entries = homotopy_sweep(cfg, eps, 1);
    REQUIRE(entries.size() == 4);

    // eps = 1 reproduces the plain run bit for bit.
    RunResult base = run_simulation(cfg);
    const Trajectory& t1 = entries[3].result.traj;
    REQUIRE(t1.states.size() == base.traj.states.size());
    for (size_t i = 0; i < t1.states.size(); ++i)
        CHECK(bitwise_equal(t1.states[i].u, base.traj.states[i].u));

    // Uniform bound, monotone in eps up to slack.
    for (const SweepEntry& e : entries) {
        CHECK(e.status == RunStatus::Completed);
        CHECK(std::isfinite(e.u_sup));
        CHECK(e.u_sup <= entries[3].u_sup * 1.01 + 1e-14);
    }
    for (size_t i = 1; i < entries.size(); ++i)
        CHECK(entries[i - 1].u_sup <= entries[i].u_sup * 1.01 + 1e-14);

    // Thread-count invariance.
    auto threaded = homotopy_sweep(cfg, eps, 3);
    for (size_t i = 0; i < entries.size(); ++i) {
        CHECK(threaded[i].u_sup == entries[i].u_sup);
        CHECK(bitwise_equal(threaded[i].result.traj.states.back().u,
                            entries[i].result.traj.states.back().u));
    }

    CHECK_THROWS_AS(homotopy_sweep(cfg, {1.5}, 1), ArgumentError);
}

TEST_CASE("slab criterion arithmetic") {
    SlabCriterion s = slab_criterion(0.01, 2.0, 1.0);
    CHECK(s.tau0 == doctest::Approx(50.0).epsilon(1e-13));
    CHECK(s.g_min == doctest::Approx(-24.0).epsilon(1e-13));
    CHECK(s.cont1_ok);

    s = slab_criterion(1.0, 2.0, 1.0);
    CHECK(s.tau0 == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.g_min == doctest::Approx(0.75).epsilon(1e-14));
    CHECK_FALSE(s.cont1_ok);

    CHECK_THROWS_AS(slab_criterion(1.0, 1.0, 1.0), ArgumentError);

    // Closed form of the minimum value.
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> eps_d(0.01, 2.0), b_d(1.2, 4.0), c_d(0.1, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double eps = eps_d(rng), b = b_d(rng), c = c_d(rng);
        SlabCriterion r = slab_criterion(eps, b, c);
        const double closed = c - eps * (b - 1.0) / std::pow(eps * b, b / (b - 1.0));
        CHECK(std::abs(r.g_min - closed) <= 1e-12 * (1.0 + std::abs(closed)));
    }
}

TEST_CASE("halving dt changes u(T) at first order") {
    const double T = 0.2;
    std::vector<double> dts = {T / 25, T / 50, T / 100, T / 200};
    std::vector<Field> finals;
    for (double dt : dts) {
        SolverConfig cfg = reference_config(41, dt, T);
        cfg.out.cadence = 1 << 20;
        RunResult res = run_simulation(cfg);
        REQUIRE(res.status == RunStatus::Completed);
        finals.push_back(res.traj.states.back().u);
    }
    std::vector<double> diffs;
    for (size_t k = 0; k + 1 < finals.size(); ++k) {
        double d = 0.0;
        for (int i = 0; i < finals[k].size(); ++i)
            d = std::max(d, std::abs(finals[k][i] - finals[k + 1][i]));
        diffs.push_back(d);
    }
    std::vector<double> hs(dts.begin(), dts.end() - 1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < diffs.size(); ++i) {
        const double lx = std::log(hs[i]), ly = std::log(diffs[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double n = static_cast<double>(diffs.size());
    const double order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(order >= 0.8);
}

TEST_CASE("exponential moment sup is stable under dt refinement") {
    double prev_sup = -1.0;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        SolverConfig cfg = reference_config(41, dt, 0.2);
        cfg.out.cadence = 4;
        RunResult res = run_simulation(cfg);
        REQUIRE(res.status == RunStatus::Completed);
        double sup = 0.0;
        for (const EstimateReport& r : res.traj.reports) sup = std::max(sup, r.exp_moment);
        if (prev_sup > 0.0) {
            CHECK(sup <= 2.0 * prev_sup);
            CHECK(prev_sup <= 2.0 * sup);
        }
        prev_sup = sup;
    }
}

TEST_CASE("slab bookkeeping restarts the accumulators") {
    SolverConfig cfg = reference_config(21, 0.05, 0.3);
    cfg.slab_t = 0.1;
    RunResult res = run_simulation(cfg);
    REQUIRE(res.status == RunStatus::Completed);
    CHECK(res.traj.states.back().slab_index == 2);
    // Cumulative moment drops back after each slab boundary.
    double prev = 0.0;
    bool saw_reset = false;
    for (const EstimateReport& r : res.traj.reports) {
        if (r.mixed_moment < prev - 1e-18) saw_reset = true;
        prev = r.mixed_moment;
    }
    CHECK(saw_reset);
}

TEST_SUITE_END();
