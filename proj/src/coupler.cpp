#include "thermistor/coupler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "thermistor/elliptic.hpp"
#include "thermistor/errors.hpp"

namespace thermistor {

namespace {

Field boundary_sample(const GridSpec& g, const std::function<double(double, double, double)>& f,
                      double t) {
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.at(i, j) = f(g.node_x(i), g.dim == 2 ? g.node_y(j) : 0.0, t);
    return out;
}

// sigma at the clamped temperature; reports how much clamping was needed.
Field sigma_at(const Field& v, const ConductivityModel& model, double* clamp_depth) {
    Field s(v.grid);
    double depth = 0.0;
    for (int k = 0; k < v.size(); ++k) {
        const double uv = v[k];
        if (uv < 0.0) depth = std::max(depth, -uv);
        s[k] = model.eval(std::max(0.0, uv));
    }
    if (clamp_depth) *clamp_depth = depth;
    return s;
}

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (int k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace

BResult apply_B(const Field& v, double t_next, double dt, const Field& u_old,
                const SolverConfig& cfg, const Field* prev_phi,
                std::vector<std::string>* warnings) {
    const GridSpec& g = cfg.grid;
    if (!g.same_as(v.grid) || !g.same_as(u_old.grid)) throw ArgumentError("apply_B: grid mismatch");

    double clamp_depth = 0.0;
    const Field sig = sigma_at(v, cfg.sigma, &clamp_depth);
    if (clamp_depth > 1e-10 && warnings != nullptr)
        warnings->push_back("apply_B: sigma argument clamped at 0 by " +
                            std::to_string(clamp_depth) + " at t = " + std::to_string(t_next));

    const Field phi_bc = boundary_sample(g, cfg.bdata.phi0, t_next);
    LinearSystem sys = assemble(sigma_faces(sig), phi_bc, prev_phi);
    BResult out;
    out.phi = solve_spd(sys, cfg.elliptic_tol, cfg.solver_max_iter);

    Field q = joule_density(sig, out.phi, phi_bc);
    const double eps = cfg.homotopy_eps;
    if (eps != 1.0)
        for (int k = 0; k < q.size(); ++k) q[k] *= eps;
    if (cfg.extra_source) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                q.at(i, j) += cfg.extra_source(g.node_x(i), g.dim == 2 ? g.node_y(j) : 0.0, t_next);
    }

    const Field u_bc = boundary_sample(
        g, [&cfg](double x, double y, double t) { return cfg.u0_at(x, y, t); }, t_next);
    StepOptions sopt;
    sopt.tol = cfg.parabolic_tol;
    sopt.max_iter = cfg.solver_max_iter;
    sopt.warnings = warnings;
    out.u = implicit_euler_step(u_old, q, dt, u_bc, sopt);
    return out;
}

namespace {

// One Picard-resolved step of width dt, no retry logic.
SimState picard_step(const SimState& state, double dt, const SolverConfig& cfg,
                     std::vector<std::string>* warnings) {
    const double t_next = state.t + dt;
    BResult cur = apply_B(state.u, t_next, dt, state.u, cfg, &state.phi, warnings);
    int iters = 0;
    bool converged = false;
    double delta = 0.0;
    for (int k = 1; k <= cfg.picard_max; ++k) {
        BResult next = apply_B(cur.u, t_next, dt, state.u, cfg, &state.phi, warnings);
        delta = max_abs_diff(next.u, cur.u);
        cur = std::move(next);
        iters = k;
        if (delta <= cfg.picard_tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NonconvergenceError(
            "picard: no fixed point after " + std::to_string(iters) + " iterations at t = " +
                std::to_string(t_next) + " (last delta " + std::to_string(delta) +
                "); reduce dt",
            delta, iters);

    SimState out;
    out.t = t_next;
    out.u = std::move(cur.u);
    out.picard_iters_last = iters;
    out.slab_index = state.slab_index;

    // Re-solve phi with sigma at the accepted temperature so the stored
    // pair solves the elliptic equation for its own u, not for the last
    // Picard iterate.
    double clamp_depth = 0.0;
    const Field sig = sigma_at(out.u, cfg.sigma, &clamp_depth);
    const Field phi_bc = boundary_sample(cfg.grid, cfg.bdata.phi0, t_next);
    out.phi = solve_spd(assemble(sigma_faces(sig), phi_bc, &state.phi), cfg.elliptic_tol,
                        cfg.solver_max_iter);
    return out;
}

}  // namespace

SimState picard_advance(const SimState& state, double dt, const SolverConfig& cfg,
                        std::vector<std::string>* warnings) {
    if (!(dt > 0.0)) throw ArgumentError("picard_advance: dt must be positive");
    try {
        return picard_step(state, dt, cfg, warnings);
    } catch (const NonconvergenceError&) {
        if (warnings != nullptr)
            warnings->push_back("picard: retrying step at t = " + std::to_string(state.t + dt) +
                                " as two half steps");
        SimState half = picard_step(state, 0.5 * dt, cfg, warnings);
        SimState full = picard_step(half, 0.5 * dt, cfg, warnings);
        full.picard_iters_last = std::max(half.picard_iters_last, full.picard_iters_last);
        return full;
    }
}

SimState initial_state(const SolverConfig& cfg) {
    const GridSpec& g = cfg.grid;
    SimState s;
    s.t = 0.0;
    s.u = boundary_sample(g, [&cfg](double x, double y, double t) { return cfg.u0_at(x, y, t); },
                          0.0);
    double clamp_depth = 0.0;
    const Field sig = sigma_at(s.u, cfg.sigma, &clamp_depth);
    const Field phi_bc = boundary_sample(g, cfg.bdata.phi0, 0.0);
    s.phi = solve_spd(assemble(sigma_faces(sig), phi_bc), cfg.elliptic_tol, cfg.solver_max_iter);
    return s;
}

namespace {

// Invariant monitors that run every step.
void check_state(const SimState& s, const SolverConfig& cfg, std::vector<std::string>* violations) {
    const double floor = comparison_floor(s.u);
    if (floor > 1e-12)
        violations->push_back("u >= 0 violated at t = " + std::to_string(s.t) + ": min u = " +
                              std::to_string(-floor));
    const GridSpec& g = cfg.grid;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.on_boundary(i, j)) {
                const double v = cfg.bdata.phi0(g.node_x(i), g.dim == 2 ? g.node_y(j) : 0.0, s.t);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    if (s.phi.min() < lo - 1e-8 || s.phi.max() > hi + 1e-8)
        violations->push_back("phi maximum principle violated at t = " + std::to_string(s.t) +
                              ": range [" + std::to_string(s.phi.min()) + ", " +
                              std::to_string(s.phi.max()) + "] vs boundary [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
    if (!s.u.all_finite() || !s.phi.all_finite())
        violations->push_back("non-finite field at t = " + std::to_string(s.t));
}

}  // namespace

RunResult run_simulation(const SolverConfig& cfg) {
    RunResult res;
    Trajectory& traj = res.traj;
    try {
        SimState state = initial_state(cfg);
        EstimateAccumulator acc;
        const int cadence = std::max(1, cfg.out.cadence);

        check_state(state, cfg, &traj.violations);
        traj.reports.push_back(report(state, cfg, &acc));
        traj.states.push_back(state);

        // Number of dt steps plus a shorter closing step if t_final is not
        // a multiple of dt.
        const double T = cfg.t_final;
        long n_full = static_cast<long>(std::floor(T / cfg.dt + 1e-9));
        double remainder = T - static_cast<double>(n_full) * cfg.dt;
        if (remainder < cfg.dt * 1e-9) remainder = 0.0;

        long step = 0;
        while (step < n_full || (step == n_full && remainder > 0.0)) {
            const double dt = step < n_full ? cfg.dt : remainder;
            acc.add_step(state, cfg, dt);
            state = picard_advance(state, dt, cfg, &traj.warnings);
            ++step;

            // Slab bookkeeping: entering a new slab restarts the cumulative
            // accumulators.
            const int slab = static_cast<int>(std::floor((state.t - 1e-12 * std::max(1.0, state.t)) /
                                                         cfg.slab_t));
            if (slab != state.slab_index) {
                state.slab_index = slab;
                acc.reset();
            }

            const size_t pre_violations = traj.violations.size();
            check_state(state, cfg, &traj.violations);
            if (step % cadence == 0) {
                EstimateReport rep = report(state, cfg, &acc);
                if (rep.overflow)
                    traj.violations.push_back("exp moment overflow at t = " +
                                              std::to_string(state.t));
                traj.reports.push_back(rep);
            }
            traj.states.push_back(state);

            if (cfg.out.strict && traj.violations.size() > pre_violations)
                throw InvariantViolation(traj.violations.back());
        }
        res.status = RunStatus::Completed;
    } catch (const InvariantViolation& e) {
        res.status = RunStatus::InvariantViolation;
        res.error = e.what();
    } catch (const NonconvergenceError& e) {
        res.status = RunStatus::SolverFailure;
        res.error = e.what();
    } catch (const std::exception& e) {
        res.status = RunStatus::SolverFailure;
        res.error = e.what();
    }
    return res;
}

std::vector<SweepEntry> homotopy_sweep(const SolverConfig& cfg,
                                       const std::vector<double>& eps_list, int threads) {
    for (double e : eps_list)
        if (!(e > 0.0) || e > 1.0)
            throw ArgumentError("homotopy_sweep: every eps must lie in (0, 1]");
    std::vector<SweepEntry> entries(eps_list.size());

    auto run_one = [&cfg, &eps_list, &entries](size_t idx) {
        SolverConfig local = cfg;
        local.homotopy_eps = eps_list[idx];
        local.out.dir.clear();  // callers write per-entry outputs themselves
        SweepEntry& e = entries[idx];
        e.eps = eps_list[idx];
        e.result = run_simulation(local);
        e.status = e.result.status;
        e.error = e.result.error;
        for (const SimState& s : e.result.traj.states) {
            e.u_sup = std::max(e.u_sup, s.u.max_abs());
        }
        for (const EstimateReport& r : e.result.traj.reports)
            e.grad_phi_sup = std::max(e.grad_phi_sup, r.grad_phi_sup);
    };

    if (threads <= 1) {
        for (size_t i = 0; i < eps_list.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        const int nthreads = std::min<int>(threads, static_cast<int>(eps_list.size()));
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < eps_list.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& th : pool) th.join();
    }
    return entries;
}

SlabCriterion slab_criterion(double eps_coef, double b, double c_const) {
    if (!(eps_coef > 0.0)) throw ArgumentError("slab_criterion: eps must be positive");
    if (!(b > 1.0)) throw ArgumentError("slab_criterion: b must exceed 1");
    if (!(c_const > 0.0)) throw ArgumentError("slab_criterion: c must be positive");
    SlabCriterion out;
    out.tau0 = std::pow(eps_coef * b, -1.0 / (b - 1.0));
    out.g_min = eps_coef * std::pow(out.tau0, b) - out.tau0 + c_const;
    const double lhs = (c_const + eps_coef) * std::pow(eps_coef, 1.0 / (b - 1.0));
    const double rhs = (b - 1.0) / std::pow(b, b / (b - 1.0));
    out.cont1_ok = lhs <= rhs;
    return out;
}

}  // namespace thermistor
