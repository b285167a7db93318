#include "thermistor/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "thermistor/coupler.hpp"
#include "thermistor/errors.hpp"

namespace thermistor {
namespace oracle {

Field dense_elliptic_solve(const LinearSystem& sys) {
    const int n = sys.A.n;
    if (n > 400) throw ArgumentError("dense_elliptic_solve: n > 400");

    std::vector<double> M(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> b = sys.rhs;
    for (int i = 0; i < n; ++i)
        for (int k = sys.A.row_ptr[i]; k < sys.A.row_ptr[i + 1]; ++k)
            M[static_cast<size_t>(i) * n + sys.A.col[k]] = sys.A.val[k];

    for (int p = 0; p < n; ++p) {
        int piv = p;
        double best = std::abs(M[static_cast<size_t>(p) * n + p]);
        for (int r = p + 1; r < n; ++r) {
            const double cand = std::abs(M[static_cast<size_t>(r) * n + p]);
            if (cand > best) {
                best = cand;
                piv = r;
            }
        }
        if (best == 0.0) throw ArgumentError("dense_elliptic_solve: singular matrix");
        if (piv != p) {
            for (int c = 0; c < n; ++c)
                std::swap(M[static_cast<size_t>(p) * n + c], M[static_cast<size_t>(piv) * n + c]);
            std::swap(b[static_cast<size_t>(p)], b[static_cast<size_t>(piv)]);
        }
        const double d = M[static_cast<size_t>(p) * n + p];
        for (int r = p + 1; r < n; ++r) {
            const double f = M[static_cast<size_t>(r) * n + p] / d;
            if (f == 0.0) continue;
            M[static_cast<size_t>(r) * n + p] = 0.0;
            for (int c = p + 1; c < n; ++c)
                M[static_cast<size_t>(r) * n + c] -= f * M[static_cast<size_t>(p) * n + c];
            b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(p)];
        }
    }
    std::vector<double> x(static_cast<size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<size_t>(r)];
        for (int c = r + 1; c < n; ++c)
            s -= M[static_cast<size_t>(r) * n + c] * x[static_cast<size_t>(c)];
        x[static_cast<size_t>(r)] = s / M[static_cast<size_t>(r) * n + r];
    }

    Field phi = sys.boundary_values;
    for (size_t row = 0; row < sys.interior_nodes.size(); ++row)
        phi[sys.interior_nodes[row]] = x[row];
    return phi;
}

Field explicit_reference(const Field& u0, const SpaceTimeFn& source, const SpaceTimeFn& bc,
                         double dt_fine, double T) {
    const GridSpec& g = u0.grid;
    if (!(dt_fine > 0.0)) throw ArgumentError("explicit_reference: dt_fine must be positive");
    const double cfl_limit = g.h * g.h / 4.0;
    if (dt_fine > cfl_limit * (1.0 + 1e-12))
        throw ArgumentError("explicit_reference: dt_fine " + std::to_string(dt_fine) +
                            " violates the CFL bound " + std::to_string(cfl_limit));

    Field u = u0;
    double t = 0.0;
    const long n_full = static_cast<long>(std::floor(T / dt_fine + 1e-9));
    double remainder = T - static_cast<double>(n_full) * dt_fine;
    if (remainder < dt_fine * 1e-9) remainder = 0.0;
    long step = 0;
    while (step < n_full || (step == n_full && remainder > 0.0)) {
        const double dt = step < n_full ? dt_fine : remainder;
        const double t_next = t + dt;
        // Boundary values read from bc at the current time level.
        Field bc_now(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.on_boundary(i, j))
                    bc_now.at(i, j) = bc(g.node_x(i), g.dim == 2 ? g.node_y(j) : 0.0, t);
        const Field lap = laplacian_apply(u, bc_now);
        Field next(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.node_x(i), y = g.dim == 2 ? g.node_y(j) : 0.0;
                if (g.on_boundary(i, j))
                    next.at(i, j) = bc(x, y, t_next);
                else
                    next.at(i, j) = u.at(i, j) + dt * (lap.at(i, j) + source(x, y, t));
            }
        u = std::move(next);
        t = t_next;
        ++step;
    }
    return u;
}

ManufacturedCase mms_affine_quadratic() {
    ManufacturedCase c;
    c.id = "affine-quadratic";
    c.u_exact = [](double x, double, double) { return 0.5 * x * (1.0 - x); };
    c.phi_exact = [](double x, double, double) { return x; };
    c.u_t = [](double, double, double) { return 0.0; };
    c.lap_u = [](double, double, double) { return -1.0; };
    c.grad_phi_sq = [](double, double, double) { return 1.0; };
    // u_t - lap u = 1 and sigma |grad phi|^2 = 1, so no forcing is needed.
    c.forcing = [](double, double, double) { return 0.0; };
    c.sigma = ConductivityModel::constant(1.0);
    c.discretely_exact = true;
    return c;
}

ManufacturedCase mms_sin_decay() {
    const double pi = 3.14159265358979323846;
    ManufacturedCase c;
    c.id = "sin-decay";
    c.u_exact = [pi](double x, double, double t) { return std::exp(-t) * std::sin(pi * x); };
    c.phi_exact = [](double x, double, double) { return x; };
    c.u_t = [pi](double x, double, double t) { return -std::exp(-t) * std::sin(pi * x); };
    c.lap_u = [pi](double x, double, double t) {
        return -pi * pi * std::exp(-t) * std::sin(pi * x);
    };
    c.grad_phi_sq = [](double, double, double) { return 1.0; };
    c.forcing = [pi](double x, double, double t) {
        return (pi * pi - 1.0) * std::exp(-t) * std::sin(pi * x) - 1.0;
    };
    c.sigma = ConductivityModel::constant(1.0);
    return c;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ArgumentError("loglog_slope: need >= 2 matching samples");
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

SolverConfig case_config(const ManufacturedCase& mcase, int nx, double dt, double T) {
    SolverConfig cfg;
    cfg.grid = GridSpec::line(nx, 1.0);
    cfg.sigma = mcase.sigma;
    cfg.bdata.u0 = mcase.u_exact;
    cfg.bdata.phi0 = mcase.phi_exact;
    cfg.extra_source = mcase.forcing;
    cfg.dt = dt;
    cfg.t_final = T;
    cfg.picard_tol = 1e-12;
    cfg.picard_max = 60;
    cfg.elliptic_tol = 1e-13;
    cfg.parabolic_tol = 1e-13;
    cfg.out.cadence = 1 << 20;  // no intermediate reports needed
    return cfg;
}

double final_error(const ManufacturedCase& mcase, int nx, double dt, double T) {
    SolverConfig cfg = case_config(mcase, nx, dt, T);
    RunResult rr = run_simulation(cfg);
    if (rr.status != RunStatus::Completed)
        throw NonconvergenceError("convergence_study: run failed: " + rr.error, 0.0, 0);
    const SimState& last = rr.traj.states.back();
    double err = 0.0;
    const GridSpec& g = cfg.grid;
    for (int i = 0; i < g.nx; ++i)
        err = std::max(err, std::abs(last.u.at(i, 0) - mcase.u_exact(g.node_x(i), 0.0, last.t)));
    return err;
}

}  // namespace

ConvergenceResult convergence_study(const ManufacturedCase& mcase, const std::vector<int>& grids,
                                    const std::vector<double>& dts) {
    if (grids.size() < 3) throw ArgumentError("convergence_study: need >= 3 grid levels");
    if (dts.size() < 3) throw ArgumentError("convergence_study: need >= 3 dt levels");
    ConvergenceResult res;

    const double T = 0.5;
    // Spatial sweep: dt tied to h^2 so the first-order time error refines
    // at the same rate as the second-order space error.
    const double h0 = 1.0 / (grids.front() - 1);
    for (int nx : grids) {
        const double h = 1.0 / (nx - 1);
        const double dt = 0.05 * (h * h) / (h0 * h0);
        res.hs.push_back(h);
        res.h_errors.push_back(final_error(mcase, nx, dt, T));
    }
    // Temporal sweep on a fine fixed grid, error against the exact
    // solution.
    const int nx_t = 201;
    for (double dt : dts) {
        res.dts.push_back(dt);
        res.dt_errors.push_back(final_error(mcase, nx_t, dt, T));
    }

    const double emax = std::max(*std::max_element(res.h_errors.begin(), res.h_errors.end()),
                                 *std::max_element(res.dt_errors.begin(), res.dt_errors.end()));
    if (emax < 1e-12) {
        res.exact = true;
        return res;
    }
    res.spatial_order = loglog_slope(res.hs, res.h_errors);
    res.temporal_order = loglog_slope(res.dts, res.dt_errors);
    return res;
}

}  // namespace oracle
}  // namespace thermistor
