// Independent brute-force references the test suite measures the
// production solvers against: a dense direct elliptic solve, a forward-
// Euler time integrator, and manufactured-solution convergence studies.

#ifndef THERMISTOR_ORACLE_HPP
#define THERMISTOR_ORACLE_HPP

#include <functional>
#include <string>
#include <vector>

#include "thermistor/conductivity.hpp"
#include "thermistor/elliptic.hpp"
#include "thermistor/grid.hpp"

namespace thermistor {
namespace oracle {

using SpaceTimeFn = std::function<double(double, double, double)>;

// Gaussian elimination with partial pivoting on the expanded matrix,
// n <= 400. Deliberately shares no code with the CG path it checks.
Field dense_elliptic_solve(const LinearSystem& sys);

// Forward Euler for u_t - Lap u = source with Dirichlet data, stepped at
// dt_fine. Requires the parabolic CFL bound dt_fine <= h^2/4. Returns u
// at time T.
Field explicit_reference(const Field& u0, const SpaceTimeFn& source, const SpaceTimeFn& bc,
                         double dt_fine, double T);

// Exact pair (u, phi) plus the compensating forcing f so that
//   u_t - Lap u = sigma(u) |grad phi|^2 + f,   div(sigma(u) grad phi) = 0
// holds identically. u_t and lap_u are the analytic derivatives used to
// verify the forcing independently of any discretization.
struct ManufacturedCase {
    std::string id;
    SpaceTimeFn u_exact;
    SpaceTimeFn phi_exact;
    SpaceTimeFn forcing;
    SpaceTimeFn u_t;
    SpaceTimeFn lap_u;
    SpaceTimeFn grad_phi_sq;
    ConductivityModel sigma = ConductivityModel::constant(1.0);
    bool discretely_exact = false;  // stencil reproduces the pair exactly
};

// Steady u = x(1-x)/2, phi = x, sigma = 1: quadratic/affine, reproduced to
// machine precision by the stencils, so errors measure only roundoff.
ManufacturedCase mms_affine_quadratic();

// u = e^{-t} sin(pi x), phi = x, sigma = 1 on (0,1).
ManufacturedCase mms_sin_decay();

struct ConvergenceResult {
    std::vector<double> hs, h_errors;
    std::vector<double> dts, dt_errors;
    double spatial_order = 0.0;
    double temporal_order = 0.0;
    bool exact = false;  // all errors at roundoff; order fit skipped
};

// Runs the production coupled march on the case with its forcing
// attached. Spatial sweep holds dt proportional to h^2; temporal sweep
// fixes a fine grid. Orders are least-squares slopes of log error against
// log h / log dt.
ConvergenceResult convergence_study(const ManufacturedCase& mcase, const std::vector<int>& grids,
                                    const std::vector<double>& dts);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oracle
}  // namespace thermistor

#endif
