// The decoupling fixed-point map and the time-marching driver.
//
// One application of the map: given a temperature guess v, solve
// div(sigma(v) grad phi) = 0 with the lateral Dirichlet data, then take
// one implicit heat step with the frozen Joule source sigma(v)|grad phi|^2.
// A time step iterates the map (successive substitution) until two
// consecutive outputs agree in the max norm. The run marches in slabs,
// restarting the cumulative estimate accumulators at each slab boundary.

#ifndef THERMISTOR_COUPLER_HPP
#define THERMISTOR_COUPLER_HPP

#include <functional>
#include <string>
#include <vector>

#include "thermistor/conductivity.hpp"
#include "thermistor/estimates.hpp"
#include "thermistor/grid.hpp"
#include "thermistor/parabolic.hpp"

namespace thermistor {

struct SimState {
    double t = 0.0;
    Field u;
    Field phi;
    int picard_iters_last = 0;
    int slab_index = 0;
};

struct EstimateParams {
    double m = 0.5;          // exponent of the moment int e^{m u}
    double eps_exp = 0.1;    // epsilon of w = e^{eps u}
    double ell = 2.0;        // must lie in (1, (N+2)/N)
    std::vector<int> a2_radii = {2};
};

struct OutputControls {
    std::string dir;
    int cadence = 1;       // snapshot + estimate-report stride, in steps
    bool strict = false;   // invariant violations abort instead of warn
};

struct SolverConfig {
    GridSpec grid;
    ConductivityModel sigma = ConductivityModel::constant(1.0);
    BoundaryData bdata;
    double dt = 1e-3;
    double t_final = 1.0;
    double picard_tol = 1e-10;
    int picard_max = 50;
    std::vector<double> eps_homotopy = {1.0};
    EstimateParams est;
    OutputControls out;
    double slab_t = 1.0;        // slab length for the continuation bookkeeping
    double homotopy_eps = 1.0;  // scales the Joule source and the u boundary data
    double elliptic_tol = 1e-10;
    double parabolic_tol = 1e-13;
    int solver_max_iter = 0;    // <= 0: 10n
    // Optional extra volumetric source (x, y, t); used by manufactured-
    // solution studies. Not part of the JSON schema.
    std::function<double(double, double, double)> extra_source;

    // u boundary data including the homotopy scaling.
    double u0_at(double x, double y, double t) const { return homotopy_eps * bdata.u0(x, y, t); }
};

struct BResult {
    Field u;
    Field phi;
};

// One application of the decoupled map at time t_next. v is the
// temperature the conductivity is evaluated at; it is clamped at zero
// before evaluation (a clamp beyond 1e-10 is reported to warnings).
// prev_phi pins any fully degenerate elliptic rows; when absent they pin
// to the nearest boundary value.
BResult apply_B(const Field& v, double t_next, double dt, const Field& u_old,
                const SolverConfig& cfg, const Field* prev_phi = nullptr,
                std::vector<std::string>* warnings = nullptr);

// Advances state by dt via successive substitution. Convergence is
// ||u^{k+1} - u^k||_inf <= picard_tol between consecutive map outputs;
// picard_iters_last counts the comparisons (so a v-independent map
// converges in exactly 1). On nonconvergence the step is retried once as
// two dt/2 substeps before NonconvergenceError is thrown. The returned
// phi is re-solved with sigma at the accepted temperature so the pair
// satisfies both discrete equations to solver accuracy.
SimState picard_advance(const SimState& state, double dt, const SolverConfig& cfg,
                        std::vector<std::string>* warnings = nullptr);

struct Trajectory {
    std::vector<SimState> states;           // every accepted step, t = 0 first
    std::vector<EstimateReport> reports;    // at the configured cadence
    std::vector<std::string> warnings;
    std::vector<std::string> violations;    // invariant monitors that tripped
};

enum class RunStatus { Completed, SolverFailure, InvariantViolation };

struct RunResult {
    Trajectory traj;
    RunStatus status = RunStatus::Completed;
    std::string error;
};

// Marches from t = 0 to t_final. Never throws for step failures: the
// partial trajectory is returned with the failure recorded so callers can
// flush outputs. In strict mode a tripped invariant stops the run.
RunResult run_simulation(const SolverConfig& cfg);

// Initial state: u sampled from the (scaled) initial data, phi solved with
// sigma(u(0)).
SimState initial_state(const SolverConfig& cfg);

struct SweepEntry {
    double eps = 1.0;
    RunStatus status = RunStatus::Completed;
    std::string error;
    double u_sup = 0.0;        // sup over the trajectory of ||u||_inf
    double grad_phi_sup = 0.0;
    RunResult result;
};

// Runs the simulation once per epsilon with the source and u boundary
// data scaled by it. Per-entry failures are recorded and the sweep
// continues. Entries may be computed on up to `threads` std::threads;
// results are merged in eps order, so the output is identical for every
// thread count.
std::vector<SweepEntry> homotopy_sweep(const SolverConfig& cfg,
                                       const std::vector<double>& eps_list, int threads = 1);

// Small-time continuation criterion for g(tau) = eps tau^b - tau + c:
// the minimizer tau0 = (eps b)^{-1/(b-1)}, the minimum value g(tau0), and
// whether (c + eps) eps^{1/(b-1)} <= (b-1)/b^{b/(b-1)} holds.
struct SlabCriterion {
    double tau0 = 0.0;
    double g_min = 0.0;
    bool cont1_ok = false;
};
SlabCriterion slab_criterion(double eps_coef, double b, double c_const);

}  // namespace thermistor

#endif
