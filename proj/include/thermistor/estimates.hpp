// Runtime monitors for the a priori bounds the solver is expected to obey:
// the elliptic maximum principle defect, Joule energies, exponential
// moments of the temperature, gradient sup norms, the level-set decay
// sequence, and the standalone recursion/interpolation lemma checkers.

#ifndef THERMISTOR_ESTIMATES_HPP
#define THERMISTOR_ESTIMATES_HPP

#include <vector>

#include "thermistor/conductivity.hpp"
#include "thermistor/grid.hpp"

namespace thermistor {

struct SimState;
struct SolverConfig;

// Snapshot of every monitored functional at one time. Space integrals use
// the trapezoid nodal quadrature; exp(m u) is flagged (+inf sentinel,
// overflow = true) once m*u exceeds 700 instead of crashing.
struct EstimateReport {
    double t = 0.0;
    double phi_max_defect = 0.0;   // max(0, ||phi||_inf - ||phi0||_inf)
    double joule_energy = 0.0;     // int sigma |grad phi|^2
    double joule_energy_bc = 0.0;  // same functional on the phi0 extension
    double exp_moment = 0.0;       // int e^{m u} dx
    double mixed_moment = 0.0;     // int_0^t int e^{m u} |grad u|^2, per slab
    double grad_u_sup = 0.0;
    double grad_phi_sup = 0.0;
    double coeff_sup = 0.0;        // || sigma'(u)/sigma(u) * grad u ||_inf
    double u_sup = 0.0;
    double a2_worst = 0.0;
    int picard_iters = 0;
    bool overflow = false;

    bool all_finite() const;
};

// Running accumulators that live longer than one report; reset at slab
// boundaries.
struct EstimateAccumulator {
    double mixed_moment = 0.0;
    void reset() { mixed_moment = 0.0; }
    // Left-endpoint contribution of the step starting at this state.
    void add_step(const SimState& state, const SolverConfig& cfg, double dt);
};

EstimateReport report(const SimState& state, const SolverConfig& cfg,
                      const EstimateAccumulator* acc = nullptr);

// Level-set truncation sequence of w at levels k_n = k - k/2^{n+1}:
// y_n = (int int [(w - k_n)^+]^{2 ell})^{1/ell} with the space-time
// measure of {w >= k_n} alongside.
struct LevelSequence {
    double k = 0.0;
    std::vector<double> k_n;
    std::vector<double> y_n;
    std::vector<double> a_n;  // level-set measures
    bool decayed = false;     // tail fell below 1e-6 * y_0
};

// snapshots are w at times 0, dt, 2 dt, ...; requires k >= 2 and
// ell in (1, (N+2)/N) for the grid dimension N.
LevelSequence degiorgi_sequence(const std::vector<Field>& snapshots, double dt, double k,
                                double ell, int n_max);

// Bound trajectory h(0) e^{ct} + int_0^t g(tau) e^{c(t-tau)} dtau by
// trapezoid quadrature on t_grid (increasing from 0).
std::vector<double> gronwall_bound(double h0, double c, const std::vector<double>& g_samples,
                                   const std::vector<double>& t_grid);

// Geometric recursion y_{n+1} = c b^n y_n^{1+alpha}, iterated in log space
// so divergent orbits saturate instead of overflowing. The threshold
// c^{-1/alpha} b^{-1/alpha^2} separates decay from blow-up.
struct YnbResult {
    double threshold = 0.0;
    std::vector<double> y;
    bool converged = false;  // y_{n_max} < 1e-12
};
YnbResult ynb_check(double c, double b, double alpha, double y0, int n_max);

// Bounded recursion b_k = b0 + lambda b_{k-1}^{1+alpha}. Under the
// smallness hypothesis 2 lambda (2 b0)^alpha < 1 the sequence must stay
// below b0 / (1 - lambda (2 b0)^alpha).
struct SmallLemmaResult {
    bool hypothesis_ok = false;
    double bound = 0.0;
    std::vector<double> b;
    double sequence_max = 0.0;
    bool bounded = false;  // max <= bound (only claimed when hypothesis_ok)
};
SmallLemmaResult small_lemma_check(double b0, double lambda, double alpha, int k_max);

// ||f||_q <= eps ||f||_r + eps^{-mu} ||f||_ell with
// mu = (1/ell - 1/q)/(1/q - 1/r), discrete norms with the trapezoid
// quadrature weights. Requires 1 <= ell <= q <= r.
struct InterpResult {
    double mu = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;  // lhs <= rhs * (1 + 1e-12)
};
InterpResult interpolation_check(const Field& f, double ell, double q, double r, double eps);

// Weighted p-norm with the trapezoid quadrature weights.
double p_norm(const Field& f, double p);

}  // namespace thermistor

#endif
