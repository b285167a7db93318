#include "thermistor/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "thermistor/coupler.hpp"
#include "thermistor/elliptic.hpp"
#include "thermistor/errors.hpp"

namespace thermistor {

namespace {

constexpr double kExpOverflowArg = 700.0;

// sigma(u) sampled nodewise with the nonnegativity clamp used everywhere
// in the monitors (the solvers report clamping separately).
Field sigma_of(const Field& u, const ConductivityModel& model) {
    Field s(u.grid);
    for (int k = 0; k < u.size(); ++k) s[k] = model.eval(std::max(0.0, u[k]));
    return s;
}

Field boundary_field(const GridSpec& g, const std::function<double(double, double, double)>& f,
                     double t) {
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.at(i, j) = f(g.node_x(i), g.dim == 2 ? g.node_y(j) : 0.0, t);
    return out;
}

double boundary_abs_max(const Field& f) {
    const GridSpec& g = f.grid;
    double m = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.on_boundary(i, j)) m = std::max(m, std::abs(f.at(i, j)));
    return m;
}

}  // namespace

bool EstimateReport::all_finite() const {
    return std::isfinite(phi_max_defect) && std::isfinite(joule_energy) &&
           std::isfinite(joule_energy_bc) && std::isfinite(exp_moment) &&
           std::isfinite(mixed_moment) && std::isfinite(grad_u_sup) &&
           std::isfinite(grad_phi_sup) && std::isfinite(coeff_sup) && std::isfinite(u_sup) &&
           std::isfinite(a2_worst);
}

void EstimateAccumulator::add_step(const SimState& state, const SolverConfig& cfg, double dt) {
    const Field w = quadrature_weights(state.u.grid);
    const Field ubc = boundary_field(state.u.grid, [&cfg](double x, double y, double t) {
        return cfg.u0_at(x, y, t);
    }, state.t);
    const Field gu = grad_sq(state.u, ubc);
    const double m = cfg.est.m;
    double integral = 0.0;
    for (int k = 0; k < state.u.size(); ++k) {
        const double arg = m * state.u[k];
        integral += w[k] * (arg > kExpOverflowArg ? std::numeric_limits<double>::infinity()
                                                  : std::exp(arg)) *
                    gu[k];
    }
    mixed_moment += dt * integral;
}

EstimateReport report(const SimState& state, const SolverConfig& cfg,
                      const EstimateAccumulator* acc) {
    const GridSpec& g = state.u.grid;
    EstimateReport r;
    r.t = state.t;
    r.picard_iters = state.picard_iters_last;

    const Field phi_bc = boundary_field(g, cfg.bdata.phi0, state.t);
    const Field u_bc = boundary_field(g, [&cfg](double x, double y, double t) {
        return cfg.u0_at(x, y, t);
    }, state.t);

    // Maximum-principle defect against the lateral boundary samples.
    r.phi_max_defect = std::max(0.0, state.phi.max_abs() - boundary_abs_max(phi_bc));

    const Field sig = sigma_of(state.u, cfg.sigma);
    const FaceCoeffs faces = sigma_faces(sig);
    r.joule_energy = dirichlet_energy(faces, state.phi);
    r.joule_energy_bc = dirichlet_energy(faces, phi_bc);

    const Field w = quadrature_weights(g);
    const double m = cfg.est.m;
    r.exp_moment = 0.0;
    for (int k = 0; k < state.u.size(); ++k) {
        const double arg = m * state.u[k];
        if (arg > kExpOverflowArg) {
            r.exp_moment = std::numeric_limits<double>::infinity();
            r.overflow = true;
            break;
        }
        r.exp_moment += w[k] * std::exp(arg);
    }
    if (acc != nullptr) r.mixed_moment = acc->mixed_moment;

    const Field gu = grad_sq(state.u, u_bc);
    const Field gphi = grad_sq(state.phi, phi_bc);
    double gu_max = 0.0, gphi_max = 0.0, coeff_max = 0.0;
    for (int k = 0; k < state.u.size(); ++k) {
        gu_max = std::max(gu_max, gu[k]);
        gphi_max = std::max(gphi_max, gphi[k]);
        const double uc = std::max(0.0, state.u[k]);
        const double ratio = std::abs(cfg.sigma.deriv(uc)) / cfg.sigma.eval(uc);
        coeff_max = std::max(coeff_max, ratio * std::sqrt(gu[k]));
    }
    r.grad_u_sup = std::sqrt(gu_max);
    r.grad_phi_sup = std::sqrt(gphi_max);
    r.coeff_sup = coeff_max;
    r.u_sup = state.u.max_abs();
    r.a2_worst = a2_diagnostic(sig, cfg.est.a2_radii);
    return r;
}

LevelSequence degiorgi_sequence(const std::vector<Field>& snapshots, double dt, double k,
                                double ell, int n_max) {
    if (snapshots.empty()) throw ArgumentError("degiorgi_sequence: no snapshots");
    if (!(dt > 0.0)) throw ArgumentError("degiorgi_sequence: dt must be positive");
    if (!(k >= 2.0))
        throw ArgumentError("degiorgi_sequence: k must be >= 2 (k/2 must dominate 1)");
    const int dim = snapshots.front().grid.dim;
    const double ell_max = (dim + 2.0) / dim;
    if (!(ell > 1.0) || !(ell < ell_max))
        throw ArgumentError("degiorgi_sequence: ell must lie in (1, " + std::to_string(ell_max) +
                            ") for dimension " + std::to_string(dim));
    if (n_max < 0) throw ArgumentError("degiorgi_sequence: n_max must be >= 0");

    const Field w = quadrature_weights(snapshots.front().grid);
    LevelSequence seq;
    seq.k = k;
    for (int n = 0; n <= n_max; ++n) {
        const double kn = k - k / std::pow(2.0, n + 1);
        double integral = 0.0;   // int int [(w - k_n)^+]^{2 ell}
        double measure = 0.0;    // |{w >= k_n}|
        // Left-endpoint rule in time: the last snapshot closes the final
        // interval and carries no weight of its own.
        const size_t steps = snapshots.size() == 1 ? 1 : snapshots.size() - 1;
        for (size_t s = 0; s < steps; ++s) {
            const Field& f = snapshots[s];
            if (!f.grid.same_as(snapshots.front().grid))
                throw ArgumentError("degiorgi_sequence: snapshots on different grids");
            for (int idx = 0; idx < f.size(); ++idx) {
                const double excess = f[idx] - kn;
                if (f[idx] >= kn) measure += w[idx] * dt;
                if (excess > 0.0) integral += w[idx] * dt * std::pow(excess, 2.0 * ell);
            }
        }
        seq.k_n.push_back(kn);
        seq.y_n.push_back(std::pow(integral, 1.0 / ell));
        seq.a_n.push_back(measure);
    }
    seq.decayed = seq.y_n.back() <= 1e-6 * std::max(seq.y_n.front(), 1e-300);
    return seq;
}

std::vector<double> gronwall_bound(double h0, double c, const std::vector<double>& g_samples,
                                   const std::vector<double>& t_grid) {
    if (t_grid.empty() || t_grid.front() != 0.0)
        throw ArgumentError("gronwall_bound: t_grid must start at 0");
    if (g_samples.size() != t_grid.size())
        throw ArgumentError("gronwall_bound: g_samples and t_grid lengths differ");
    for (size_t i = 0; i + 1 < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i + 1]))
            throw ArgumentError("gronwall_bound: t_grid must increase");

    // h(0) e^{ct} + e^{ct} * int_0^t g(tau) e^{-c tau} dtau, trapezoid on
    // the damped integrand.
    std::vector<double> bound(t_grid.size());
    double integral = 0.0;
    bound[0] = h0;
    for (size_t i = 1; i < t_grid.size(); ++i) {
        const double dta = t_grid[i] - t_grid[i - 1];
        const double f_prev = g_samples[i - 1] * std::exp(-c * t_grid[i - 1]);
        const double f_cur = g_samples[i] * std::exp(-c * t_grid[i]);
        integral += 0.5 * dta * (f_prev + f_cur);
        bound[i] = h0 * std::exp(c * t_grid[i]) + std::exp(c * t_grid[i]) * integral;
    }
    return bound;
}

YnbResult ynb_check(double c, double b, double alpha, double y0, int n_max) {
    if (!(b > 1.0)) throw ArgumentError("ynb_check: b must exceed 1");
    if (!(c > 0.0) || !(alpha > 0.0)) throw ArgumentError("ynb_check: c, alpha must be positive");
    if (y0 < 0.0) throw ArgumentError("ynb_check: y0 must be nonnegative");
    if (n_max < 0) throw ArgumentError("ynb_check: n_max must be >= 0");

    YnbResult res;
    res.threshold = std::pow(c, -1.0 / alpha) * std::pow(b, -1.0 / (alpha * alpha));

    // In log coordinates the recursion is affine,
    //   L_{n+1} = (1+alpha) L_n + n ln b + ln c,
    // with exact solution L_n = K (1+alpha)^n + p n + q where p = -ln b /
    // alpha and q = log(threshold). Evaluating the solution instead of
    // iterating keeps the orbit faithful: literal iteration amplifies one
    // ulp of rounding by (1+alpha)^n, which would blow up the threshold
    // orbit itself long before y reaches the convergence cutoff. Orbits
    // within rounding distance of the threshold are snapped onto it.
    const double p = -std::log(b) / alpha;
    const double q = -(std::log(b) / alpha + std::log(c)) / alpha;
    double K = (y0 > 0.0 ? std::log(y0) : -std::numeric_limits<double>::infinity()) - q;
    if (std::abs(K) < 1e-9 * (1.0 + std::abs(q))) K = 0.0;

    const double log_cap = std::log(1e100);
    res.y.push_back(y0);
    for (int n = 1; n <= n_max; ++n) {
        double ln_y = K * std::pow(1.0 + alpha, n) + p * n + q;
        if (ln_y > log_cap) ln_y = log_cap;  // saturate divergent orbits
        res.y.push_back(std::exp(ln_y));
    }
    res.converged = res.y.back() < 1e-12;
    return res;
}

SmallLemmaResult small_lemma_check(double b0, double lambda, double alpha, int k_max) {
    if (b0 < 0.0 || lambda < 0.0 || alpha < 0.0)
        throw ArgumentError("small_lemma_check: inputs must be nonnegative");
    if (k_max < 0) throw ArgumentError("small_lemma_check: k_max must be >= 0");

    SmallLemmaResult res;
    const double factor = lambda * std::pow(2.0 * b0, alpha);
    res.hypothesis_ok = 2.0 * factor < 1.0;
    res.bound = res.hypothesis_ok ? b0 / (1.0 - factor) : 0.0;
    double bk = b0;
    res.b.push_back(bk);
    res.sequence_max = bk;
    for (int k = 1; k <= k_max; ++k) {
        bk = b0 + lambda * std::pow(bk, 1.0 + alpha);
        if (bk > 1e100) bk = 1e100;  // saturate
        res.b.push_back(bk);
        res.sequence_max = std::max(res.sequence_max, bk);
    }
    res.bounded = res.hypothesis_ok && res.sequence_max <= res.bound * (1.0 + 1e-12);
    return res;
}

double p_norm(const Field& f, double p) {
    if (!(p >= 1.0)) throw ArgumentError("p_norm: p must be >= 1");
    const Field w = quadrature_weights(f.grid);
    double acc = 0.0;
    for (int k = 0; k < f.size(); ++k) acc += w[k] * std::pow(std::abs(f[k]), p);
    return std::pow(acc, 1.0 / p);
}

InterpResult interpolation_check(const Field& f, double ell, double q, double r, double eps) {
    if (!(1.0 <= ell) || !(ell <= q) || !(q <= r))
        throw ArgumentError("interpolation_check: need 1 <= ell <= q <= r");
    if (!(eps > 0.0)) throw ArgumentError("interpolation_check: eps must be positive");

    InterpResult res;
    const double num = 1.0 / ell - 1.0 / q;
    const double den = 1.0 / q - 1.0 / r;
    if (num == 0.0 && den == 0.0)
        res.mu = 0.0;  // ell = q = r: the bound is trivially (1+eps)||f||
    else
        res.mu = num / den;  // den = 0 gives +inf, which the rhs absorbs
    res.lhs = p_norm(f, q);
    res.rhs = eps * p_norm(f, r) + std::pow(eps, -res.mu) * p_norm(f, ell);
    res.ok = res.lhs <= res.rhs * (1.0 + 1e-12);
    return res;
}

}  // namespace thermistor
