// Backward-Euler step for the heat equation with a volumetric source and
// Dirichlet data. Fully implicit so the M-matrix comparison principle
// keeps the temperature nonnegative whenever the data is.

#ifndef THERMISTOR_PARABOLIC_HPP
#define THERMISTOR_PARABOLIC_HPP

#include <functional>
#include <string>
#include <vector>

#include "thermistor/grid.hpp"

namespace thermistor {

// Space-time boundary data: u0 samples the parabolic boundary (lateral
// sides plus the initial slice), phi0 the lateral boundary. Arguments are
// (x, y, t); y is passed as 0 in 1D. The smoothness the theory asks of
// this data (continuity in t, time derivative in L2, Laplacian of phi0 in
// L^s) is documented but not enforced; any finite callable is accepted.
struct BoundaryData {
    std::function<double(double, double, double)> u0;
    std::function<double(double, double, double)> phi0;
};

struct StepOptions {
    double tol = 1e-13;                        // linear-solve relative residual
    int max_iter = 0;                          // <= 0: 10n
    std::vector<std::string>* warnings = nullptr;
};

// Solves (I - dt Lap_h) u_new = u_old + dt source on the interior with
// u_new = bc_next on the boundary. A negative source is accepted with a
// warning pushed to opts.warnings.
Field implicit_euler_step(const Field& u_old, const Field& source, double dt,
                          const Field& bc_next, const StepOptions& opts = {});

// max(0, -min u): zero exactly when u >= 0 holds.
double comparison_floor(const Field& u);

}  // namespace thermistor

#endif
