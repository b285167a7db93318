#include "thermistor/parabolic.hpp"

#include <algorithm>
#include <cmath>

#include "thermistor/elliptic.hpp"
#include "thermistor/errors.hpp"

namespace thermistor {

Field implicit_euler_step(const Field& u_old, const Field& source, double dt,
                          const Field& bc_next, const StepOptions& opts) {
    const GridSpec& g = u_old.grid;
    if (!g.same_as(source.grid) || !g.same_as(bc_next.grid))
        throw ArgumentError("implicit_euler_step: grid mismatch");
    if (!(dt > 0.0)) throw ArgumentError("implicit_euler_step: dt must be positive");
    u_old.require_finite("implicit_euler_step(u_old)");
    source.require_finite("implicit_euler_step(source)");

    if (source.min() < 0.0 && opts.warnings != nullptr)
        opts.warnings->push_back("implicit_euler_step: negative source, min = " +
                                 std::to_string(source.min()));

    // I + dt*L with L the unit-coefficient Dirichlet Laplacian. Reuses the
    // elliptic assembly (sigma = 1 on every face) and then shifts to the
    // time-step system.
    Field ones(g, 1.0);
    LinearSystem sys = assemble(sigma_faces(ones), bc_next);
    const int n = sys.A.n;
    for (int i = 0; i < n; ++i) {
        const int node = sys.interior_nodes[static_cast<size_t>(i)];
        for (int k = sys.A.row_ptr[i]; k < sys.A.row_ptr[i + 1]; ++k) {
            sys.A.val[k] *= dt;
            if (sys.A.col[k] == i) sys.A.val[k] += 1.0;
        }
        sys.rhs[static_cast<size_t>(i)] =
            sys.rhs[static_cast<size_t>(i)] * dt + u_old[node] + dt * source[node];
    }
    return solve_spd(sys, opts.tol, opts.max_iter);
}

double comparison_floor(const Field& u) {
    return std::max(0.0, -u.min());
}

}  // namespace thermistor
