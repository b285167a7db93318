// Variable-coefficient Dirichlet problem div(sigma grad phi) = 0 on the
// interior nodes: assembly into a symmetric M-matrix system, a Jacobi-
// preconditioned conjugate-gradient solve, and the Joule quantities built
// from the solution.

#ifndef THERMISTOR_ELLIPTIC_HPP
#define THERMISTOR_ELLIPTIC_HPP

#include <iosfwd>
#include <vector>

#include "thermistor/grid.hpp"

namespace thermistor {

// Compressed-row sparse matrix, square.
struct CsrMatrix {
    int n = 0;
    std::vector<int> row_ptr;  // n+1
    std::vector<int> col;
    std::vector<double> val;

    void apply(const std::vector<double>& x, std::vector<double>& y) const;
};

// Assembled interior system. Rows are scaled by 1/h^2; off-diagonals are
// nonpositive and the diagonal dominates weakly (M-matrix). Rows whose
// adjacent faces are all degenerate are replaced by identity rows with a
// pinned right-hand side; regularized_count records how many.
struct LinearSystem {
    GridSpec grid;
    CsrMatrix A;
    std::vector<double> rhs;
    std::vector<int> interior_nodes;  // row -> flat node index
    Field boundary_values;            // full field; boundary entries reattached after solve
    int regularized_count = 0;
};

// Faces below this are treated as exactly zero so that degenerate rows
// decouple symmetrically.
inline constexpr double kDegenerateFaceThreshold = 1e-300;

// Row i encodes sum_faces sigma_face (phi_i - phi_j)/h^2 = 0 with boundary
// neighbors moved to the right-hand side. Fully decoupled rows become
// identity rows pinned to reg_values at that node when given, otherwise to
// the boundary value at the nearest boundary node.
LinearSystem assemble(const FaceCoeffs& sigma, const Field& phi_bc,
                      const Field* reg_values = nullptr);

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;       // relative, ||Ax-b||/||b||
    bool dense_fallback = false;
};

// Jacobi-preconditioned CG to relative residual <= tol (b = 0 returns 0).
// max_iter <= 0 means 10n. If CG runs out of iterations the solve falls
// back to dense elimination when n <= 400 and otherwise throws
// NonconvergenceError. Returns phi on the full grid with the boundary
// values reattached. Single-threaded and bitwise deterministic.
Field solve_spd(const LinearSystem& sys, double tol = 1e-10, int max_iter = 0,
                SolveStats* stats = nullptr);

// q = sigma(u) * |grad phi|^2 nodewise; nonnegative.
Field joule_density(const Field& sigma_nodes, const Field& phi, const Field& phi_bc);

// sum_faces sigma_face (dphi/h)^2 h^dim; zero iff phi is constant across
// every face with positive coefficient.
double dirichlet_energy(const FaceCoeffs& sigma, const Field& phi);

// Matrix-Market coordinate dump for debugging.
void dump_matrix_market(const LinearSystem& sys, std::ostream& os);

}  // namespace thermistor

#endif
