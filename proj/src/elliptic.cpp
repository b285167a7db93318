#include "thermistor/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "thermistor/errors.hpp"

namespace thermistor {

void CsrMatrix::apply(const std::vector<double>& x, std::vector<double>& y) const {
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += val[k] * x[col[k]];
        y[i] = acc;
    }
}

namespace {

// Flat index of the boundary node closest to (i,j); ties resolved by scan
// order so assembly is deterministic.
int nearest_boundary_node(const GridSpec& g, int i, int j) {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int jj = 0; jj < g.ny; ++jj) {
        for (int ii = 0; ii < g.nx; ++ii) {
            if (!g.on_boundary(ii, jj)) continue;
            const double dx = static_cast<double>(ii - i);
            const double dy = static_cast<double>(jj - j);
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = g.node_index(ii, jj);
            }
        }
    }
    return best;
}

struct Neighbor {
    int i, j;
    double face;  // coefficient of the connecting face
};

void collect_neighbors(const FaceCoeffs& fc, int i, int j, std::vector<Neighbor>& out) {
    const GridSpec& g = fc.grid;
    out.clear();
    if (i > 0) out.push_back({i - 1, j, fc.xface(i - 1, j)});
    if (i < g.nx - 1) out.push_back({i + 1, j, fc.xface(i, j)});
    if (g.dim == 2) {
        if (j > 0) out.push_back({i, j - 1, fc.yface(i, j - 1)});
        if (j < g.ny - 1) out.push_back({i, j + 1, fc.yface(i, j)});
    }
}

}  // namespace

LinearSystem assemble(const FaceCoeffs& sigma, const Field& phi_bc, const Field* reg_values) {
    const GridSpec& g = sigma.grid;
    if (!g.same_as(phi_bc.grid)) throw ArgumentError("assemble: grid mismatch");
    for (double v : sigma.x_faces)
        if (v < 0.0 || std::isnan(v)) throw ArgumentError("assemble: negative face coefficient");
    for (double v : sigma.y_faces)
        if (v < 0.0 || std::isnan(v)) throw ArgumentError("assemble: negative face coefficient");

    LinearSystem sys;
    sys.grid = g;
    sys.boundary_values = phi_bc;

    // Interior numbering in lexicographic order.
    std::vector<int> row_of(static_cast<size_t>(g.node_count()), -1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (!g.on_boundary(i, j)) {
                row_of[static_cast<size_t>(g.node_index(i, j))] =
                    static_cast<int>(sys.interior_nodes.size());
                sys.interior_nodes.push_back(g.node_index(i, j));
            }
    const int n = static_cast<int>(sys.interior_nodes.size());
    sys.A.n = n;
    sys.A.row_ptr.assign(static_cast<size_t>(n) + 1, 0);
    sys.rhs.assign(static_cast<size_t>(n), 0.0);

    const double inv_h2 = 1.0 / (g.h * g.h);
    std::vector<Neighbor> nb;
    auto clamp_face = [](double f) { return f <= kDegenerateFaceThreshold ? 0.0 : f; };

    // Mark degenerate interior nodes first so both sides of a crumb face
    // drop it and the matrix stays exactly symmetric.
    std::vector<char> degenerate(static_cast<size_t>(g.node_count()), 0);
    for (int row = 0; row < n; ++row) {
        const int node = sys.interior_nodes[static_cast<size_t>(row)];
        const int i = node % g.nx, j = node / g.nx;
        collect_neighbors(sigma, i, j, nb);
        bool all_zero = true;
        for (const Neighbor& m : nb)
            if (clamp_face(m.face) > 0.0) all_zero = false;
        degenerate[static_cast<size_t>(node)] = all_zero ? 1 : 0;
    }

    for (int row = 0; row < n; ++row) {
        const int node = sys.interior_nodes[static_cast<size_t>(row)];
        const int i = node % g.nx, j = node / g.nx;
        if (degenerate[static_cast<size_t>(node)]) {
            sys.A.col.push_back(row);
            sys.A.val.push_back(1.0);
            if (reg_values != nullptr)
                sys.rhs[static_cast<size_t>(row)] = (*reg_values)[node];
            else
                sys.rhs[static_cast<size_t>(row)] = phi_bc[nearest_boundary_node(g, i, j)];
            sys.A.row_ptr[static_cast<size_t>(row) + 1] = static_cast<int>(sys.A.col.size());
            ++sys.regularized_count;
            continue;
        }
        collect_neighbors(sigma, i, j, nb);
        double diag = 0.0;
        double rhs = 0.0;
        // Emit lower off-diagonals, diagonal, upper off-diagonals in node
        // order so columns are sorted within the row.
        std::vector<std::pair<int, double>> offdiag;
        for (const Neighbor& m : nb) {
            const double f = clamp_face(m.face);
            if (f == 0.0) continue;
            diag += f * inv_h2;
            const int mnode = g.node_index(m.i, m.j);
            if (g.on_boundary(m.i, m.j)) {
                rhs += f * inv_h2 * phi_bc[mnode];
            } else {
                // A positive face implies the neighbor is not degenerate.
                offdiag.emplace_back(row_of[static_cast<size_t>(mnode)], -f * inv_h2);
            }
        }
        std::sort(offdiag.begin(), offdiag.end());
        bool diag_emitted = false;
        for (const auto& [c, v] : offdiag) {
            if (!diag_emitted && c > row) {
                sys.A.col.push_back(row);
                sys.A.val.push_back(diag);
                diag_emitted = true;
            }
            sys.A.col.push_back(c);
            sys.A.val.push_back(v);
        }
        if (!diag_emitted) {
            sys.A.col.push_back(row);
            sys.A.val.push_back(diag);
        }
        sys.rhs[static_cast<size_t>(row)] = rhs;
        sys.A.row_ptr[static_cast<size_t>(row) + 1] = static_cast<int>(sys.A.col.size());
    }
    return sys;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Gaussian elimination with partial pivoting on the expanded dense matrix.
// Production fallback only; the oracle module keeps its own copy so the
// cross check stays independent.
std::vector<double> dense_solve(const CsrMatrix& A, std::vector<double> b) {
    const int n = A.n;
    std::vector<double> M(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            M[static_cast<size_t>(i) * n + A.col[k]] = A.val[k];
    for (int p = 0; p < n; ++p) {
        int piv = p;
        for (int r = p + 1; r < n; ++r)
            if (std::abs(M[static_cast<size_t>(r) * n + p]) >
                std::abs(M[static_cast<size_t>(piv) * n + p]))
                piv = r;
        if (M[static_cast<size_t>(piv) * n + p] == 0.0)
            throw NonconvergenceError("dense fallback: singular matrix", 0.0, 0);
        if (piv != p) {
            for (int c = p; c < n; ++c)
                std::swap(M[static_cast<size_t>(p) * n + c], M[static_cast<size_t>(piv) * n + c]);
            std::swap(b[static_cast<size_t>(p)], b[static_cast<size_t>(piv)]);
        }
        const double d = M[static_cast<size_t>(p) * n + p];
        for (int r = p + 1; r < n; ++r) {
            const double f = M[static_cast<size_t>(r) * n + p] / d;
            if (f == 0.0) continue;
            for (int c = p; c < n; ++c)
                M[static_cast<size_t>(r) * n + c] -= f * M[static_cast<size_t>(p) * n + c];
            b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(p)];
        }
    }
    std::vector<double> x(static_cast<size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<size_t>(r)];
        for (int c = r + 1; c < n; ++c) s -= M[static_cast<size_t>(r) * n + c] * x[static_cast<size_t>(c)];
        x[static_cast<size_t>(r)] = s / M[static_cast<size_t>(r) * n + r];
    }
    return x;
}

}  // namespace

Field solve_spd(const LinearSystem& sys, double tol, int max_iter, SolveStats* stats) {
    if (!(tol > 0.0)) throw ArgumentError("solve_spd: tol must be positive");
    const int n = sys.A.n;
    if (max_iter <= 0) max_iter = 10 * std::max(n, 1);

    std::vector<double> x(static_cast<size_t>(n), 0.0);
    SolveStats local;
    const double bnorm = norm2(sys.rhs);
    if (bnorm == 0.0) {
        // x = 0 exactly.
        if (stats) *stats = local;
    } else {
        std::vector<double> inv_diag(static_cast<size_t>(n), 1.0);
        for (int i = 0; i < n; ++i)
            for (int k = sys.A.row_ptr[i]; k < sys.A.row_ptr[i + 1]; ++k)
                if (sys.A.col[k] == i && sys.A.val[k] > 0.0) inv_diag[static_cast<size_t>(i)] = 1.0 / sys.A.val[k];

        std::vector<double> r = sys.rhs, z(static_cast<size_t>(n)), p(static_cast<size_t>(n)),
                            q(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) z[static_cast<size_t>(i)] = inv_diag[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
        p = z;
        double rz = dot(r, z);
        double rnorm = norm2(r);
        int it = 0;
        while (rnorm > tol * bnorm && it < max_iter) {
            sys.A.apply(p, q);
            const double pq = dot(p, q);
            if (pq <= 0.0) break;  // lost positive definiteness numerically
            const double alpha = rz / pq;
            for (int i = 0; i < n; ++i) {
                x[static_cast<size_t>(i)] += alpha * p[static_cast<size_t>(i)];
                r[static_cast<size_t>(i)] -= alpha * q[static_cast<size_t>(i)];
            }
            for (int i = 0; i < n; ++i) z[static_cast<size_t>(i)] = inv_diag[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = z[static_cast<size_t>(i)] + beta * p[static_cast<size_t>(i)];
            rnorm = norm2(r);
            ++it;
        }
        local.iterations = it;
        local.residual = rnorm / bnorm;
        if (rnorm > tol * bnorm) {
            if (n <= 400) {
                x = dense_solve(sys.A, sys.rhs);
                local.dense_fallback = true;
                sys.A.apply(x, q);
                for (int i = 0; i < n; ++i) q[static_cast<size_t>(i)] -= sys.rhs[static_cast<size_t>(i)];
                local.residual = norm2(q) / bnorm;
            } else {
                throw NonconvergenceError("solve_spd: CG did not reach tol " + std::to_string(tol) +
                                              " in " + std::to_string(it) +
                                              " iterations (relative residual " +
                                              std::to_string(rnorm / bnorm) + ")",
                                          rnorm / bnorm, it);
            }
        }
        if (stats) *stats = local;
    }

    Field phi = sys.boundary_values;
    const GridSpec& g = sys.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.on_boundary(i, j)) phi.at(i, j) = sys.boundary_values.at(i, j);
    for (size_t row = 0; row < sys.interior_nodes.size(); ++row)
        phi[sys.interior_nodes[row]] = x[row];
    return phi;
}

Field joule_density(const Field& sigma_nodes, const Field& phi, const Field& phi_bc) {
    if (!sigma_nodes.grid.same_as(phi.grid) || !phi.grid.same_as(phi_bc.grid))
        throw ArgumentError("joule_density: grid mismatch");
    Field q = grad_sq(phi, phi_bc);
    for (int k = 0; k < q.size(); ++k) q[k] *= sigma_nodes[k];
    return q;
}

double dirichlet_energy(const FaceCoeffs& sigma, const Field& phi) {
    const GridSpec& g = sigma.grid;
    if (!g.same_as(phi.grid)) throw ArgumentError("dirichlet_energy: grid mismatch");
    const double cell = g.dim == 1 ? g.h : g.h * g.h;
    const double inv_h2 = 1.0 / (g.h * g.h);
    double e = 0.0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double d = phi.at(i + 1, j) - phi.at(i, j);
            e += sigma.xface(i, j) * d * d * inv_h2 * cell;
        }
    if (g.dim == 2)
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double d = phi.at(i, j + 1) - phi.at(i, j);
                e += sigma.yface(i, j) * d * d * inv_h2 * cell;
            }
    return e;
}

void dump_matrix_market(const LinearSystem& sys, std::ostream& os) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    int nnz = sys.A.row_ptr[static_cast<size_t>(sys.A.n)];
    os << sys.A.n << " " << sys.A.n << " " << nnz << "\n";
    char buf[64];
    for (int i = 0; i < sys.A.n; ++i)
        for (int k = sys.A.row_ptr[i]; k < sys.A.row_ptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof(buf), "%d %d %.17g\n", i + 1, sys.A.col[k] + 1, sys.A.val[k]);
            os << buf;
        }
}

}  // namespace thermistor
