// Uniform rectangular grids, nodal fields, face coefficients, and the
// discrete differential operators shared by the elliptic and parabolic
// solvers.
//
// Node ordering is lexicographic with x fastest: node (i,j) lives at flat
// index j*nx + i. This ordering is fixed so that linear-system assembly is
// identical on every platform.

#ifndef THERMISTOR_GRID_HPP
#define THERMISTOR_GRID_HPP

#include <functional>
#include <string>
#include <vector>

namespace thermistor {

// Uniform grid over a 1D interval (0,lx) or a 2D rectangle (0,lx)x(0,ly)
// with square cells of spacing h = lx/(nx-1).
struct GridSpec {
    int dim = 1;
    int nx = 0;
    int ny = 1;       // 1 in 1D
    double lx = 0.0;
    double ly = 0.0;  // 0 in 1D
    double h = 0.0;

    // Factories validate nx >= 3 per axis and, in 2D, square cells.
    static GridSpec line(int nx, double lx = 1.0);
    static GridSpec rect(int nx, int ny, double lx, double ly);

    int node_count() const { return dim == 1 ? nx : nx * ny; }
    int node_index(int i, int j = 0) const { return j * nx + i; }
    double node_x(int i) const { return i * h; }
    double node_y(int j) const { return j * h; }
    bool on_boundary(int i, int j = 0) const {
        if (i == 0 || i == nx - 1) return true;
        return dim == 2 && (j == 0 || j == ny - 1);
    }
    int interior_count() const {
        return dim == 1 ? nx - 2 : (nx - 2) * (ny - 2);
    }
    bool same_as(const GridSpec& o) const;
};

// Nodal scalar values on a grid.
struct Field {
    GridSpec grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const GridSpec& g, double fill = 0.0)
        : grid(g), values(static_cast<size_t>(g.node_count()), fill) {}

    double& operator[](int k) { return values[static_cast<size_t>(k)]; }
    double operator[](int k) const { return values[static_cast<size_t>(k)]; }
    double& at(int i, int j) { return values[static_cast<size_t>(grid.node_index(i, j))]; }
    double at(int i, int j) const { return values[static_cast<size_t>(grid.node_index(i, j))]; }
    int size() const { return static_cast<int>(values.size()); }

    double min() const;
    double max() const;
    double max_abs() const;
    bool all_finite() const;
    // Throws ArgumentError if any value is NaN or infinite.
    void require_finite(const std::string& what) const;
};

// Sample f(x,y) at every node (y passed as 0 in 1D).
Field sample(const GridSpec& g, const std::function<double(double, double)>& f);

// One coefficient per face between adjacent nodes, per axis.
// x-faces: (nx-1)*ny entries, face (i,j) sits between nodes (i,j),(i+1,j).
// y-faces: nx*(ny-1) entries (2D only), face (i,j) between (i,j),(i,j+1).
struct FaceCoeffs {
    GridSpec grid;
    std::vector<double> x_faces;
    std::vector<double> y_faces;

    FaceCoeffs() = default;
    explicit FaceCoeffs(const GridSpec& g, double fill = 0.0);

    double& xface(int i, int j) { return x_faces[static_cast<size_t>(j * (grid.nx - 1) + i)]; }
    double xface(int i, int j) const { return x_faces[static_cast<size_t>(j * (grid.nx - 1) + i)]; }
    double& yface(int i, int j) { return y_faces[static_cast<size_t>(j * grid.nx + i)]; }
    double yface(int i, int j) const { return y_faces[static_cast<size_t>(j * grid.nx + i)]; }
};

// Discrete Laplacian. At interior node i the result is
// sum_neighbors (f_j - f_i)/h^2 with boundary neighbors read from bc;
// at boundary nodes the result passes bc through unchanged.
Field laplacian_apply(const Field& f, const Field& bc);

// Squared gradient magnitude: per axis, the mean of the squared slopes of
// the faces adjacent to the node (one-sided at the boundary), summed over
// axes. Exact for affine fields. Boundary nodal values read from bc.
Field grad_sq(const Field& f, const Field& bc);

// Harmonic mean of adjacent nodal values: 2ab/(a+b), 0 when a+b = 0.
// Rejects negative nodal input.
FaceCoeffs sigma_faces(const Field& s);

// Trapezoid quadrature weights: w_i * h^dim per node, axis endpoints
// half-weighted (corners quarter-weighted in 2D). Weights sum to lx (*ly).
Field quadrature_weights(const GridSpec& g);

// Field CSV: header then one row per node, columns x[,y],value.
std::string field_to_csv(const Field& f);

}  // namespace thermistor

#endif
