#include "thermistor/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "thermistor/errors.hpp"

namespace thermistor {

GridSpec GridSpec::line(int nx, double lx) {
    if (nx < 3) throw ArgumentError("grid: nx must be >= 3, got " + std::to_string(nx));
    if (!(lx > 0.0)) throw ArgumentError("grid: lx must be positive");
    GridSpec g;
    g.dim = 1;
    g.nx = nx;
    g.ny = 1;
    g.lx = lx;
    g.ly = 0.0;
    g.h = lx / (nx - 1);
    return g;
}

GridSpec GridSpec::rect(int nx, int ny, double lx, double ly) {
    if (nx < 3 || ny < 3)
        throw ArgumentError("grid: nx and ny must be >= 3, got " + std::to_string(nx) + "x" +
                            std::to_string(ny));
    if (!(lx > 0.0) || !(ly > 0.0)) throw ArgumentError("grid: edge lengths must be positive");
    const double hx = lx / (nx - 1);
    const double hy = ly / (ny - 1);
    if (std::abs(hx - hy) > 1e-12 * hx)
        throw ArgumentError("grid: cells must be square, lx/(nx-1) != ly/(ny-1)");
    GridSpec g;
    g.dim = 2;
    g.nx = nx;
    g.ny = ny;
    g.lx = lx;
    g.ly = ly;
    g.h = hx;
    return g;
}

bool GridSpec::same_as(const GridSpec& o) const {
    return dim == o.dim && nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
}

double Field::min() const {
    return *std::min_element(values.begin(), values.end());
}

double Field::max() const {
    return *std::max_element(values.begin(), values.end());
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

bool Field::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void Field::require_finite(const std::string& what) const {
    if (!all_finite()) throw ArgumentError(what + ": field contains NaN or Inf");
}

Field sample(const GridSpec& g, const std::function<double(double, double)>& f) {
    Field out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.at(i, j) = f(g.node_x(i), g.dim == 2 ? g.node_y(j) : 0.0);
    return out;
}

FaceCoeffs::FaceCoeffs(const GridSpec& g, double fill) : grid(g) {
    x_faces.assign(static_cast<size_t>((g.nx - 1) * g.ny), fill);
    if (g.dim == 2) y_faces.assign(static_cast<size_t>(g.nx * (g.ny - 1)), fill);
}

namespace {

void check_same_grid(const Field& a, const Field& b, const char* op) {
    if (!a.grid.same_as(b.grid))
        throw ArgumentError(std::string(op) + ": fields live on different grids");
}

// Nodal value with the boundary read from bc.
inline double eff(const Field& f, const Field& bc, int i, int j) {
    return f.grid.on_boundary(i, j) ? bc.at(i, j) : f.at(i, j);
}

}  // namespace

Field laplacian_apply(const Field& f, const Field& bc) {
    check_same_grid(f, bc, "laplacian_apply");
    const GridSpec& g = f.grid;
    const double inv_h2 = 1.0 / (g.h * g.h);
    Field out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (g.on_boundary(i, j)) {
                out.at(i, j) = bc.at(i, j);
                continue;
            }
            const double fc = f.at(i, j);
            double acc = eff(f, bc, i - 1, j) + eff(f, bc, i + 1, j) - 2.0 * fc;
            if (g.dim == 2) acc += eff(f, bc, i, j - 1) + eff(f, bc, i, j + 1) - 2.0 * fc;
            out.at(i, j) = acc * inv_h2;
        }
    }
    return out;
}

Field grad_sq(const Field& f, const Field& bc) {
    check_same_grid(f, bc, "grad_sq");
    const GridSpec& g = f.grid;
    const double inv_h = 1.0 / g.h;
    Field out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double fc = eff(f, bc, i, j);
            double acc = 0.0;
            {
                double sum = 0.0;
                int n = 0;
                if (i > 0) {
                    const double s = (fc - eff(f, bc, i - 1, j)) * inv_h;
                    sum += s * s;
                    ++n;
                }
                if (i < g.nx - 1) {
                    const double s = (eff(f, bc, i + 1, j) - fc) * inv_h;
                    sum += s * s;
                    ++n;
                }
                acc += sum / n;
            }
            if (g.dim == 2) {
                double sum = 0.0;
                int n = 0;
                if (j > 0) {
                    const double s = (fc - eff(f, bc, i, j - 1)) * inv_h;
                    sum += s * s;
                    ++n;
                }
                if (j < g.ny - 1) {
                    const double s = (eff(f, bc, i, j + 1) - fc) * inv_h;
                    sum += s * s;
                    ++n;
                }
                acc += sum / n;
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

FaceCoeffs sigma_faces(const Field& s) {
    s.require_finite("sigma_faces");
    for (double v : s.values)
        if (v < 0.0) throw ArgumentError("sigma_faces: negative nodal conductivity");
    const GridSpec& g = s.grid;
    FaceCoeffs fc(g);
    auto harmonic = [](double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i)
            fc.xface(i, j) = harmonic(s.at(i, j), s.at(i + 1, j));
    if (g.dim == 2)
        for (int j = 0; j + 1 < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                fc.yface(i, j) = harmonic(s.at(i, j), s.at(i, j + 1));
    return fc;
}

Field quadrature_weights(const GridSpec& g) {
    const double cell = g.dim == 1 ? g.h : g.h * g.h;
    Field w(g);
    for (int j = 0; j < g.ny; ++j) {
        const double wy = (g.dim == 2 && (j == 0 || j == g.ny - 1)) ? 0.5 : 1.0;
        for (int i = 0; i < g.nx; ++i) {
            const double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
            w.at(i, j) = wx * wy * cell;
        }
    }
    return w;
}

std::string field_to_csv(const Field& f) {
    const GridSpec& g = f.grid;
    std::string out = g.dim == 1 ? "x,value\n" : "x,y,value\n";
    char buf[96];
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (g.dim == 1)
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", g.node_x(i), f.at(i, j));
            else
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.node_x(i), g.node_y(j),
                              f.at(i, j));
            out += buf;
        }
    }
    return out;
}

}  // namespace thermistor
