#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msgreen {

/// Uniform periodic grid on a cubic torus: `points_per_axis` nodes per axis,
/// node c at coordinate c*spacing(), axis period extent(). The unit cell has
/// extent 1; a window torus of W periods at spacing h has extent W.
struct TorusGrid {
    int dim = 0;
    int points_per_axis = 0;
    double axis_extent = 1.0;

    static TorusGrid unit(int dim, int points_per_axis);
    static TorusGrid window(int dim, int periods, double spacing);

    double spacing() const { return axis_extent / points_per_axis; }
    double extent() const { return axis_extent; }
    std::int64_t size() const;

    bool operator==(const TorusGrid&) const = default;

    // Periodic index arithmetic. Multi-indices are wrapped into [0, N)^d.
    int wrap(int c) const {
        int n = points_per_axis;
        int r = c % n;
        return r < 0 ? r + n : r;
    }
    std::int64_t flatten(const int* c) const {
        std::int64_t idx = 0;
        for (int a = 0; a < dim; ++a) idx = idx * points_per_axis + wrap(c[a]);
        return idx;
    }
    void unflatten(std::int64_t idx, int* c) const {
        for (int a = dim - 1; a >= 0; --a) {
            c[a] = static_cast<int>(idx % points_per_axis);
            idx /= points_per_axis;
        }
    }
    Eigen::VectorXd node(const int* c) const {
        Eigen::VectorXd x(dim);
        for (int a = 0; a < dim; ++a) x[a] = wrap(c[a]) * spacing();
        return x;
    }

    /// Nearest grid multi-index to a physical point (periodic).
    std::vector<int> nearest_node(const Eigen::VectorXd& x) const;
    /// True when x lies on a node up to `tol` (absolute, per axis).
    bool on_node(const Eigen::VectorXd& x, double tol = 1e-9) const;
};

/// Scalar field sampled on a TorusGrid, row-major storage, periodic indexing.
struct GridFunction {
    TorusGrid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const TorusGrid& g) : grid(g), values(g.size(), 0.0) {}

    double& operator[](std::int64_t i) { return values[i]; }
    double operator[](std::int64_t i) const { return values[i]; }
    double& at(const int* c) { return values[grid.flatten(c)]; }
    double at(const int* c) const { return values[grid.flatten(c)]; }

    double mean() const;
    double max_abs() const;
    double norm2() const;  // sqrt(sum v^2)
    double dot(const GridFunction& other) const;

    void shift_by(double s);  // v += s everywhere
    void project_mean();      // v -= mean(v)

    /// Periodic multilinear interpolation at a physical point.
    double interpolate(const Eigen::VectorXd& x) const;
    /// Gradient of the multilinear interpolant (piecewise per cell).
    Eigen::VectorXd interpolate_gradient(const Eigen::VectorXd& x) const;
};

/// Binary dump, header {magic "GSGF", u32 dim, u32 points_per_axis, f64 extent},
/// then row-major doubles. Little-endian.
void write_gsgf(const std::string& path, const GridFunction& f);
GridFunction read_gsgf(const std::string& path);

/// Wrap a physical coordinate difference into [-extent/2, extent/2).
double wrap_delta(double delta, double extent);
Eigen::VectorXd wrap_delta(const Eigen::VectorXd& delta, double extent);

/// Torus distance |x - y| with per-axis wrapping.
double torus_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double extent);

}  // namespace msgreen
