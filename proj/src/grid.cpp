#include "msgreen/grid.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace msgreen {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

TorusGrid TorusGrid::unit(int dim, int points_per_axis) {
    if (dim < 2) throw std::invalid_argument("TorusGrid: dim must be >= 2");
    if (points_per_axis < 4 || !is_power_of_two(points_per_axis))
        throw std::invalid_argument("TorusGrid: points per axis must be a power of two >= 4");
    TorusGrid g;
    g.dim = dim;
    g.points_per_axis = points_per_axis;
    g.axis_extent = 1.0;
    return g;
}

TorusGrid TorusGrid::window(int dim, int periods, double spacing) {
    if (dim < 2) throw std::invalid_argument("TorusGrid: dim must be >= 2");
    if (periods < 2 || !is_power_of_two(periods))
        throw std::invalid_argument("TorusGrid: window periods must be a power of two >= 2");
    int per_period = static_cast<int>(std::lround(1.0 / spacing));
    if (per_period < 2 || std::abs(per_period * spacing - 1.0) > 1e-12)
        throw std::invalid_argument("TorusGrid: window spacing must divide the unit period");
    TorusGrid g;
    g.dim = dim;
    g.points_per_axis = periods * per_period;
    g.axis_extent = static_cast<double>(periods);
    return g;
}

std::int64_t TorusGrid::size() const {
    std::int64_t s = 1;
    for (int a = 0; a < dim; ++a) s *= points_per_axis;
    return s;
}

std::vector<int> TorusGrid::nearest_node(const Eigen::VectorXd& x) const {
    std::vector<int> c(dim);
    for (int a = 0; a < dim; ++a) c[a] = wrap(static_cast<int>(std::lround(x[a] / spacing())));
    return c;
}

bool TorusGrid::on_node(const Eigen::VectorXd& x, double tol) const {
    for (int a = 0; a < dim; ++a) {
        double u = x[a] / spacing();
        if (std::abs(u - std::round(u)) > tol / spacing()) return false;
    }
    return true;
}

double GridFunction::mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double GridFunction::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double GridFunction::norm2() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

double GridFunction::dot(const GridFunction& other) const {
    if (!(grid == other.grid)) throw std::invalid_argument("GridFunction::dot: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * other.values[i];
    return s;
}

void GridFunction::shift_by(double s) {
    for (double& v : values) v += s;
}

void GridFunction::project_mean() { shift_by(-mean()); }

double GridFunction::interpolate(const Eigen::VectorXd& x) const {
    const int d = grid.dim;
    const double h = grid.spacing();
    int base[8];
    double frac[8];
    for (int a = 0; a < d; ++a) {
        double u = x[a] / h;
        double fl = std::floor(u);
        base[a] = grid.wrap(static_cast<int>(fl));
        frac[a] = u - fl;
    }
    double acc = 0.0;
    int corners = 1 << d;
    int c[8];
    for (int mask = 0; mask < corners; ++mask) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            bool hi = mask & (1 << a);
            w *= hi ? frac[a] : 1.0 - frac[a];
            c[a] = base[a] + (hi ? 1 : 0);
        }
        if (w != 0.0) acc += w * at(c);
    }
    return acc;
}

Eigen::VectorXd GridFunction::interpolate_gradient(const Eigen::VectorXd& x) const {
    const int d = grid.dim;
    const double h = grid.spacing();
    int base[8];
    double frac[8];
    for (int a = 0; a < d; ++a) {
        double u = x[a] / h;
        double fl = std::floor(u);
        base[a] = grid.wrap(static_cast<int>(fl));
        frac[a] = u - fl;
    }
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    int corners = 1 << d;
    int c[8];
    for (int mask = 0; mask < corners; ++mask) {
        for (int a = 0; a < d; ++a) c[a] = base[a] + ((mask & (1 << a)) ? 1 : 0);
        double v = at(c);
        for (int der = 0; der < d; ++der) {
            double w = 1.0;
            for (int a = 0; a < d; ++a) {
                bool hi = mask & (1 << a);
                if (a == der)
                    w *= hi ? 1.0 : -1.0;
                else
                    w *= hi ? frac[a] : 1.0 - frac[a];
            }
            g[der] += w * v;
        }
    }
    return g / h;
}

void write_gsgf(const std::string& path, const GridFunction& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_gsgf: cannot open " + path);
    const char magic[4] = {'G', 'S', 'G', 'F'};
    out.write(magic, 4);
    std::uint32_t d = static_cast<std::uint32_t>(f.grid.dim);
    std::uint32_t n = static_cast<std::uint32_t>(f.grid.points_per_axis);
    double extent = f.grid.axis_extent;
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&extent), 8);
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_gsgf: write failed for " + path);
}

GridFunction read_gsgf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_gsgf: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "GSGF", 4) != 0)
        throw std::runtime_error("read_gsgf: bad magic in " + path);
    std::uint32_t d = 0, n = 0;
    double extent = 0.0;
    in.read(reinterpret_cast<char*>(&d), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&extent), 8);
    TorusGrid g;
    g.dim = static_cast<int>(d);
    g.points_per_axis = static_cast<int>(n);
    g.axis_extent = extent;
    if (g.dim < 2 || g.points_per_axis < 2) throw std::runtime_error("read_gsgf: bad header");
    GridFunction f(g);
    in.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("read_gsgf: truncated data in " + path);
    return f;
}

double wrap_delta(double delta, double extent) {
    double r = delta - extent * std::floor(delta / extent);
    if (r >= extent / 2) r -= extent;
    return r;
}

Eigen::VectorXd wrap_delta(const Eigen::VectorXd& delta, double extent) {
    Eigen::VectorXd r(delta.size());
    for (int a = 0; a < delta.size(); ++a) r[a] = wrap_delta(delta[a], extent);
    return r;
}

double torus_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double extent) {
    return wrap_delta(x - y, extent).norm();
}

}  // namespace msgreen
