#include "msgreen/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace msgreen {

const char* quantity_name(Quantity q) {
    switch (q) {
        case Quantity::value: return "value";
        case Quantity::grad_x: return "grad_x";
        case Quantity::grad_y: return "grad_y";
        case Quantity::mixed: return "mixed";
    }
    return "?";
}

Quantity quantity_from_name(const std::string& name) {
    if (name == "value") return Quantity::value;
    if (name == "grad_x") return Quantity::grad_x;
    if (name == "grad_y") return Quantity::grad_y;
    if (name == "mixed") return Quantity::mixed;
    throw std::invalid_argument("unknown quantity: " + name);
}

double target_exponent(Quantity q, int dim) {
    switch (q) {
        case Quantity::value: return 2.0 - dim;
        case Quantity::grad_x:
        case Quantity::grad_y: return 1.0 - dim;
        case Quantity::mixed: return static_cast<double>(-dim);
    }
    return 0.0;
}

GreenColumnFamily green_family(const CoefficientField& field, int oscillation,
                               const TorusGrid& grid, const Eigen::VectorXd& y, double tol,
                               bool with_y_shifts) {
    GreenColumnFamily fam;
    fam.oscillation = oscillation;
    fam.center = periodic_green(field, oscillation, grid, y, tol);
    if (with_y_shifts) {
        const double h = grid.spacing();
        for (int j = 0; j < grid.dim; ++j) {
            Eigen::VectorXd yp = y, ym = y;
            yp[j] += h;
            ym[j] -= h;
            fam.y_plus.push_back(periodic_green(field, oscillation, grid, yp, tol));
            fam.y_minus.push_back(periodic_green(field, oscillation, grid, ym, tol));
        }
    }
    return fam;
}

namespace {

std::vector<Eigen::VectorXd> direction_stencil(int dim) {
    std::vector<Eigen::VectorXd> dirs;
    Eigen::VectorXi v = Eigen::VectorXi::Constant(dim, -1);
    while (true) {
        if (!v.isZero()) {
            Eigen::VectorXd u = v.cast<double>();
            dirs.push_back(u / u.norm());
        }
        int a = dim - 1;
        while (a >= 0) {
            if (++v[a] <= 1) break;
            v[a] = -1;
            --a;
        }
        if (a < 0) break;
    }
    return dirs;
}

double magnitude_at_node(const GreenColumnFamily& fam, Quantity q, const std::vector<int>& c) {
    const TorusGrid& grid = fam.center.grid();
    const int d = grid.dim;
    const double h = grid.spacing();
    std::vector<int> cp = c, cm = c;
    switch (q) {
        case Quantity::value:
            return std::abs(fam.center.values.at(c.data()));
        case Quantity::grad_x: {
            double s = 0.0;
            for (int a = 0; a < d; ++a) {
                cp[a] = c[a] + 1;
                cm[a] = c[a] - 1;
                double g = (fam.center.values.at(cp.data()) - fam.center.values.at(cm.data())) /
                           (2.0 * h);
                s += g * g;
                cp[a] = c[a];
                cm[a] = c[a];
            }
            return std::sqrt(s);
        }
        case Quantity::grad_y: {
            double s = 0.0;
            for (int j = 0; j < d; ++j) {
                double g = (fam.y_plus[j].values.at(c.data()) -
                            fam.y_minus[j].values.at(c.data())) /
                           (2.0 * h);
                s += g * g;
            }
            return std::sqrt(s);
        }
        case Quantity::mixed: {
            double s = 0.0;
            for (int j = 0; j < d; ++j)
                for (int a = 0; a < d; ++a) {
                    cp[a] = c[a] + 1;
                    cm[a] = c[a] - 1;
                    double gp = fam.y_plus[j].values.at(cp.data()) -
                                fam.y_minus[j].values.at(cp.data());
                    double gm = fam.y_plus[j].values.at(cm.data()) -
                                fam.y_minus[j].values.at(cm.data());
                    double m = (gp - gm) / (4.0 * h * h);
                    s += m * m;
                    cp[a] = c[a];
                    cm[a] = c[a];
                }
            return std::sqrt(s);
        }
    }
    return 0.0;
}

double stencil_magnitude(const GreenColumnFamily& fam, Quantity q, double r) {
    const TorusGrid& grid = fam.center.grid();
    std::set<std::int64_t> seen;
    double best = 0.0;
    for (const auto& dir : direction_stencil(grid.dim)) {
        Eigen::VectorXd p = fam.center.source + r * dir;
        std::vector<int> c = grid.nearest_node(p);
        if (!seen.insert(grid.flatten(c.data())).second) continue;
        best = std::max(best, magnitude_at_node(fam, q, c));
    }
    return best;
}

struct LogFit {
    double slope = 0.0, intercept = 0.0, rms = 0.0;
    int count = 0;
};

LogFit fit_loglog(const std::vector<DecaySample>& samples) {
    LogFit f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : samples) {
        if (s.magnitude <= 0.0) continue;
        double lx = std::log(s.r), ly = std::log(s.magnitude);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++f.count;
    }
    if (f.count < 2) throw std::runtime_error("decay fit: fewer than two usable samples");
    double n = f.count;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0.0;
    for (const auto& s : samples) {
        if (s.magnitude <= 0.0) continue;
        double res = std::log(s.magnitude) - (f.intercept + f.slope * std::log(s.r));
        ss += res * res;
    }
    f.rms = std::sqrt(ss / n);
    return f;
}

std::vector<double> log_spaced(double r_min, double r_max, int count) {
    std::vector<double> r(count);
    for (int i = 0; i < count; ++i)
        r[i] = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (count - 1));
    return r;
}

}  // namespace

DecayFit decay_fit(const std::vector<GreenColumnFamily>& families, Quantity quantity,
                   double r_min, double r_max, int n_radii) {
    if (families.empty()) throw std::invalid_argument("decay_fit: no tables");
    const TorusGrid& grid = families.front().center.grid();
    const double h = grid.spacing();
    if (r_min < 4.0 * h - 1e-12)
        throw std::invalid_argument("decay_fit: r_min must be >= 4h");
    if (r_max > 0.25 + 1e-12)
        throw std::invalid_argument("decay_fit: r_max must be <= 0.25");
    if (n_radii < 8) throw std::invalid_argument("decay_fit: need >= 8 radii");
    if ((quantity == Quantity::grad_y || quantity == Quantity::mixed))
        for (const auto& fam : families)
            if (!fam.has_y_shifts())
                throw std::invalid_argument("decay_fit: family lacks shifted-source columns");

    DecayFit fit;
    fit.quantity = quantity;
    fit.r_min = r_min;
    fit.r_max = r_max;
    std::vector<double> radii = log_spaced(r_min, r_max, n_radii);

    for (const auto& fam : families) {
        fit.n_list.push_back(fam.oscillation);
        std::vector<DecaySample> per_n;
        for (double r : radii) {
            DecaySample s;
            s.oscillation = fam.oscillation;
            s.r = r;
            s.magnitude = stencil_magnitude(fam, quantity, r);
            per_n.push_back(s);
            fit.samples.push_back(s);
        }
        LogFit lf = fit_loglog(per_n);
        fit.p_per_n.push_back(lf.slope);
        fit.c_per_n.push_back(std::exp(lf.intercept));
    }
    LogFit pooled = fit_loglog(fit.samples);
    fit.p_hat = pooled.slope;
    fit.c_hat = std::exp(pooled.intercept);
    fit.fit_residual = pooled.rms;
    return fit;
}

UniformityReport uniformity_report(const CoefficientField& field, const TorusGrid& grid,
                                   const std::vector<int>& n_list, Quantity quantity,
                                   const Eigen::VectorXd& y, double tol, double r_min,
                                   double r_max, int n_radii) {
    if (n_list.empty()) throw std::invalid_argument("uniformity_report: empty n list");
    for (int n : n_list)
        if (grid.points_per_axis < 8 * n)
            throw std::invalid_argument("uniformity_report: grid does not resolve n=" +
                                        std::to_string(n));
    UniformityReport rep;
    rep.quantity = quantity;
    rep.exponent = target_exponent(quantity, grid.dim);
    rep.n_list = n_list;

    bool shifts = quantity == Quantity::grad_y || quantity == Quantity::mixed;
    std::vector<double> radii = log_spaced(r_min, r_max, n_radii);
    for (int n : n_list) {
        GreenColumnFamily fam = green_family(field, n, grid, y, tol, shifts);
        // fixed-exponent constant: geometric mean of magnitude / r^p
        double acc = 0.0;
        int count = 0;
        for (double r : radii) {
            double mag = stencil_magnitude(fam, quantity, r);
            if (mag <= 0.0) continue;
            acc += std::log(mag) - rep.exponent * std::log(r);
            ++count;
        }
        if (count == 0) throw std::runtime_error("uniformity_report: no usable samples");
        rep.c_n.push_back(std::exp(acc / count));
    }
    double lo = *std::min_element(rep.c_n.begin(), rep.c_n.end());
    double hi = *std::max_element(rep.c_n.begin(), rep.c_n.end());
    rep.spread = hi / lo;
    return rep;
}

LogBoundFit log_bound_check_2d(const GreenTable& table, double r_min, double r_max) {
    const TorusGrid& grid = table.grid();
    if (grid.dim != 2) throw std::invalid_argument("log_bound_check_2d: needs a 2d table");
    LogBoundFit fit;
    fit.r_min = r_min;
    fit.r_max = r_max;
    double num = 0.0, den = 0.0;
    const int n = grid.points_per_axis;
    int c[2];
    for (c[0] = 0; c[0] < n; ++c[0])
        for (c[1] = 0; c[1] < n; ++c[1]) {
            double r = torus_distance(grid.node(c), table.source, grid.extent());
            if (r < r_min || r > r_max) continue;
            double g = std::abs(table.values.at(c));
            double l = std::log(2.0 + r);
            fit.c_max = std::max(fit.c_max, g / l);
            num += g * l;
            den += l * l;
        }
    if (den == 0.0) throw std::runtime_error("log_bound_check_2d: empty window");
    fit.c_lsq = num / den;
    return fit;
}

void write_fit_csv(const std::string& path, const std::vector<DecayFit>& fits) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_fit_csv: cannot open " + path);
    out << "quantity,n,r,magnitude\n";
    out.precision(17);
    for (const auto& fit : fits)
        for (const auto& s : fit.samples)
            out << quantity_name(fit.quantity) << "," << s.oscillation << "," << s.r << ","
                << s.magnitude << "\n";
}

}  // namespace msgreen
