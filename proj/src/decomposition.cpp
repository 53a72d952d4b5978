#include "msgreen/decomposition.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "msgreen/parallel.hpp"

namespace msgreen {

namespace {

Eigen::VectorXd box_lo(int d, double v) { return Eigen::VectorXd::Constant(d, v); }

/// guard: the kernels have an integrable point singularity; a quadrature node
/// landing exactly on it contributes a measure-zero cell, so return 0 there
double guarded(const std::function<double(const Eigen::VectorXd&)>& f,
               const Eigen::VectorXd& z) {
    if (z.squaredNorm() < 1e-26) return 0.0;
    return f(z);
}

}  // namespace

double StarGreenSource::kernel(const Eigen::VectorXd& z) const { return star_.value(z); }

double StarGreenSource::point(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return star_.value(x - y);
}

double StarGreenSource::cell_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const int d = dim();
    Eigen::VectorXd z = x - y;
    auto f = [&](const Eigen::VectorXd& yp) {
        Eigen::VectorXd arg = z - yp;
        return guarded([&](const Eigen::VectorXd& a) { return star_.value(a); }, arg);
    };
    return integrate_box(f, box_lo(d, -0.5), box_lo(d, 0.5), &z, policy_);
}

WindowedGreenSource::WindowedGreenSource(const CoefficientField& field, int window_periods,
                                         double spacing, const Eigen::VectorXd& y, double tol) {
    FreespaceOptions opts;
    opts.tol = tol;
    opts.richardson_bias = false;
    delta_column_ = freespace_green(field, window_periods, spacing, y, opts);
    anchor_ = delta_column_.source;

    // cell-average column: rhs = indicator of the unit cell centred at y
    const TorusGrid& grid = delta_column_.grid();
    const int d = grid.dim;
    GridFunction rhs(grid);
    std::vector<int> c(d, 0);
    const std::int64_t total = grid.size();
    for (std::int64_t idx = 0; idx < total; ++idx) {
        Eigen::VectorXd delta = grid.node(c.data()) - anchor_;
        bool inside = true;
        for (int a = 0; a < d; ++a) {
            double w = wrap_delta(delta[a], grid.extent());
            if (w < -0.5 || w >= 0.5) inside = false;
        }
        rhs[idx] = inside ? 1.0 : 0.0;
        for (int a = d - 1; a >= 0; --a) {
            if (++c[a] < grid.points_per_axis) break;
            c[a] = 0;
        }
    }
    DiscreteOperator op = assemble(field, 1, grid);
    SolveOptions sopts;
    sopts.tol = tol;
    SolveResult res = solve(op, rhs, sopts);
    mean_column_ = std::move(res.u);
    mean_residual_ = res.residual;
}

void WindowedGreenSource::check_window(const Eigen::VectorXd& x) const {
    const double halfwidth = window_halfwidth();
    double reach = 0.0;
    for (int a = 0; a < x.size(); ++a)
        reach = std::max(reach, std::abs(wrap_delta(x[a] - anchor_[a], 2.0 * halfwidth)));
    // one unit cell of quadrature margin must stay inside the window
    if (reach + 1.0 > halfwidth) {
        std::ostringstream os;
        os << "windowed source: argument at |x - y|_inf = " << reach
           << " exceeds the window, need L >= "
           << 2.0 * std::ceil(reach + 1.0) << " periods (have "
           << delta_column_.window_periods << ")";
        throw std::domain_error(os.str());
    }
}

namespace {

/// G(x, y) = G(x - z, anchor) for the integer shift z = y - anchor of a
/// unit-periodic medium; only such y are representable by the column pair.
Eigen::VectorXd reduce_to_anchor(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& anchor) {
    Eigen::VectorXd shift = y - anchor;
    for (int a = 0; a < shift.size(); ++a)
        if (std::abs(shift[a] - std::round(shift[a])) > 1e-12)
            throw std::invalid_argument(
                "windowed source: y must be an integer shift of the anchor source");
    return x - shift;
}

}  // namespace

double WindowedGreenSource::point(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    Eigen::VectorXd xr = reduce_to_anchor(x, y, anchor_);
    check_window(xr);
    return delta_column_.at_point(xr);
}

double WindowedGreenSource::cell_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    Eigen::VectorXd xr = reduce_to_anchor(x, y, anchor_);
    check_window(xr);
    return mean_column_.interpolate(xr);
}

namespace {

/// H^k via the smoothing identity for translation-invariant kernels:
/// H = kernel(z) - 2 (kernel * chi_Q)(z) + (kernel * chi_Q * chi_Q)(z),
/// the last convolution carrying the tensor tent weight on [-1,1]^d.
double h_term_invariant(const GreenSource& src, const Eigen::VectorXd& z,
                        const QuadPolicy& policy) {
    const int d = src.dim();
    double point = src.kernel(z);

    Eigen::VectorXd scratch(d);
    auto f_single = [&](const Eigen::VectorXd& u) {
        for (int a = 0; a < d; ++a) scratch[a] = z[a] - u[a];
        if (scratch.squaredNorm() < 1e-26) return 0.0;
        return src.kernel(scratch);
    };
    const Eigen::VectorXd* sing = src.has_singularity() ? &z : nullptr;
    double single = integrate_box(f_single, box_lo(d, -0.5), box_lo(d, 0.5), sing, policy);

    auto f_tent = [&](const Eigen::VectorXd& w) {
        double tent = 1.0;
        for (int a = 0; a < d; ++a) {
            tent *= 1.0 - std::abs(w[a]);
            scratch[a] = z[a] - w[a];
        }
        if (scratch.squaredNorm() < 1e-26) return 0.0;
        return tent * src.kernel(scratch);
    };
    // orthant split keeps the tent weight smooth per box
    double dbl = 0.0;
    Eigen::VectorXd lo(d), hi(d);
    for (int mask = 0; mask < (1 << d); ++mask) {
        for (int a = 0; a < d; ++a) {
            lo[a] = (mask & (1 << a)) ? 0.0 : -1.0;
            hi[a] = (mask & (1 << a)) ? 1.0 : 0.0;
        }
        dbl += integrate_box(f_tent, lo, hi, sing, policy);
    }
    return point - 2.0 * single + dbl;
}

double h_term_general(const GreenSource& src, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& y, const QuadPolicy& policy) {
    const int d = src.dim();
    double a_term = src.point(x, y);
    double b_term = src.cell_mean(x, y);

    Eigen::VectorXd singular = y - x;  // in x' coordinates
    bool use_singular =
        src.has_singularity() && singular.cwiseAbs().maxCoeff() < 0.5 + 1e-9;
    const Eigen::VectorXd* sing = use_singular ? &singular : nullptr;

    auto f_point = [&](const Eigen::VectorXd& xp) { return src.point(x + xp, y); };
    double c_term = integrate_box(f_point, box_lo(d, -0.5), box_lo(d, 0.5), sing, policy);

    auto f_mean = [&](const Eigen::VectorXd& xp) { return src.cell_mean(x + xp, y); };
    double d_term = integrate_box(f_mean, box_lo(d, -0.5), box_lo(d, 0.5), sing, policy);

    return a_term - b_term - c_term + d_term;
}

void normalize_pair(Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y = x + wrap_delta(Eigen::VectorXd(y - x), 1.0);
}

double fit_beta(const std::vector<ShellSumResult>& shells, int m_max) {
    // least squares on log2 |T_m| vs m over m in [1, m_max]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int m = 1; m <= m_max; ++m) {
        double t = std::abs(shells[m].sum);
        if (t <= 0.0) continue;
        double lx = m, ly = std::log2(t);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return -slope;
}

}  // namespace

double h_term(const HTermContext& ctx, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
              const Eigen::VectorXi& k) {
    if (!ctx.source) throw std::invalid_argument("h_term: context has no source");
    const GreenSource& src = *ctx.source;
    Eigen::VectorXd kd = k.cast<double>();
    if (src.translation_invariant())
        return h_term_invariant(src, Eigen::VectorXd(x - y + kd), ctx.quadrature);
    // G(x, y - k) = G(x + k, y) for integer shifts of a unit-periodic medium
    return h_term_general(src, Eigen::VectorXd(x + kd), y, ctx.quadrature);
}

ShellSumResult shell_sum(const HTermContext& ctx, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y, int m, const HomogenizedTensor& tensor) {
    Eigen::VectorXd xn = x, yn = y;
    normalize_pair(xn, yn);
    const GreenSource& src = *ctx.source;

    double halfwidth = src.window_halfwidth();
    if (std::isfinite(halfwidth)) {
        double semi_axis = std::pow(2.0, m + 1) * std::sqrt(tensor.eigenvalues.maxCoeff());
        double needed = semi_axis + 1.5;  // pair offset plus one quadrature cell
        if (needed > halfwidth) {
            std::ostringstream os;
            os << "shell_sum: shell m=" << m << " reaches |k| ~ " << semi_axis
               << ", needs a window of L >= " << 2.0 * std::ceil(needed) << " periods";
            throw std::domain_error(os.str());
        }
    }

    ShellSet shell = enumerate_shell(m, tensor.a_star_sym, src.dim());
    std::vector<double> terms(shell.points.size());
    parallel_for(static_cast<std::int64_t>(shell.points.size()), [&](std::int64_t i) {
        terms[i] = h_term(ctx, xn, yn, shell.points[i]);
    });

    ShellSumResult res;
    res.count = static_cast<std::int64_t>(shell.points.size());
    for (double t : terms) {
        res.sum += t;
        res.abs_sum += std::abs(t);
    }
    return res;
}

DecompositionReport decompose(const HTermContext& ctx, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, int m_max,
                              const HomogenizedTensor& tensor) {
    DecompositionReport rep;
    rep.x = x;
    rep.y = y;
    normalize_pair(rep.x, rep.y);
    if ((rep.x - rep.y).norm() == 0.0)
        throw std::invalid_argument("decompose: x and y coincide");
    rep.field_tag = ctx.source->field_tag();

    double running = 0.0;
    for (int m = 0; m <= m_max; ++m) {
        rep.shells.push_back(shell_sum(ctx, rep.x, rep.y, m, tensor));
        running += rep.shells.back().sum;
        rep.partial_sums.push_back(running);
    }
    rep.beta_hat = fit_beta(rep.shells, m_max);
    return rep;
}

namespace {

double bspline2(double t) {
    t = std::abs(t);
    if (t <= 0.5) return 0.75 - t * t;
    if (t <= 1.5) return 0.5 * (1.5 - t) * (1.5 - t);
    return 0.0;
}

/// Exact cell mean int_Q H^k(x, y) dy for a translation-invariant kernel:
/// (H * chi)(k) = (G*chi)(k) - 2 (G*tent)(k) + (G*B2)(k), where tent and B2
/// are the double and triple cell convolutions of the indicator.
double h_mean_invariant(const GreenSource& src, const Eigen::VectorXd& z,
                        const QuadPolicy& policy) {
    const int d = src.dim();
    Eigen::VectorXd scratch(d);
    auto kern = [&](const Eigen::VectorXd& u) {
        for (int a = 0; a < d; ++a) scratch[a] = z[a] - u[a];
        if (scratch.squaredNorm() < 1e-26) return 0.0;
        return src.kernel(scratch);
    };
    const Eigen::VectorXd* sing = src.has_singularity() ? &z : nullptr;

    double phi = integrate_box(kern, box_lo(d, -0.5), box_lo(d, 0.5), sing, policy);

    double psi = 0.0, xi = 0.0;
    Eigen::VectorXd lo(d), hi(d);
    for (int mask = 0; mask < (1 << d); ++mask) {
        for (int a = 0; a < d; ++a) {
            lo[a] = (mask & (1 << a)) ? 0.0 : -1.0;
            hi[a] = (mask & (1 << a)) ? 1.0 : 0.0;
        }
        auto f_tent = [&](const Eigen::VectorXd& w) {
            double t = 1.0;
            for (int a = 0; a < d; ++a) t *= 1.0 - std::abs(w[a]);
            return t * kern(w);
        };
        psi += integrate_box(f_tent, lo, hi, sing, policy);
    }
    // B2 weight: 3^d smooth pieces on [-3/2, 3/2]^d
    const double cuts[4] = {-1.5, -0.5, 0.5, 1.5};
    std::vector<int> iv(d, 0);
    while (true) {
        for (int a = 0; a < d; ++a) {
            lo[a] = cuts[iv[a]];
            hi[a] = cuts[iv[a] + 1];
        }
        auto f_b2 = [&](const Eigen::VectorXd& w) {
            double t = 1.0;
            for (int a = 0; a < d; ++a) t *= bspline2(w[a]);
            return t * kern(w);
        };
        xi += integrate_box(f_b2, lo, hi, sing, policy);
        int a = d - 1;
        while (a >= 0) {
            if (++iv[a] < 3) break;
            iv[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
    return phi - 2.0 * psi + xi;
}

}  // namespace

MeanZeroResult verify_mean_zero(const HTermContext& ctx, const Eigen::VectorXd& x, int m_max,
                                const HomogenizedTensor& tensor, int grid_points_per_axis) {
    const int d = ctx.source->dim();
    const int nq = grid_points_per_axis;
    if (nq < 2 || nq % 2 != 0)
        throw std::invalid_argument("verify_mean_zero: grid points per axis must be even >= 2");

    // union of shells m <= m_max, evaluated on a midpoint y-grid over x + Q
    std::vector<Eigen::VectorXi> points;
    for (int m = 0; m <= m_max; ++m)
        for_each_shell_point(m, tensor.a_star_sym, d,
                             [&](const Eigen::VectorXi& k) { points.push_back(k); });

    std::int64_t cells = 1;
    for (int a = 0; a < d; ++a) cells *= nq;
    std::vector<double> s_values(cells, 0.0);
    const double step = 1.0 / nq;

    parallel_for(cells, [&](std::int64_t flat) {
        std::int64_t rem = flat;
        Eigen::VectorXd y(d);
        for (int a = d - 1; a >= 0; --a) {
            int j = static_cast<int>(rem % nq);
            rem /= nq;
            y[a] = x[a] + (j + 0.5) * step - 0.5;
        }
        double s = 0.0;
        for (const auto& k : points) s += h_term(ctx, x, y, k);
        s_values[flat] = s;
    });

    MeanZeroResult res;
    double acc = 0.0;
    for (double v : s_values) {
        acc += v;
        res.sup_s = std::max(res.sup_s, std::abs(v));
    }
    res.grid_residual = std::abs(acc) * std::pow(step, d);

    if (ctx.source->translation_invariant()) {
        std::vector<double> means(points.size());
        parallel_for(static_cast<std::int64_t>(points.size()), [&](std::int64_t i) {
            means[i] = h_mean_invariant(*ctx.source, points[i].cast<double>(), ctx.quadrature);
        });
        double exact = 0.0;
        for (double v : means) exact += v;
        res.residual = std::abs(exact);
    } else {
        res.residual = res.grid_residual;
    }
    return res;
}

CompareResult compare_with_direct(const DecompositionReport& report, const GreenTable& direct) {
    if (direct.kind != GreenTable::Kind::periodic)
        throw std::invalid_argument("compare_with_direct: needs a periodic table");
    if (direct.grid().dim != report.x.size())
        throw std::invalid_argument("compare_with_direct: dimension mismatch");
    if (!report.field_tag.empty() && report.field_tag != direct.field_tag)
        throw std::invalid_argument("compare_with_direct: field provenance mismatch (" +
                                    report.field_tag + " vs " + direct.field_tag + ")");
    if (wrap_delta(Eigen::VectorXd(direct.source - report.y), 1.0).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("compare_with_direct: table source differs from report y");

    double g = direct.at_point(report.x);
    CompareResult res;
    res.abs = std::abs(report.reconstructed() - g);
    res.rel = res.abs / std::abs(g);
    return res;
}

void write_report_json(const std::string& path, const DecompositionReport& report) {
    nlohmann::json j;
    j["x"] = std::vector<double>(report.x.data(), report.x.data() + report.x.size());
    j["y"] = std::vector<double>(report.y.data(), report.y.data() + report.y.size());
    j["shells"] = nlohmann::json::array();
    for (std::size_t m = 0; m < report.shells.size(); ++m)
        j["shells"].push_back({{"m", m},
                               {"T_m", report.shells[m].sum},
                               {"abs_sum", report.shells[m].abs_sum},
                               {"count", report.shells[m].count}});
    j["S"] = report.partial_sums;
    j["beta_hat"] = report.beta_hat;
    if (std::isfinite(report.direct_value)) {
        j["direct_value"] = report.direct_value;
        j["rel_error"] = report.rel_error;
    } else {
        j["direct_value"] = nullptr;
        j["rel_error"] = nullptr;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace msgreen
