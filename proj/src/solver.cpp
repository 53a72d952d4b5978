#include "msgreen/solver.hpp"

#include <cmath>

#include "msgreen/spectral.hpp"

namespace msgreen {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void project_mean(std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m += v;
    m /= static_cast<double>(a.size());
    for (double& v : a) v -= m;
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

SolveResult run_cg(const DiscreteOperator& op, const std::vector<double>& b, double tol,
                   int max_iter) {
    const double bnorm = norm2(b);
    SpectralPreconditioner prec(op.grid, op.mean_coefficient);
    GridFunction xg(op.grid), pg(op.grid), qg(op.grid);
    std::vector<double>& x = xg.values;
    std::vector<double> r = b, z;
    prec.apply(r, z);
    project_mean(z);
    pg.values = z;
    double rz = dot(r, z);
    std::vector<double> history;
    history.push_back(1.0);

    for (int it = 1; it <= max_iter; ++it) {
        op.apply(pg, qg);
        double pq = dot(pg.values, qg.values);
        double alpha = rz / pq;
        axpy(alpha, pg.values, x);
        axpy(-alpha, qg.values, r);
        project_mean(x);
        project_mean(r);
        double rel = norm2(r) / bnorm;
        history.push_back(rel);
        if (rel <= tol) {
            // confirm against the true residual before accepting
            op.apply(xg, qg);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - qg.values[i];
            project_mean(r);
            rel = norm2(r) / bnorm;
            history.back() = rel;
            if (rel <= tol) {
                SolveResult res;
                res.u = std::move(xg);
                res.residual = rel;
                res.iterations = it;
                res.residual_history = std::move(history);
                return res;
            }
        }
        prec.apply(r, z);
        project_mean(z);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < z.size(); ++i) pg.values[i] = z[i] + beta * pg.values[i];
    }
    std::string msg = "conjugate gradient did not converge in " + std::to_string(max_iter) +
                      " iterations (relative residual " + std::to_string(history.back()) + ")";
    throw SolverFailure(msg, std::move(history));
}

SolveResult run_bicgstab(const DiscreteOperator& op, const std::vector<double>& b, double tol,
                         int max_iter) {
    const double bnorm = norm2(b);
    SpectralPreconditioner prec(op.grid, op.mean_coefficient);
    const std::size_t total = b.size();
    GridFunction xg(op.grid), tmp_in(op.grid), tmp_out(op.grid);
    std::vector<double>& x = xg.values;
    std::vector<double> r = b, rhat = b, p(total, 0.0), v(total, 0.0);
    std::vector<double> phat, shat, s(total), t(total);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    std::vector<double> history;
    history.push_back(1.0);

    auto apply_op = [&](const std::vector<double>& in, std::vector<double>& out) {
        tmp_in.values = in;
        op.apply(tmp_in, tmp_out);
        out = tmp_out.values;
    };

    for (int it = 1; it <= max_iter; ++it) {
        double rho_new = dot(rhat, r);
        if (rho_new == 0.0)
            throw SolverFailure("bicgstab breakdown (rho = 0)", std::move(history));
        double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < total; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        prec.apply(p, phat);
        project_mean(phat);
        apply_op(phat, v);
        alpha = rho / dot(rhat, v);
        for (std::size_t i = 0; i < total; ++i) s[i] = r[i] - alpha * v[i];
        if (norm2(s) / bnorm <= 0.01 * tol) {
            axpy(alpha, phat, x);
            project_mean(x);
            r = s;
            history.push_back(norm2(r) / bnorm);
        } else {
            prec.apply(s, shat);
            project_mean(shat);
            apply_op(shat, t);
            omega = dot(t, s) / dot(t, t);
            axpy(alpha, phat, x);
            axpy(omega, shat, x);
            project_mean(x);
            for (std::size_t i = 0; i < total; ++i) r[i] = s[i] - omega * t[i];
            project_mean(r);
            history.push_back(norm2(r) / bnorm);
        }
        if (history.back() <= tol) {
            apply_op(x, t);
            for (std::size_t i = 0; i < total; ++i) r[i] = b[i] - t[i];
            project_mean(r);
            double rel = norm2(r) / bnorm;
            history.back() = rel;
            if (rel <= tol) {
                SolveResult res;
                res.u = std::move(xg);
                res.residual = rel;
                res.iterations = it;
                res.residual_history = std::move(history);
                return res;
            }
        }
    }
    std::string msg = "bicgstab did not converge in " + std::to_string(max_iter) +
                      " iterations (relative residual " + std::to_string(history.back()) + ")";
    throw SolverFailure(msg, std::move(history));
}

}  // namespace

SolveResult solve(const DiscreteOperator& op, const GridFunction& rhs,
                  const SolveOptions& options) {
    if (!(rhs.grid == op.grid)) throw std::invalid_argument("solve: grid mismatch");
    std::vector<double> b = rhs.values;
    project_mean(b);

    SolveResult res;
    if (norm2(b) == 0.0) {
        res.u = GridFunction(op.grid);
        res.residual = 0.0;
        res.iterations = 0;
        res.residual_history = {0.0};
        return res;
    }
    int max_iter =
        options.max_iterations > 0 ? options.max_iterations : 10 * op.grid.points_per_axis;
    if (op.symmetric) return run_cg(op, b, options.tol, max_iter);
    return run_bicgstab(op, b, options.tol, max_iter);
}

}  // namespace msgreen
