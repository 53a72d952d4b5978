#include "msgreen/cell_problems.hpp"

#include <cmath>
#include <stdexcept>

#include "msgreen/quadrature.hpp"

namespace msgreen {

HomogenizedTensor HomogenizedTensor::from_matrix(const Eigen::MatrixXd& a_star) {
    HomogenizedTensor t;
    t.a_star = a_star;
    t.a_star_sym = 0.5 * (a_star + a_star.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.a_star_sym);
    t.eigenvalues = es.eigenvalues();
    t.eigenvectors = es.eigenvectors();
    if (t.eigenvalues.minCoeff() <= 0.0)
        throw std::runtime_error("HomogenizedTensor: symmetric part is not positive definite");
    t.lambda = t.eigenvalues.array().pow(-0.5).matrix();
    return t;
}

CorrectorSet correctors(const CoefficientField& field, const TorusGrid& grid, double tol) {
    const int d = grid.dim;
    CorrectorSet set{field, grid, assemble(field, 1, grid), std::nullopt, {}, {}, {}};
    if (!field.symmetric()) set.op_adjoint = assemble(field.transposed(), 1, grid);

    SolveOptions opts;
    opts.tol = tol;
    auto solve_direction = [&](const DiscreteOperator& op, int i) {
        GridFunction rhs = op.apply_to_coordinate(i);
        for (double& v : rhs.values) v = -v;
        SolveResult r = solve(op, rhs, opts);
        set.residuals.push_back(r.residual);
        return std::move(r.u);
    };

    for (int i = 0; i < d; ++i) set.w.push_back(solve_direction(set.op, i));
    if (set.op_adjoint) {
        for (int i = 0; i < d; ++i) set.w_dagger.push_back(solve_direction(*set.op_adjoint, i));
    } else {
        set.w_dagger = set.w;
        set.residuals.insert(set.residuals.end(), set.residuals.begin(),
                             set.residuals.begin() + d);
    }
    return set;
}

double CorrectorSet::value(int i, const Eigen::VectorXd& x, bool adjoint) const {
    return (adjoint ? w_dagger : w)[i].interpolate(x);
}

Eigen::VectorXd CorrectorSet::gradient(int i, const Eigen::VectorXd& x, bool adjoint) const {
    return (adjoint ? w_dagger : w)[i].interpolate_gradient(x);
}

HomogenizedTensor homogenize(const CorrectorSet& set) {
    const TorusGrid& grid = set.grid;
    const DiscreteOperator& op = set.op;
    const int d = grid.dim;
    const int n = grid.points_per_axis;
    const double h = grid.spacing();
    const std::int64_t total = grid.size();

    std::int64_t stride[8];
    stride[d - 1] = 1;
    for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;

    Eigen::MatrixXd a_star = Eigen::MatrixXd::Zero(d, d);
    std::vector<int> c(d, 0);
    for (int i = 0; i < d; ++i) {
        const GridFunction& wi = set.w[i];
        std::fill(c.begin(), c.end(), 0);
        for (std::int64_t idx = 0; idx < total; ++idx) {
            // face part: flux component j lives on the face cell -> cell+e_j
            for (int j = 0; j < d; ++j) {
                std::int64_t plus = (c[j] == n - 1) ? idx + stride[j] * (1 - n) : idx + stride[j];
                double g = (wi[plus] - wi[idx]) / h;
                a_star(j, i) += op.face_diag[j][idx] * ((i == j ? 1.0 : 0.0) + g);
            }
            if (op.has_offdiag) {
                const double* block = op.cell_offdiag.data() + idx * d * d;
                for (int l = 0; l < d; ++l) {
                    std::int64_t plus =
                        (c[l] == n - 1) ? idx + stride[l] * (1 - n) : idx + stride[l];
                    std::int64_t minus =
                        (c[l] == 0) ? idx + stride[l] * (n - 1) : idx - stride[l];
                    double gbar =
                        0.5 * ((wi[plus] - wi[idx]) / h + (wi[idx] - wi[minus]) / h);
                    double e_plus_grad = (i == l ? 1.0 : 0.0) + gbar;
                    for (int j = 0; j < d; ++j)
                        if (j != l) a_star(j, i) += block[j * d + l] * e_plus_grad;
                }
            }
            for (int a = d - 1; a >= 0; --a) {
                if (++c[a] < n) break;
                c[a] = 0;
            }
        }
    }
    a_star /= static_cast<double>(total);
    return HomogenizedTensor::from_matrix(a_star);
}

Eigen::MatrixXd q_tensor(const CorrectorSet& set, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y) {
    const int d = set.grid.dim;
    Eigen::VectorXd wx(d), wy(d);
    for (int i = 0; i < d; ++i) {
        wx[i] = set.value(i, x);
        wy[i] = set.value(i, y, true);
    }
    return wx * wy.transpose();
}

namespace {

/// int_0^1 u . grad w_i(p + t u) dt for every i. The interpolant is a
/// polynomial of degree <= d-1 along the segment inside each grid cell, so a
/// two-point Gauss rule between consecutive cell crossings integrates each
/// piece exactly.
void segment_gradient_line_integral(const CorrectorSet& set, const Eigen::VectorXd& p,
                                    const Eigen::VectorXd& u, bool adjoint, Eigen::VectorXd& out) {
    const int d = set.grid.dim;
    const double h = set.grid.spacing();
    static thread_local std::vector<double> cuts;
    cuts.clear();
    cuts.push_back(0.0);
    for (int a = 0; a < d; ++a) {
        if (u[a] == 0.0) continue;
        double first = (u[a] > 0 ? std::ceil(p[a] / h) : std::floor(p[a] / h)) * h;
        for (double plane = first;; plane += (u[a] > 0 ? h : -h)) {
            double t = (plane - p[a]) / u[a];
            if (t >= 1.0) break;
            if (t > 0.0) cuts.push_back(t);
        }
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());

    const GaussRule& gl2 = gauss_legendre(2);
    out.setZero(d);
    Eigen::VectorXd q(d);
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        double t0 = cuts[seg], t1 = cuts[seg + 1];
        if (t1 - t0 < 1e-15) continue;
        for (int node = 0; node < 2; ++node) {
            double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gl2.nodes[node];
            double wt = 0.5 * (t1 - t0) * gl2.weights[node];
            q = p + t * u;
            for (int i = 0; i < d; ++i) out[i] += wt * u.dot(set.gradient(i, q, adjoint));
        }
    }
}

/// F_i(p) = int_Q int_0^1 u.(e_i + grad w_i(p + t u)) dt du for all i at once.
Eigen::VectorXd segment_average_factor(const CorrectorSet& set, const Eigen::VectorXd& p,
                                       bool adjoint, int points_per_axis) {
    const int d = set.grid.dim;
    const int intervals = std::max(1, points_per_axis / 2);
    GaussRule axis = composite_gauss_unit(intervals, 2);  // on [0,1]
    const std::size_t m = axis.nodes.size();

    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    std::vector<std::size_t> iv(d, 0);
    Eigen::VectorXd u(d), line(d);
    std::size_t count = 1;
    for (int a = 0; a < d; ++a) count *= m;
    for (std::size_t flat = 0; flat < count; ++flat) {
        double wu = 1.0;
        for (int a = 0; a < d; ++a) {
            u[a] = axis.nodes[iv[a]] - 0.5;  // map [0,1] -> Q
            wu *= axis.weights[iv[a]];
        }
        segment_gradient_line_integral(set, p, u, adjoint, line);
        for (int i = 0; i < d; ++i) acc[i] += wu * (u[i] + line[i]);
        for (int a = d - 1; a >= 0; --a) {
            if (++iv[a] < m) break;
            iv[a] = 0;
        }
    }
    return acc;
}

}  // namespace

Eigen::MatrixXd q_tensor_oracle(const CorrectorSet& set, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y, int points_per_axis) {
    if (points_per_axis < 2) throw std::invalid_argument("q_tensor_oracle: order must be >= 2");
    Eigen::VectorXd fx = segment_average_factor(set, x, false, points_per_axis);
    Eigen::VectorXd fy = segment_average_factor(set, y, true, points_per_axis);
    return fx * fy.transpose();
}

}  // namespace msgreen
