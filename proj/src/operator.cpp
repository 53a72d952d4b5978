#include "msgreen/operator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace msgreen {

namespace {

/// Odometer over all cells; fn(idx, coords, plus, minus) gets, per axis, the
/// linear-index offsets of the +e_a / -e_a neighbours (periodic).
template <typename Fn>
void for_each_cell(const TorusGrid& g, Fn&& fn) {
    const int d = g.dim;
    const int n = g.points_per_axis;
    std::int64_t stride[8];
    stride[d - 1] = 1;
    for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * n;
    int c[8] = {0};
    std::int64_t plus[8], minus[8];
    for (int a = 0; a < d; ++a) {
        plus[a] = stride[a];
        minus[a] = (n - 1) * stride[a];
    }
    const std::int64_t total = g.size();
    for (std::int64_t idx = 0; idx < total; ++idx) {
        fn(idx, c, plus, minus);
        for (int a = d - 1; a >= 0; --a) {
            if (++c[a] < n) {
                plus[a] = (c[a] == n - 1) ? stride[a] * (1 - n) : stride[a];
                minus[a] = (c[a] == 0) ? (n - 1) * stride[a] : -stride[a];
                break;
            }
            c[a] = 0;
            plus[a] = stride[a];
            minus[a] = (n - 1) * stride[a];
        }
    }
}

}  // namespace

DiscreteOperator assemble(const CoefficientField& field, int oscillation, const TorusGrid& grid) {
    if (field.dim() != grid.dim) throw std::invalid_argument("assemble: dimension mismatch");
    if (oscillation < 1) throw std::invalid_argument("assemble: oscillation must be >= 1");
    const double per_period = grid.points_per_axis / grid.extent();
    if (per_period < 8.0 * oscillation) {
        std::ostringstream os;
        os << "assemble: grid does not resolve the oscillation, need N >= "
           << 8 * oscillation << " points per unit period, got " << per_period;
        throw std::invalid_argument(os.str());
    }

    const int d = grid.dim;
    const double h = grid.spacing();
    DiscreteOperator op;
    op.grid = grid;
    op.oscillation = oscillation;
    op.symmetric = field.symmetric();
    op.field_tag = field.describe() + " n=" + std::to_string(oscillation);
    op.face_diag.assign(d, std::vector<double>(grid.size(), 0.0));

    // one probe decides whether off-diagonal storage is needed at all
    bool any_offdiag = false;
    for (int probe = 0; probe < 64 && !any_offdiag; ++probe) {
        Eigen::MatrixXd a = field.sample(halton_point(probe, d), oscillation);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j && std::abs(a(i, j)) > 0.0) any_offdiag = true;
    }
    op.has_offdiag = any_offdiag;
    if (any_offdiag) op.cell_offdiag.assign(grid.size() * d * d, 0.0);

    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd x(d);
    for_each_cell(grid, [&](std::int64_t idx, const int* c, const std::int64_t*,
                            const std::int64_t*) {
        for (int a = 0; a < d; ++a) x[a] = c[a] * h;
        for (int a = 0; a < d; ++a) {
            x[a] += 0.5 * h;
            Eigen::MatrixXd af = field.sample(x, oscillation);
            op.face_diag[a][idx] = af(a, a);
            mean(a, a) += af(a, a);
            x[a] -= 0.5 * h;
        }
        if (any_offdiag) {
            Eigen::MatrixXd ac = field.sample(x, oscillation);
            double* block = op.cell_offdiag.data() + idx * d * d;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    if (i != j) {
                        block[i * d + j] = ac(i, j);
                        mean(i, j) += ac(i, j);
                    }
        }
    });
    op.mean_coefficient = mean / static_cast<double>(grid.size());
    return op;
}

void DiscreteOperator::apply(const GridFunction& u, GridFunction& out) const {
    if (!(u.grid == grid)) throw std::invalid_argument("apply: grid mismatch");
    const int d = grid.dim;
    const double h = grid.spacing();
    const std::int64_t total = grid.size();

    // face fluxes w(c, a) for the face between c and c+e_a
    static thread_local std::vector<std::vector<double>> w_storage;
    if (static_cast<int>(w_storage.size()) < d) w_storage.resize(d);
    for (int a = 0; a < d; ++a) w_storage[a].assign(total, 0.0);
    auto& w = w_storage;

    for_each_cell(grid, [&](std::int64_t idx, const int*, const std::int64_t* plus,
                            const std::int64_t*) {
        for (int a = 0; a < d; ++a)
            w[a][idx] = face_diag[a][idx] * (u[idx + plus[a]] - u[idx]) / h;
    });

    if (has_offdiag) {
        static thread_local std::vector<double> t_storage;
        t_storage.assign(total * d, 0.0);
        auto& t = t_storage;
        for_each_cell(grid, [&](std::int64_t idx, const int*, const std::int64_t* plus,
                                const std::int64_t* minus) {
            const double* block = cell_offdiag.data() + idx * d * d;
            double gbar[8];
            for (int a = 0; a < d; ++a) {
                double g_here = (u[idx + plus[a]] - u[idx]) / h;
                double g_back = (u[idx] - u[idx + minus[a]]) / h;
                gbar[a] = 0.5 * (g_here + g_back);
            }
            for (int i = 0; i < d; ++i) {
                double acc = 0.0;
                for (int j = 0; j < d; ++j)
                    if (j != i) acc += block[i * d + j] * gbar[j];
                t[idx * d + i] = acc;
            }
        });
        for_each_cell(grid, [&](std::int64_t idx, const int*, const std::int64_t* plus,
                                const std::int64_t*) {
            for (int a = 0; a < d; ++a)
                w[a][idx] += 0.5 * (t[idx * d + a] + t[(idx + plus[a]) * d + a]);
        });
    }

    for_each_cell(grid, [&](std::int64_t idx, const int*, const std::int64_t*,
                            const std::int64_t* minus) {
        double acc = 0.0;
        for (int a = 0; a < d; ++a) acc -= (w[a][idx] - w[a][idx + minus[a]]) / h;
        out[idx] = acc;
    });
}

GridFunction DiscreteOperator::apply(const GridFunction& u) const {
    GridFunction out(grid);
    apply(u, out);
    return out;
}

GridFunction DiscreteOperator::apply_to_coordinate(int axis) const {
    const int d = grid.dim;
    const double h = grid.spacing();
    const std::int64_t total = grid.size();
    std::vector<std::vector<double>> w(d, std::vector<double>(total, 0.0));

    for (std::int64_t idx = 0; idx < total; ++idx) w[axis][idx] = face_diag[axis][idx];
    if (has_offdiag) {
        std::vector<double> t(total * d, 0.0);
        for (std::int64_t idx = 0; idx < total; ++idx) {
            const double* block = cell_offdiag.data() + idx * d * d;
            for (int i = 0; i < d; ++i) t[idx * d + i] = block[i * d + axis];
        }
        for_each_cell(grid, [&](std::int64_t idx, const int*, const std::int64_t* plus,
                                const std::int64_t*) {
            for (int a = 0; a < d; ++a)
                w[a][idx] += 0.5 * (t[idx * d + a] + t[(idx + plus[a]) * d + a]);
        });
    }

    GridFunction out(grid);
    for_each_cell(grid, [&](std::int64_t idx, const int*, const std::int64_t*,
                            const std::int64_t* minus) {
        double acc = 0.0;
        for (int a = 0; a < d; ++a) acc -= (w[a][idx] - w[a][idx + minus[a]]) / h;
        out[idx] = acc;
    });
    return out;
}

double DiscreteOperator::energy(const GridFunction& u, const GridFunction& v) const {
    GridFunction lu = apply(u);
    double hd = std::pow(grid.spacing(), grid.dim);
    return lu.dot(v) * hd;
}

double DiscreteOperator::grad_norm2(const TorusGrid& grid, const GridFunction& u) {
    const int d = grid.dim;
    const double h = grid.spacing();
    double hd = std::pow(h, d);
    double acc = 0.0;
    for_each_cell(grid, [&](std::int64_t idx, const int*, const std::int64_t* plus,
                            const std::int64_t*) {
        for (int a = 0; a < d; ++a) {
            double g = (u[idx + plus[a]] - u[idx]) / h;
            acc += g * g;
        }
    });
    return acc * hd;
}

GridFunction discrete_delta(const TorusGrid& grid, const std::vector<int>& y) {
    if (static_cast<int>(y.size()) != grid.dim)
        throw std::invalid_argument("discrete_delta: index dimension mismatch");
    GridFunction f(grid);
    double bg = -1.0 / std::pow(grid.extent(), grid.dim);
    for (double& v : f.values) v = bg;
    f.values[grid.flatten(y.data())] += std::pow(grid.spacing(), -grid.dim);
    return f;
}

}  // namespace msgreen
