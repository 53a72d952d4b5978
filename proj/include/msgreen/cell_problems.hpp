#pragma once

#include <optional>

#include "msgreen/operator.hpp"
#include "msgreen/solver.hpp"

namespace msgreen {

/// Constant effective tensor with the eigenstructure of its symmetric part.
/// a_star_sym = eigenvectors * diag(eigenvalues) * eigenvectors^T and
/// lambda_i = eigenvalues_i^{-1/2}, so a_star_sym = V diag(lambda^-2) V^T.
struct HomogenizedTensor {
    Eigen::MatrixXd a_star;
    Eigen::MatrixXd a_star_sym;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    Eigen::VectorXd lambda;

    int dim() const { return static_cast<int>(a_star.rows()); }
    /// Builds the symmetric part and its eigendecomposition; throws if the
    /// symmetric part is not positive definite.
    static HomogenizedTensor from_matrix(const Eigen::MatrixXd& a_star);
};

/// Correctors w_i (for A) and adjoint correctors w_i^dagger (for A^T),
/// zero-mean periodic solutions of -div(A (grad w_i + e_i)) = 0.
struct CorrectorSet {
    CoefficientField field;
    TorusGrid grid;
    DiscreteOperator op;                        // operator for A at oscillation 1
    std::optional<DiscreteOperator> op_adjoint;  // absent when A is symmetric
    std::vector<GridFunction> w;
    std::vector<GridFunction> w_dagger;
    std::vector<double> residuals;  // w_1..w_d then w_1^dagger..w_d^dagger

    double value(int i, const Eigen::VectorXd& x, bool adjoint = false) const;
    Eigen::VectorXd gradient(int i, const Eigen::VectorXd& x, bool adjoint = false) const;
};

CorrectorSet correctors(const CoefficientField& field, const TorusGrid& grid, double tol = 1e-10);

/// A*_{ji} = average of [A (e_i + grad w_i)]_j, accumulated with the same
/// staggered differences as the operator stencil.
HomogenizedTensor homogenize(const CorrectorSet& set);

/// Q_ij(x, y) = w_i(x) w_j^dagger(y), correctors interpolated multilinearly.
Eigen::MatrixXd q_tensor(const CorrectorSet& set, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y);

/// Same tensor from its defining integral
///   int_{Q^2} int_{[0,1]^2} (x'.(e_i + grad w_i(x + t x')))
///                           (y'.(e_j + grad w_j^dagger(y + tau y'))) dtau dt dy' dx',
/// which factorizes over (x', t) and (y', tau); each factor is evaluated by a
/// composite Gauss rule with `points_per_axis` points per axis. Exists to test
/// the identity Q_ij = w_i(x) w_j^dagger(y).
Eigen::MatrixXd q_tensor_oracle(const CorrectorSet& set, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y, int points_per_axis = 16);

}  // namespace msgreen
