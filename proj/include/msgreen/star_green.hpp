#pragma once

#include "msgreen/cell_problems.hpp"

namespace msgreen {

/// Fundamental solution of -div(A* grad .) in R^d, d >= 3:
///   G*(x) = C(Q) / (x . Q^-1 x)^{(d-2)/2},  Q = symmetric part of A*.
/// The constant is fixed numerically by requiring unit flux of -A* grad G*
/// through a surface enclosing the origin.
struct StarGreen {
    HomogenizedTensor tensor;
    Eigen::MatrixXd q;      // a_star_sym
    Eigen::MatrixXd q_inv;
    Eigen::MatrixXd q_sqrt;
    double constant = 0.0;  // C(A*_s)

    int dim() const { return static_cast<int>(q.rows()); }
    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd grad(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd hess(const Eigen::VectorXd& x) const;
};

StarGreen make_star_green(const HomogenizedTensor& tensor, int flux_order = 48);

/// Flux of -A* grad G* through the ellipsoid {x . Q^-1 x = r^2}, by surface
/// quadrature. Equals 1 for a normalized StarGreen, at any r.
double star_flux(const StarGreen& star, double r, int order = 48);

/// Integral over {x : x.Q^-1 x = r^2} of f_i . hess G*(x) . f_j (f_k the
/// eigenvectors of Q), taken against the spherical measure of the coordinates
/// adapted to Q. Vanishes for every i, j by the sign-flip and relabeling
/// symmetries of that parametrization.
double star_hessian_surface_integral(const StarGreen& star, int i, int j, double r,
                                     int order = 48);

/// Surrogate for the mixed second derivative of the whole-space Green
/// function: sum_ij d_xi d_yj G*(x-y) (e_i + grad w_i(x)) (x) (e_j + grad
/// w_j^dagger(y)), with d_xi d_yj G*(x-y) = -hess_ij G*(x-y).
Eigen::MatrixXd two_scale_hessian(const CorrectorSet& set, const StarGreen& star,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Tensor-product quadrature over the unit sphere S^{d-1}; calls
/// fn(point, weight) with weights summing to the sphere area.
void sphere_quadrature(int dim, int order,
                       const std::function<void(const Eigen::VectorXd&, double)>& fn);

}  // namespace msgreen
