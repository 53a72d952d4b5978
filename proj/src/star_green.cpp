#include "msgreen/star_green.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "msgreen/quadrature.hpp"

namespace msgreen {

double StarGreen::value(const Eigen::VectorXd& x) const {
    const int d = dim();
    double p = 0.0;
    for (int i = 0; i < d; ++i) {
        double qx = 0.0;
        for (int j = 0; j < d; ++j) qx += q_inv(i, j) * x[j];
        p += x[i] * qx;
    }
    if (p == 0.0) throw std::domain_error("StarGreen::value at the singularity");
    if (d == 3) return constant / std::sqrt(p);
    return constant * std::pow(p, -0.5 * (d - 2));
}

Eigen::VectorXd StarGreen::grad(const Eigen::VectorXd& x) const {
    const int d = dim();
    double p = x.dot(q_inv * x);
    if (p == 0.0) throw std::domain_error("StarGreen::grad at the singularity");
    return -constant * (d - 2) * std::pow(p, -0.5 * d) * (q_inv * x);
}

Eigen::MatrixXd StarGreen::hess(const Eigen::VectorXd& x) const {
    const int d = dim();
    Eigen::VectorXd qx = q_inv * x;
    double p = x.dot(qx);
    if (p == 0.0) throw std::domain_error("StarGreen::hess at the singularity");
    return constant * (d - 2) * std::pow(p, -0.5 * (d + 2)) *
           (d * (qx * qx.transpose()) - p * q_inv);
}

void sphere_quadrature(int dim, int order,
                       const std::function<void(const Eigen::VectorXd&, double)>& fn) {
    // spherical angles: theta_1..theta_{d-2} in [0, pi] by Gauss, phi by the
    // periodic trapezoid rule; Jacobian prod_i sin^{d-1-i}(theta_i)
    const int n_polar = dim - 2;
    const GaussRule& rule = gauss_legendre(order);
    const int n_phi = 2 * order;
    std::vector<int> iv(std::max(n_polar, 1), 0);
    Eigen::VectorXd u(dim);
    std::int64_t polar_count = 1;
    for (int a = 0; a < n_polar; ++a) polar_count *= order;

    for (std::int64_t flat = 0; flat < polar_count; ++flat) {
        double w_polar = 1.0;
        Eigen::VectorXd cs(n_polar), sn(n_polar);
        for (int a = 0; a < n_polar; ++a) {
            double theta = 0.5 * std::numbers::pi * (rule.nodes[iv[a]] + 1.0);
            w_polar *= 0.5 * std::numbers::pi * rule.weights[iv[a]] *
                       std::pow(std::sin(theta), dim - 1 - (a + 1));
            cs[a] = std::cos(theta);
            sn[a] = std::sin(theta);
        }
        for (int k = 0; k < n_phi; ++k) {
            double phi = 2.0 * std::numbers::pi * k / n_phi;
            double run = 1.0;
            for (int a = 0; a < n_polar; ++a) {
                u[a] = run * cs[a];
                run *= sn[a];
            }
            u[dim - 2] = run * std::cos(phi);
            u[dim - 1] = run * std::sin(phi);
            fn(u, w_polar * (2.0 * std::numbers::pi / n_phi));
        }
        for (int a = n_polar - 1; a >= 0; --a) {
            if (++iv[a] < order) break;
            iv[a] = 0;
        }
    }
}

double star_flux(const StarGreen& star, double r, int order) {
    const int d = star.dim();
    // ellipsoid {p(x) = r^2} as the image of the unit sphere under M = r Q^{1/2};
    // by Nanson's formula n dS = det(M) M^{-T} u dS(u)
    Eigen::MatrixXd m = r * star.q_sqrt;
    Eigen::MatrixXd m_inv_t = m.inverse().transpose();
    double det_m = m.determinant();
    double flux = 0.0;
    sphere_quadrature(d, order, [&](const Eigen::VectorXd& u, double w) {
        Eigen::VectorXd x = m * u;
        Eigen::VectorXd f = -(star.tensor.a_star * star.grad(x));
        flux += w * f.dot(det_m * (m_inv_t * u));
    });
    return flux;
}

StarGreen make_star_green(const HomogenizedTensor& tensor, int flux_order) {
    if (tensor.dim() < 3)
        throw std::invalid_argument("make_star_green: requires dimension >= 3");
    StarGreen star;
    star.tensor = tensor;
    star.q = tensor.a_star_sym;
    star.q_inv = tensor.a_star_sym.inverse();
    star.q_sqrt = tensor.eigenvectors *
                  tensor.eigenvalues.array().sqrt().matrix().asDiagonal() *
                  tensor.eigenvectors.transpose();
    star.constant = 1.0;
    double flux = star_flux(star, 1.0, flux_order);
    star.constant = 1.0 / flux;
    return star;
}

double star_hessian_surface_integral(const StarGreen& star, int i, int j, double r,
                                     int order) {
    const int d = star.dim();
    // x = V diag(1/lambda_k) xt with |xt| = r; integrate against dS(xt)
    Eigen::MatrixXd map = star.tensor.eigenvectors *
                          star.tensor.lambda.cwiseInverse().asDiagonal();
    Eigen::VectorXd fi = star.tensor.eigenvectors.col(i);
    Eigen::VectorXd fj = star.tensor.eigenvectors.col(j);
    double acc = 0.0;
    double scale = std::pow(r, d - 1);
    sphere_quadrature(d, order, [&](const Eigen::VectorXd& u, double w) {
        Eigen::VectorXd x = map * (r * u);
        acc += w * scale * fi.dot(star.hess(x) * fj);
    });
    return acc;
}

Eigen::MatrixXd two_scale_hessian(const CorrectorSet& set, const StarGreen& star,
                                  const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const int d = star.dim();
    Eigen::VectorXd z = x - y;
    if (z.norm() == 0.0) throw std::domain_error("two_scale_hessian: x == y");
    Eigen::MatrixXd h = star.hess(z);
    Eigen::MatrixXd px = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd py = Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i) {
        px.col(i) += set.gradient(i, x);
        py.col(i) += set.gradient(i, y, true);
    }
    return -px * h * py.transpose();
}

}  // namespace msgreen
