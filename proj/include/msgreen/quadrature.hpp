#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace msgreen {

/// Gauss-Legendre rule on [-1, 1], cached per order.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Composite rule on [0, 1]: `intervals` equal subintervals, `per_interval`
/// Gauss points each. Used where the integrand has interpolation kinks, so a
/// single high-order rule would stall.
GaussRule composite_gauss_unit(int intervals, int per_interval);

struct QuadPolicy {
    int points_per_axis = 12;  // tensor Gauss order on smooth boxes
    int refine_depth = 12;     // dyadic refinement levels toward a singular point
    bool distance_scaled = false;  // reduce the order on boxes far from the singularity
    int refined_order = 5;     // order inside the refinement tree, where the
                               // subdivision rather than the rule drives accuracy
};

/// Tensor-product integration of f over the box [lo, hi], with optional dyadic
/// refinement toward `singular` (refine while the box is within one diameter
/// of it). Singular integrands must be integrable; the residual box at the
/// bottom of the recursion is integrated with the plain rule.
double integrate_box(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                     const Eigen::VectorXd* singular, const QuadPolicy& policy);

}  // namespace msgreen
