#pragma once

#include "msgreen/coeff_field.hpp"
#include "msgreen/grid.hpp"

namespace msgreen {

/// Conservative finite-volume discretization of -div(A(n.)grad u) on a torus.
///
/// The operator is assembled as D^T M D with D the per-axis staggered forward
/// difference. Diagonal entries of A act per face, sampled at the face
/// midpoint; off-diagonal entries act on the cell-averaged gradient, sampled
/// at the cell node. This keeps L symmetric whenever A is symmetric and makes
/// assemble(A^T) the exact transpose of assemble(A), which the Green-function
/// identities rely on.
struct DiscreteOperator {
    TorusGrid grid;
    int oscillation = 1;
    bool symmetric = true;
    bool has_offdiag = false;
    std::string field_tag;

    /// face_diag[axis][cell] = A_axis,axis at the midpoint of face cell -> cell+e_axis
    std::vector<std::vector<double>> face_diag;
    /// row-major d*d per cell with zero diagonal; empty when A is diagonal-valued
    std::vector<double> cell_offdiag;
    /// volume average of A (diagonal from face samples, off-diagonal from cells)
    Eigen::MatrixXd mean_coefficient;

    void apply(const GridFunction& u, GridFunction& out) const;
    GridFunction apply(const GridFunction& u) const;

    /// L applied to the linear coordinate function x -> x_i (well defined on the
    /// torus since only the gradient e_i enters). The corrector problem for
    /// direction i reads L w_i = -apply_to_coordinate(i).
    GridFunction apply_to_coordinate(int axis) const;

    /// <Lu, v> h^d, the discrete energy pairing used by the symmetry tests.
    double energy(const GridFunction& u, const GridFunction& v) const;

    /// Squared norm of the staggered gradient: sum over faces of (Du)^2 h^d.
    static double grad_norm2(const TorusGrid& grid, const GridFunction& u);
};

DiscreteOperator assemble(const CoefficientField& field, int oscillation, const TorusGrid& grid);

/// Zero-mean discrete point source: h^-d - extent^-d at y, -extent^-d elsewhere.
GridFunction discrete_delta(const TorusGrid& grid, const std::vector<int>& y);

}  // namespace msgreen
