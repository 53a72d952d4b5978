#pragma once

#include <stdexcept>
#include <vector>

#include "msgreen/operator.hpp"

namespace msgreen {

struct SolveOptions {
    double tol = 1e-10;   // relative residual target, ||Lu - f||_2 <= tol ||f||_2
    int max_iterations = 0;  // 0: 10 * points per axis
};

struct SolveResult {
    GridFunction u;
    double residual = 0.0;  // achieved relative residual
    int iterations = 0;
    std::vector<double> residual_history;
};

class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// Solve L u = rhs for the zero-mean periodic solution. The rhs mean is
/// projected off first. Conjugate gradients for symmetric operators,
/// BiCGStab otherwise, both preconditioned by the spectral inverse of the
/// mean-coefficient operator, with a mean projection every iteration.
SolveResult solve(const DiscreteOperator& op, const GridFunction& rhs,
                  const SolveOptions& options = {});

}  // namespace msgreen
