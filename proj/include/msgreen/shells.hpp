#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "msgreen/star_green.hpp"

namespace msgreen {

/// Lattice shell Gamma_m of the quadratic form Q (= A*_s):
///   m = 0:  0      <= k.Q^-1.k < 4
///   m >= 1: 4^m    <= k.Q^-1.k < 4^{m+1}.
/// The half-open intervals partition Z^d.
struct ShellSet {
    int m = 0;
    Eigen::MatrixXd q_form;
    std::vector<Eigen::VectorXi> points;
};

/// Index of the shell containing k. Throws on a non-SPD form.
int shell_index(const Eigen::VectorXi& k, const Eigen::MatrixXd& q_form);

/// Visit every k in Gamma_m once (axis-aligned bounding-box scan of the outer
/// ellipsoid with the exact quadratic-form test). Throws when the scan box
/// exceeds `point_cap` candidates.
void for_each_shell_point(int m, const Eigen::MatrixXd& q_form, int dim,
                          const std::function<void(const Eigen::VectorXi&)>& fn,
                          std::int64_t point_cap = (std::int64_t{1} << 31));

ShellSet enumerate_shell(int m, const Eigen::MatrixXd& q_form, int dim,
                         std::int64_t point_cap = (std::int64_t{1} << 31));

/// S_m = sum over Gamma_m of hess G*(k), k = 0 excluded (m = 0 sums over
/// Gamma_0 \ {0}). abs_scale, when given, receives the entrywise-max of
/// sum |hess G*(k)|, the natural scale for the cancellation tests.
/// `orbit_grouped` accumulates signed-permutation orbits first; the result
/// must agree with the naive order to roundoff.
Eigen::MatrixXd shell_hessian_sum(int m, const StarGreen& star, double* abs_scale = nullptr,
                                  bool orbit_grouped = false);

struct ShellDecayRow {
    int m = 0;
    std::int64_t count = 0;      // lattice points in the shell (k=0 excluded for m=0)
    Eigen::MatrixXd sum;         // S_m
    double norm = 0.0;           // max |entry| of S_m
    double abs_sum = 0.0;        // max entry of sum of |hess| terms
    double ratio = 0.0;          // norm(m) / norm(m-1), 0 for the first row
};

/// Rows m = 1..m_max certifying the geometric decay of ||S_m|| while the
/// per-shell absolute sums stay O(1).
std::vector<ShellDecayRow> shell_decay_certificate(const StarGreen& star, int m_max);

void write_certificate_csv(const std::string& path, const std::vector<ShellDecayRow>& rows);

}  // namespace msgreen
