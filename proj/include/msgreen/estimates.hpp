#pragma once

#include "msgreen/green_tables.hpp"

namespace msgreen {

enum class Quantity { value, grad_x, grad_y, mixed };

const char* quantity_name(Quantity q);
Quantity quantity_from_name(const std::string& name);
/// Power-law exponents the pointwise bounds assert: 2-d, 1-d, 1-d, -d.
double target_exponent(Quantity q, int dim);

/// One source point, one oscillation: the centre column plus, when
/// y-derivatives are requested, the 2d source-shifted columns G(., y +- h e_j).
struct GreenColumnFamily {
    int oscillation = 1;
    GreenTable center;
    std::vector<GreenTable> y_plus, y_minus;

    bool has_y_shifts() const { return !y_plus.empty(); }
};

GreenColumnFamily green_family(const CoefficientField& field, int oscillation,
                               const TorusGrid& grid, const Eigen::VectorXd& y, double tol,
                               bool with_y_shifts);

struct DecaySample {
    int oscillation = 1;
    double r = 0.0;
    double magnitude = 0.0;  // max over the direction stencil at radius r
};

struct DecayFit {
    Quantity quantity = Quantity::value;
    double r_min = 0.0, r_max = 0.0;
    std::vector<int> n_list;
    std::vector<DecaySample> samples;
    double p_hat = 0.0, c_hat = 0.0;        // pooled log-log least squares
    std::vector<double> p_per_n, c_per_n;
    double fit_residual = 0.0;              // rms residual of the pooled log fit
};

/// Magnitudes on log-spaced radii in [r_min, r_max], max over a fixed
/// direction stencil (26 directions in 3d, 8 in 2d), snapped to grid nodes.
/// Derivatives are centred differences; y-derivatives use the shifted-source
/// columns of the family.
DecayFit decay_fit(const std::vector<GreenColumnFamily>& families, Quantity quantity,
                   double r_min, double r_max, int n_radii = 10);

struct UniformityReport {
    Quantity quantity = Quantity::value;
    double exponent = 0.0;  // held fixed at the target exponent
    std::vector<int> n_list;
    std::vector<double> c_n;  // fixed-exponent constants per n
    double spread = 0.0;      // max / min of c_n
};

UniformityReport uniformity_report(const CoefficientField& field, const TorusGrid& grid,
                                   const std::vector<int>& n_list, Quantity quantity,
                                   const Eigen::VectorXd& y, double tol, double r_min,
                                   double r_max, int n_radii = 10);

struct LogBoundFit {
    double c_max = 0.0;  // max over the window of |G| / log(2 + r)
    double c_lsq = 0.0;  // least-squares constant of |G| ~ C log(2 + r)
    double r_min = 0.0, r_max = 0.0;
};

/// d = 2 logarithmic envelope over r in [r_min, r_max], all nodes scanned.
LogBoundFit log_bound_check_2d(const GreenTable& table, double r_min, double r_max);

void write_fit_csv(const std::string& path, const std::vector<DecayFit>& fits);

}  // namespace msgreen
