#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace msgreen {

/// One product term of a trigonometric coefficient:
/// amplitude * prod_{axis with freq != 0} trig(2*pi*freq*x_axis).
struct TrigTerm {
    Eigen::MatrixXd amplitude;       // d x d
    std::vector<int> frequency;      // integer frequency per axis
    std::vector<bool> use_sin;       // per axis: sin instead of cos
};

struct FieldValidation {
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double periodicity_defect = 0.0;
    bool passed = false;
};

/// Periodic d x d coefficient matrix A(x), samplable anywhere, with declared
/// ellipticity constant mu: mu|xi|^2 <= xi.A(x).xi <= |xi|^2/mu.
/// Closed-form kinds are evaluated analytically after exact argument
/// reduction x -> x - floor(x); the tabulated kind interpolates multilinearly.
class CoefficientField {
public:
    enum class Kind { constant, layered, trigonometric, tabulated };

    static CoefficientField constant(const Eigen::MatrixXd& matrix, double mu);
    /// a(x1) = offset + amplitude*sin(2*pi*frequency*x1 + phase), A = a*I.
    static CoefficientField layered(int dim, double offset, double amplitude, int frequency,
                                    double phase, double mu);
    /// a(x1) from periodic linear interpolation of uniform samples, A = a*I.
    static CoefficientField layered_samples(int dim, std::vector<double> samples, double mu);
    static CoefficientField trigonometric(int dim, const Eigen::MatrixXd& base,
                                          std::vector<TrigTerm> terms, double mu);
    /// table: n_table^dim nodes, row-major over nodes, then d*d row-major entries.
    static CoefficientField tabulated(int dim, int n_table, std::vector<double> table, double mu);
    /// Load a tabulated field from the binary grid dump
    /// {magic "GSCF", u32 dim, u32 n_table, doubles}.
    static CoefficientField tabulated_from_file(const std::string& path, double mu);

    int dim() const { return dim_; }
    Kind kind() const { return kind_; }
    double mu() const { return mu_; }
    bool symmetric() const { return symmetric_; }

    /// A(oscillation * x). Total function, periodic in x with period 1/oscillation.
    Eigen::MatrixXd sample(const Eigen::VectorXd& x, int oscillation = 1) const;

    /// Field with A(x) replaced by A(x)^T.
    CoefficientField transposed() const;
    /// (d+1)-dimensional field: A on the first d axes, 1 on the last.
    CoefficientField extruded() const;

    /// Ellipticity/periodicity report over a Halton set of `samples` points
    /// plus cell corners. Pass iff min eig >= mu, max eig <= 1/mu and the
    /// worst integer-shift defect is <= 1e-12.
    FieldValidation validate(double mu, int samples = 10000) const;

    /// Short identification string (kind + parameter digest), used as
    /// provenance metadata on derived artifacts.
    std::string describe() const;

    void save_tabulated(const std::string& path) const;

private:
    CoefficientField() = default;
    Eigen::MatrixXd sample_reduced(const Eigen::VectorXd& x) const;  // x in [0,1)^d
    void construction_scan() const;

    Kind kind_ = Kind::constant;
    int dim_ = 0;
    double mu_ = 0.0;
    bool symmetric_ = true;
    int extruded_axes_ = 0;  // trailing axes with identity coefficient

    Eigen::MatrixXd constant_;
    double layered_offset_ = 0.0, layered_amplitude_ = 0.0, layered_phase_ = 0.0;
    int layered_frequency_ = 0;
    std::vector<double> layered_samples_;
    Eigen::MatrixXd trig_base_;
    std::vector<TrigTerm> trig_terms_;
    int table_n_ = 0;
    std::shared_ptr<const std::vector<double>> table_;
};

/// Deterministic Halton point in [0,1)^d (bases: first d primes), index >= 0.
Eigen::VectorXd halton_point(int index, int dim);

}  // namespace msgreen
