#pragma once

#include <memory>

#include "msgreen/green_tables.hpp"
#include "msgreen/quadrature.hpp"
#include "msgreen/shells.hpp"

namespace msgreen {

/// Evaluator of a whole-space Green function G(x, y), the source feeding the
/// H^k terms. Implementations: the analytic homogenized kernel (exact for
/// constant coefficients), a windowed large-torus table pair, and test hooks.
class GreenSource {
public:
    virtual ~GreenSource() = default;

    virtual int dim() const = 0;
    /// G(x, y)
    virtual double point(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const = 0;
    /// int_Q G(x, y + y') dy'
    virtual double cell_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const = 0;

    /// Translation-invariant sources expose G(x, y) = kernel(x - y); the H^k
    /// evaluation then collapses to kernel / single / double cell smoothing.
    virtual bool translation_invariant() const { return false; }
    virtual double kernel(const Eigen::VectorXd& /*z*/) const {
        throw std::logic_error("GreenSource: no translation-invariant kernel");
    }

    virtual bool has_singularity() const { return true; }
    /// Largest |x - y|_inf at which values are trustworthy (inf if unlimited).
    virtual double window_halfwidth() const {
        return std::numeric_limits<double>::infinity();
    }
    /// Provenance tag for compare_with_direct, empty when not applicable.
    virtual std::string field_tag() const { return {}; }
};

/// G = G* of a homogenized tensor; exact whole-space kernel when A is constant.
class StarGreenSource : public GreenSource {
public:
    explicit StarGreenSource(StarGreen star, QuadPolicy policy = {})
        : star_(std::move(star)), policy_(policy) {}
    int dim() const override { return star_.dim(); }
    double point(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override;
    double cell_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override;
    bool translation_invariant() const override { return true; }
    double kernel(const Eigen::VectorXd& z) const override;

private:
    StarGreen star_;
    QuadPolicy policy_;
};

/// Windowed source: two large-torus columns anchored at y, the point column
/// G(., y) and the cell-average column int_Q G(., y + y') dy'. Arguments must
/// stay inside the window.
class WindowedGreenSource : public GreenSource {
public:
    WindowedGreenSource(const CoefficientField& field, int window_periods, double spacing,
                        const Eigen::VectorXd& y, double tol = 1e-10);
    int dim() const override { return delta_column_.grid().dim; }
    double point(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override;
    double cell_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override;
    double window_halfwidth() const override { return 0.5 * delta_column_.grid().extent(); }
    std::string field_tag() const override { return delta_column_.field_tag; }

    const GreenTable& delta_column() const { return delta_column_; }
    double residual() const { return std::max(delta_column_.residual, mean_residual_); }

private:
    void check_window(const Eigen::VectorXd& x) const;
    GreenTable delta_column_;
    GridFunction mean_column_;
    double mean_residual_ = 0.0;
    Eigen::VectorXd anchor_;
};

struct HTermContext {
    std::shared_ptr<const GreenSource> source;
    QuadPolicy quadrature{12, 12, true};

    HTermContext() = default;
    explicit HTermContext(std::shared_ptr<const GreenSource> src, QuadPolicy quad = {12, 12, true})
        : source(std::move(src)), quadrature(quad) {}
};

/// H^k(x,y) = G(x,y-k) - int_Q G(x,y+y'-k)dy' - int_Q G(x+x',y-k)dx'
///          + int_Q int_Q G(x+x',y+y'-k)dy'dx'.
double h_term(const HTermContext& ctx, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
              const Eigen::VectorXi& k);

struct ShellSumResult {
    double sum = 0.0;      // T_m
    double abs_sum = 0.0;  // sum over the shell of |H^k|
    std::int64_t count = 0;
};

/// T_m = sum over Gamma_m(A*_s) of H^k(x, y).
ShellSumResult shell_sum(const HTermContext& ctx, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& y, int m, const HomogenizedTensor& tensor);

struct DecompositionReport {
    Eigen::VectorXd x, y;
    std::vector<ShellSumResult> shells;   // m = 0..m_max
    std::vector<double> partial_sums;     // S_M
    double beta_hat = 0.0;                // fitted decay of |T_m| ~ 2^{-m beta}
    double direct_value = std::numeric_limits<double>::quiet_NaN();
    double abs_error = std::numeric_limits<double>::quiet_NaN();
    double rel_error = std::numeric_limits<double>::quiet_NaN();
    std::string field_tag;

    double reconstructed() const { return partial_sums.back(); }
};

DecompositionReport decompose(const HTermContext& ctx, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y, int m_max,
                              const HomogenizedTensor& tensor);

struct MeanZeroResult {
    /// |int_Q S_mmax(x, .) dy|. For translation-invariant sources the integral
    /// is evaluated per term through the cell-convolution identity
    /// int_Q H^k(x, y) dy = (G * chi^3)(k)-type smoothing, which resolves the
    /// tiny genuine residual; the plain midpoint-grid number is kept alongside
    /// (its singular-cell noise floors out around 1e-3 at desk-scale grids).
    double residual = 0.0;
    double grid_residual = 0.0;
    double sup_s = 0.0;  // max |S_mmax| over the quadrature grid
};

MeanZeroResult verify_mean_zero(const HTermContext& ctx, const Eigen::VectorXd& x, int m_max,
                                const HomogenizedTensor& tensor, int grid_points_per_axis = 8);

struct CompareResult {
    double abs = 0.0;
    double rel = 0.0;
};

/// |S_mmax - G(x,y)| against a directly solved periodic table; the table must
/// match the report's provenance (field tag when known, grid/source always).
CompareResult compare_with_direct(const DecompositionReport& report, const GreenTable& direct);

void write_report_json(const std::string& path, const DecompositionReport& report);

}  // namespace msgreen
