#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "msgreen/grid.hpp"

namespace msgreen {

/// Exact inverse (on zero-mean functions) of the constant-coefficient
/// discretization D^T M(C) D, applied by Fourier diagonalization. C is
/// symmetrized; the zero mode is projected out. Instances own their FFT
/// plans and buffers, so distinct instances may be used concurrently.
class SpectralPreconditioner {
public:
    SpectralPreconditioner(const TorusGrid& grid, const Eigen::MatrixXd& coefficient);
    ~SpectralPreconditioner();
    SpectralPreconditioner(const SpectralPreconditioner&) = delete;
    SpectralPreconditioner& operator=(const SpectralPreconditioner&) = delete;

    void apply(const std::vector<double>& r, std::vector<double>& z);
    const TorusGrid& grid() const { return grid_; }

private:
    TorusGrid grid_;
    std::vector<double> inv_symbol_;
    std::int64_t complex_count_ = 0;
    double* real_buf_ = nullptr;
    void* complex_buf_ = nullptr;  // fftw_complex*
    void* plan_forward_ = nullptr;
    void* plan_backward_ = nullptr;
};

}  // namespace msgreen
