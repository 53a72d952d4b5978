#include "msgreen/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace msgreen {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

SpectralPreconditioner::SpectralPreconditioner(const TorusGrid& grid,
                                               const Eigen::MatrixXd& coefficient)
    : grid_(grid) {
    const int d = grid.dim;
    const int n = grid.points_per_axis;
    const double h = grid.spacing();
    Eigen::MatrixXd c = 0.5 * (coefficient + coefficient.transpose());

    std::int64_t real_count = grid.size();
    complex_count_ = real_count / n * (n / 2 + 1);

    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        real_buf_ = fftw_alloc_real(real_count);
        complex_buf_ = fftw_alloc_complex(complex_count_);
        std::vector<int> dims(d, n);
        plan_forward_ = fftw_plan_dft_r2c(d, dims.data(), real_buf_,
                                          static_cast<fftw_complex*>(complex_buf_),
                                          FFTW_ESTIMATE);
        plan_backward_ = fftw_plan_dft_c2r(d, dims.data(),
                                           static_cast<fftw_complex*>(complex_buf_), real_buf_,
                                           FFTW_ESTIMATE);
    }
    if (!plan_forward_ || !plan_backward_)
        throw std::runtime_error("SpectralPreconditioner: FFT planning failed");

    // symbol of D^T M(C) D per reduced wavenumber
    inv_symbol_.assign(complex_count_, 0.0);
    const int n_half = n / 2 + 1;
    std::vector<std::complex<double>> dsym(n), msym(n);
    for (int k = 0; k < n; ++k) {
        double theta = 2.0 * std::numbers::pi * k / n;
        dsym[k] = (std::polar(1.0, theta) - 1.0) / h;
        msym[k] = 0.5 * (1.0 + std::polar(1.0, -theta));
    }
    std::vector<int> kv(d, 0);
    for (std::int64_t idx = 0; idx < complex_count_; ++idx) {
        double s = 0.0;
        std::complex<double> g[8];
        for (int a = 0; a < d; ++a) {
            s += c(a, a) * std::norm(dsym[kv[a]]);
            g[a] = dsym[kv[a]] * msym[kv[a]];
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                if (i != j) s += c(i, j) * (std::conj(g[i]) * g[j]).real();
        inv_symbol_[idx] = (idx == 0) ? 0.0 : 1.0 / s;
        // odometer over (k_0 .. k_{d-2}, reduced k_{d-1})
        for (int a = d - 1; a >= 0; --a) {
            int limit = (a == d - 1) ? n_half : n;
            if (++kv[a] < limit) break;
            kv[a] = 0;
        }
    }
}

SpectralPreconditioner::~SpectralPreconditioner() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plan_forward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_forward_));
    if (plan_backward_) fftw_destroy_plan(static_cast<fftw_plan>(plan_backward_));
    if (real_buf_) fftw_free(real_buf_);
    if (complex_buf_) fftw_free(complex_buf_);
}

void SpectralPreconditioner::apply(const std::vector<double>& r, std::vector<double>& z) {
    const std::int64_t total = grid_.size();
    if (static_cast<std::int64_t>(r.size()) != total)
        throw std::invalid_argument("SpectralPreconditioner::apply: size mismatch");
    for (std::int64_t i = 0; i < total; ++i) real_buf_[i] = r[i];
    fftw_execute(static_cast<fftw_plan>(plan_forward_));
    auto* c = static_cast<fftw_complex*>(complex_buf_);
    for (std::int64_t i = 0; i < complex_count_; ++i) {
        c[i][0] *= inv_symbol_[i];
        c[i][1] *= inv_symbol_[i];
    }
    fftw_execute(static_cast<fftw_plan>(plan_backward_));
    double scale = 1.0 / static_cast<double>(total);
    z.resize(r.size());
    for (std::int64_t i = 0; i < total; ++i) z[i] = real_buf_[i] * scale;
}

}  // namespace msgreen
