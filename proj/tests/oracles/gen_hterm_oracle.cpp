// Brute-force midpoint-quadrature oracle for one H^k value with the analytic
// isotropic kernel G*(z) = 1/(4 pi |z|):
//
//   H^k(x,y) = G*(x-y+k) - int_Q G*(x-y-y'+k) dy' - int_Q G*(x+x'-y+k) dx'
//            + int_Q int_Q G*(x+x'-y-y'+k) dy' dx'
//
// evaluated with n^3 midpoints per cell integral (n^6 for the double one).
// Slow by construction; run by hand to regenerate the frozen test value.
//
//   usage: gen_hterm_oracle [n]   (default n = 40)

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "msgreen/parallel.hpp"

namespace {

double kernel(double zx, double zy, double zz) {
    return 1.0 / (4.0 * std::numbers::pi * std::sqrt(zx * zx + zy * zy + zz * zz));
}

}  // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 40;
    const double x[3] = {0.1, 0.0, 0.0};
    const double y[3] = {-0.2, 0.1, 0.0};
    const double k[3] = {3.0, 0.0, 0.0};
    const double z[3] = {x[0] - y[0] + k[0], x[1] - y[1] + k[1], x[2] - y[2] + k[2]};

    std::vector<double> mid(n);
    for (int i = 0; i < n; ++i) mid[i] = (i + 0.5) / n - 0.5;
    const double w3 = 1.0 / (static_cast<double>(n) * n * n);

    double point = kernel(z[0], z[1], z[2]);

    double single_y = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                single_y += kernel(z[0] - mid[a], z[1] - mid[b], z[2] - mid[c]);
    single_y *= w3;

    double single_x = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                single_x += kernel(z[0] + mid[a], z[1] + mid[b], z[2] + mid[c]);
    single_x *= w3;

    std::vector<double> slabs(n, 0.0);
    msgreen::parallel_for(n, [&](std::int64_t a) {
        double acc = 0.0;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    for (int e = 0; e < n; ++e)
                        for (int f = 0; f < n; ++f)
                            acc += kernel(z[0] + mid[a] - mid[d], z[1] + mid[b] - mid[e],
                                          z[2] + mid[c] - mid[f]);
        slabs[a] = acc;
    });
    double dbl = 0.0;
    for (double s : slabs) dbl += s;
    dbl *= w3 * w3;

    double h = point - single_y - single_x + dbl;
    std::printf("n = %d midpoints per axis\n", n);
    std::printf("point    = %.17e\n", point);
    std::printf("single_y = %.17e\n", single_y);
    std::printf("single_x = %.17e\n", single_x);
    std::printf("double   = %.17e\n", dbl);
    std::printf("H^k      = %.17e\n", h);
    return 0;
}
