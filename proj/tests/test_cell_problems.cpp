#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "msgreen/cell_problems.hpp"

using namespace msgreen;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double layered_a(double t) { return 2.0 + std::sin(kTwoPi * t); }

CoefficientField layered_field(int d) {
    return CoefficientField::layered(d, 2.0, 1.0, 1, 0.0, 1.0 / 3.0);
}

/// 1d quadrature oracle: K = harmonic mean of a, w1(x) = int_0^x (K/a - 1)
/// minus its own mean, trapezoid on n_pts points.
struct LayeredOracle {
    double k = 0.0;
    std::vector<double> w;  // w at j / n_pts
    int n_pts;

    explicit LayeredOracle(int n = 100000) : n_pts(n) {
        double inv = 0.0;
        for (int j = 0; j < n; ++j) inv += 1.0 / layered_a((j + 0.5) / n);
        k = n / inv;
        w.resize(n + 1, 0.0);
        for (int j = 0; j < n; ++j)
            w[j + 1] = w[j] + (k / layered_a((j + 0.5) / n) - 1.0) / n;
        double mean = 0.0;
        for (int j = 0; j < n; ++j) mean += 0.5 * (w[j] + w[j + 1]) / n;
        for (auto& v : w) v -= mean;
    }
    double value(double x) const {
        double u = (x - std::floor(x)) * n_pts;
        int j = static_cast<int>(u);
        double f = u - j;
        return (1.0 - f) * w[j] + f * w[std::min(j + 1, n_pts)];
    }
};

}  // namespace

TEST_CASE("constant coefficients have vanishing correctors and A* = A") {
    Eigen::MatrixXd a(3, 3);
    a << 2.0, 0.3, 0.0, 0.3, 1.5, 0.1, 0.0, 0.1, 1.0;
    auto field = CoefficientField::constant(a, 0.5);
    TorusGrid g = TorusGrid::unit(3, 16);
    CorrectorSet set = correctors(field, g);
    for (int i = 0; i < 3; ++i) {
        CHECK(set.w[i].max_abs() <= 1e-10);
        CHECK(set.w_dagger[i].max_abs() <= 1e-10);
    }
    HomogenizedTensor t = homogenize(set);
    CHECK((t.a_star - a).cwiseAbs().maxCoeff() <= 1e-10);

    Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.3);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 0.7);
    CHECK(q_tensor(set, x, y).cwiseAbs().maxCoeff() <= 1e-18);
    CHECK(q_tensor_oracle(set, x, y).cwiseAbs().maxCoeff() <= 1e-18);
}

TEST_CASE("layered correctors match the 1d quadrature oracle") {
    TorusGrid g = TorusGrid::unit(3, 64);
    CorrectorSet set = correctors(layered_field(3), g, 1e-11);
    LayeredOracle oracle;

    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(set.w[i].mean()) <= 1e-12 * std::max(set.w[i].max_abs(), 1e-30));

    // w2 = w3 = 0, and symmetric A solves the adjoint problems identically
    CHECK(set.w[1].max_abs() <= 1e-10);
    CHECK(set.w[2].max_abs() <= 1e-10);
    CHECK(set.w_dagger[0].values == set.w[0].values);

    // w1 depends on x1 only
    int c0[3] = {5, 0, 0}, c1[3] = {5, 9, 14};
    CHECK(std::abs(set.w[0].at(c0) - set.w[0].at(c1)) <= 1e-10);

    double worst = 0.0;
    for (int j = 0; j < 64; ++j) {
        int c[3] = {j, 3, 7};
        worst = std::max(worst, std::abs(set.w[0].at(c) - oracle.value(j / 64.0)));
    }
    CHECK(worst <= 1e-3);

    // gradient identity d1 w1 = A*_11 / a - 1 at the staggered midpoints
    HomogenizedTensor t = homogenize(set);
    double h = g.spacing();
    for (int j = 0; j < 64; j += 7) {
        int ca[3] = {j, 2, 2}, cb[3] = {j + 1, 2, 2};
        double grad = (set.w[0].at(cb) - set.w[0].at(ca)) / h;
        double ref = t.a_star(0, 0) / layered_a((j + 0.5) * h) - 1.0;
        CHECK(grad == doctest::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("layered homogenized tensor hits the harmonic/arithmetic means") {
    TorusGrid g = TorusGrid::unit(3, 64);
    HomogenizedTensor t = homogenize(correctors(layered_field(3), g, 1e-11));
    CHECK(std::abs(t.a_star(0, 0) - std::sqrt(3.0)) <= 1e-6);
    CHECK(std::abs(t.a_star(1, 1) - 2.0) <= 1e-8);
    CHECK(std::abs(t.a_star(2, 2) - 2.0) <= 1e-8);
    CHECK(std::abs(t.a_star(0, 1)) <= 1e-10);

    CHECK((t.eigenvectors * t.eigenvalues.asDiagonal() * t.eigenvectors.transpose() -
           t.a_star_sym)
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    const double mu = 1.0 / 3.0;
    CHECK(t.eigenvalues.minCoeff() >= mu * 0.95);
    CHECK(t.eigenvalues.maxCoeff() <= 1.05 / mu);
    Eigen::MatrixXd rebuilt = t.eigenvectors *
                              t.lambda.array().pow(-2.0).matrix().asDiagonal() *
                              t.eigenvectors.transpose();
    CHECK((rebuilt - t.a_star_sym).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("even trigonometric scalar field gives a symmetric tensor") {
    TrigTerm term;
    term.amplitude = Eigen::MatrixXd::Identity(2, 2);
    term.frequency = {1, 1};
    term.use_sin = {false, false};
    auto field = CoefficientField::trigonometric(2, 2.0 * Eigen::MatrixXd::Identity(2, 2),
                                                 {term}, 1.0 / 3.0);
    TorusGrid g = TorusGrid::unit(2, 32);
    HomogenizedTensor t = homogenize(correctors(field, g));
    CHECK((t.a_star - t.a_star.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("tensor construction rejects a non-positive-definite symmetric part") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(HomogenizedTensor::from_matrix(bad), std::runtime_error);
}

TEST_CASE("q tensor equals the quadruple-integral oracle") {
    TorusGrid g = TorusGrid::unit(3, 64);
    CorrectorSet set = correctors(layered_field(3), g, 1e-11);
    LayeredOracle oracle;

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(0, 1);
    double worst = 0.0;
    for (int pair = 0; pair < 20; ++pair) {
        Eigen::VectorXd x(3), y(3);
        for (int a = 0; a < 3; ++a) {
            x[a] = dist(rng);
            y[a] = dist(rng);
        }
        Eigen::MatrixXd q = q_tensor(set, x, y);
        Eigen::MatrixXd qo = q_tensor_oracle(set, x, y);
        worst = std::max(worst, (q - qo).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-4);

    // the 1d oracle confirms the product structure in the first entry
    Eigen::VectorXd x(3), y(3);
    x << 0.21, 0.55, 0.83;
    y << 0.68, 0.12, 0.44;
    double ref = oracle.value(0.21) * oracle.value(0.68);
    CHECK(q_tensor(set, x, y)(0, 0) == doctest::Approx(ref).epsilon(1e-2));

    // rank-1 structure at x = y for symmetric coefficients
    Eigen::VectorXd xx = Eigen::VectorXd::Constant(3, 0.37);
    Eigen::MatrixXd q = q_tensor(set, xx, xx);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q);
    if (svd.singularValues()(0) > 1e-12)
        CHECK(svd.singularValues()(1) <= 1e-10 * svd.singularValues()(0));
}

TEST_CASE("oracle agreement improves when the quadrature order doubles") {
    TorusGrid g = TorusGrid::unit(3, 32);
    CorrectorSet set = correctors(layered_field(3), g, 1e-11);
    Eigen::VectorXd x(3), y(3);
    x << 0.21, 0.55, 0.83;
    y << 0.68, 0.12, 0.44;
    Eigen::MatrixXd q = q_tensor(set, x, y);
    double err16 = (q - q_tensor_oracle(set, x, y, 16)).cwiseAbs().maxCoeff();
    double err32 = (q - q_tensor_oracle(set, x, y, 32)).cwiseAbs().maxCoeff();
    CHECK(err16 / std::max(err32, 1e-18) >= 2.0);
}
