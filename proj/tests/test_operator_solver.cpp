#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "msgreen/operator.hpp"
#include "msgreen/solver.hpp"

using namespace msgreen;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CoefficientField identity_field(int d) {
    return CoefficientField::constant(Eigen::MatrixXd::Identity(d, d), 1.0);
}

CoefficientField layered_field(int d) {
    return CoefficientField::layered(d, 2.0, 1.0, 1, 0.0, 1.0 / 3.0);
}

/// I + 0.3 * skew(x): smooth non-symmetric test coefficient
CoefficientField skew_field() {
    Eigen::MatrixXd base = Eigen::MatrixXd::Identity(3, 3);
    TrigTerm t1, t2;
    t1.amplitude.setZero(3, 3);
    t1.amplitude(0, 1) = 0.3;
    t1.amplitude(1, 0) = -0.3;
    t1.frequency = {0, 0, 1};
    t1.use_sin = {false, false, true};
    t2.amplitude.setZero(3, 3);
    t2.amplitude(0, 2) = 0.3;
    t2.amplitude(2, 0) = -0.3;
    t2.frequency = {0, 1, 0};
    t2.use_sin = {false, false, false};
    return CoefficientField::trigonometric(3, base, {t1, t2}, 0.5);
}

GridFunction random_zero_mean(const TorusGrid& g, unsigned seed) {
    GridFunction u(g);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (auto& v : u.values) v = dist(rng);
    u.project_mean();
    return u;
}

GridFunction sampled(const TorusGrid& g, const std::function<double(const Eigen::VectorXd&)>& f) {
    GridFunction u(g);
    std::vector<int> c(g.dim, 0);
    for (std::int64_t idx = 0; idx < g.size(); ++idx) {
        u[idx] = f(g.node(c.data()));
        for (int a = g.dim - 1; a >= 0; --a) {
            if (++c[a] < g.points_per_axis) break;
            c[a] = 0;
        }
    }
    return u;
}

}  // namespace

TEST_CASE("identity coefficient gives the standard Laplacian stencil") {
    TorusGrid g = TorusGrid::unit(3, 8);
    DiscreteOperator op = assemble(identity_field(3), 1, g);
    GridFunction e0(g);
    int origin[3] = {0, 0, 0};
    e0.at(origin) = 1.0;
    GridFunction le = op.apply(e0);
    double h2 = g.spacing() * g.spacing();
    CHECK(le.at(origin) == doctest::Approx(6.0 / h2));
    int nb[3] = {1, 0, 0};
    CHECK(le.at(nb) == doctest::Approx(-1.0 / h2));
    int far[3] = {2, 2, 0};
    CHECK(le.at(far) == 0.0);
}

TEST_CASE("operator annihilates constants and preserves zero mean") {
    TorusGrid g = TorusGrid::unit(3, 16);
    DiscreteOperator op = assemble(layered_field(3), 2, g);
    GridFunction ones(g);
    for (auto& v : ones.values) v = 1.0;
    CHECK(op.apply(ones).max_abs() <= 1e-12);

    GridFunction u = random_zero_mean(g, 3);
    CHECK(std::abs(op.apply(u).mean()) <= 1e-12 * op.apply(u).max_abs());
}

TEST_CASE("matvec consistency with the analytic operator at second order") {
    auto field = layered_field(2);
    auto u_exact = [](const Eigen::VectorXd& x) { return std::sin(kTwoPi * x[1]); };
    // with a(x1) = 2 + sin(2 pi n x1): -div(a grad u) = a (2 pi)^2 sin(2 pi x2)
    auto rhs_exact = [](const Eigen::VectorXd& x) {
        double a = 2.0 + std::sin(2.0 * kTwoPi * x[0]);
        return a * kTwoPi * kTwoPi * std::sin(kTwoPi * x[1]);
    };
    double errs[2];
    int idx = 0;
    for (int n_pts : {32, 64}) {
        TorusGrid g = TorusGrid::unit(2, n_pts);
        DiscreteOperator op = assemble(field, 2, g);
        GridFunction lu = op.apply(sampled(g, u_exact));
        GridFunction ref = sampled(g, rhs_exact);
        double err = 0.0;
        for (std::int64_t i = 0; i < g.size(); ++i)
            err = std::max(err, std::abs(lu[i] - ref[i]));
        errs[idx++] = err;
    }
    double ratio = errs[0] / errs[1];
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
}

TEST_CASE("resolution guard names the required points") {
    TorusGrid g = TorusGrid::unit(3, 16);
    CHECK_THROWS_WITH_AS(assemble(layered_field(3), 3, g), doctest::Contains("N >= 24"),
                         std::invalid_argument);
}

TEST_CASE("apply rejects mismatched grids") {
    DiscreteOperator op = assemble(identity_field(2), 1, TorusGrid::unit(2, 16));
    GridFunction u(TorusGrid::unit(2, 32));
    CHECK_THROWS_AS(op.apply(u), std::invalid_argument);
}

TEST_CASE("discrete delta values and exact zero mean") {
    TorusGrid g = TorusGrid::unit(3, 8);
    std::vector<int> y = {3, 1, 7};
    GridFunction delta = discrete_delta(g, y);
    CHECK(delta.at(y.data()) == doctest::Approx(511.0));
    int other[3] = {0, 0, 0};
    CHECK(delta.at(other) == doctest::Approx(-1.0));
    double sum = 0.0;
    for (double v : delta.values) sum += v;
    CHECK(sum == 0.0);
    // integral against h^d also vanishes
    CHECK(sum * std::pow(g.spacing(), 3) == 0.0);
}

TEST_CASE("solve reproduces the discrete eigenfunction of the Laplacian") {
    TorusGrid g = TorusGrid::unit(3, 16);
    DiscreteOperator op = assemble(identity_field(3), 1, g);
    GridFunction rhs = sampled(g, [](const Eigen::VectorXd& x) { return std::cos(kTwoPi * x[0]); });
    SolveResult res = solve(op, rhs, {.tol = 1e-12});
    double h = g.spacing();
    double lambda = 2.0 * (1.0 - std::cos(kTwoPi * h)) / (h * h);
    double err = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i)
        err = std::max(err, std::abs(res.u[i] - rhs[i] / lambda));
    CHECK(err <= 1e-10);
    CHECK(std::abs(res.u.mean()) <= 1e-12 * res.u.max_abs());
}

TEST_CASE("zero right-hand side returns zero immediately") {
    TorusGrid g = TorusGrid::unit(2, 16);
    DiscreteOperator op = assemble(layered_field(2), 1, g);
    SolveResult res = solve(op, GridFunction(g));
    CHECK(res.u.max_abs() == 0.0);
    CHECK(res.iterations == 0);
}

TEST_CASE("self-adjoint solve duality <u_f, g> = <u_g, f>") {
    TorusGrid g = TorusGrid::unit(2, 32);
    DiscreteOperator op = assemble(layered_field(2), 1, g);
    GridFunction f = random_zero_mean(g, 5);
    GridFunction gg = random_zero_mean(g, 6);
    double tol = 1e-11;
    SolveResult uf = solve(op, f, {.tol = tol});
    SolveResult ug = solve(op, gg, {.tol = tol});
    double lhs = uf.u.dot(gg), rhs = ug.u.dot(f);
    CHECK(std::abs(lhs - rhs) <= 10 * tol * (std::abs(lhs) + 1.0));
}

TEST_CASE("discrete self-adjointness for symmetric coefficients") {
    TorusGrid g = TorusGrid::unit(3, 16);
    DiscreteOperator op = assemble(layered_field(3), 1, g);
    for (unsigned seed = 0; seed < 5; ++seed) {
        GridFunction u = random_zero_mean(g, 100 + seed);
        GridFunction v = random_zero_mean(g, 200 + seed);
        double a = op.apply(u).dot(v), b = op.apply(v).dot(u);
        CHECK(std::abs(a - b) <= 1e-10 * u.norm2() * v.norm2());
    }
}

TEST_CASE("transpose pairing <L_A u, v> = <u, L_At v> for a non-symmetric field") {
    auto field = skew_field();
    TorusGrid g = TorusGrid::unit(3, 16);
    DiscreteOperator op = assemble(field, 1, g);
    DiscreteOperator op_t = assemble(field.transposed(), 1, g);
    CHECK(!op.symmetric);
    for (unsigned seed = 0; seed < 3; ++seed) {
        GridFunction u = random_zero_mean(g, 300 + seed);
        GridFunction v = random_zero_mean(g, 400 + seed);
        double a = op.apply(u).dot(v), b = op_t.apply(v).dot(u);
        CHECK(std::abs(a - b) <= 1e-10 * u.norm2() * v.norm2());
    }
}

TEST_CASE("coercivity against the staggered gradient") {
    TorusGrid g = TorusGrid::unit(3, 16);
    const double mu = 1.0 / 3.0;
    DiscreteOperator op = assemble(layered_field(3), 1, g);
    for (unsigned seed = 0; seed < 5; ++seed) {
        GridFunction u = random_zero_mean(g, 500 + seed);
        double energy = op.energy(u, u);
        double grad2 = DiscreteOperator::grad_norm2(g, u);
        CHECK(energy >= 0.5 * mu * grad2);
    }
}

TEST_CASE("second-order convergence on a manufactured solution") {
    auto field = layered_field(2);
    auto u_exact = [](const Eigen::VectorXd& x) {
        return std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
    };
    auto rhs_exact = [](const Eigen::VectorXd& x) {
        double a = 2.0 + std::sin(kTwoPi * x[0]);
        double ap = kTwoPi * std::cos(kTwoPi * x[0]);
        double ux = kTwoPi * std::cos(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
        double lap = -2.0 * kTwoPi * kTwoPi * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]);
        return -(ap * ux + a * lap);
    };
    double errs[2];
    int idx = 0;
    for (int n_pts : {32, 64}) {
        TorusGrid g = TorusGrid::unit(2, n_pts);
        DiscreteOperator op = assemble(field, 1, g);
        SolveResult res = solve(op, sampled(g, rhs_exact), {.tol = 1e-12});
        GridFunction uref = sampled(g, u_exact);
        uref.project_mean();
        double err = 0.0;
        for (std::int64_t i = 0; i < g.size(); ++i)
            err = std::max(err, std::abs(res.u[i] - uref[i]));
        errs[idx++] = err;
    }
    double ratio = errs[0] / errs[1];
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
}

TEST_CASE("solve is deterministic") {
    TorusGrid g = TorusGrid::unit(2, 32);
    DiscreteOperator op = assemble(layered_field(2), 2, g);
    GridFunction rhs = random_zero_mean(g, 9);
    SolveResult a = solve(op, rhs);
    SolveResult b = solve(op, rhs);
    CHECK(a.u.values == b.u.values);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("nonsymmetric solve meets the residual target") {
    auto field = skew_field();
    TorusGrid g = TorusGrid::unit(3, 16);
    DiscreteOperator op = assemble(field, 1, g);
    GridFunction rhs = random_zero_mean(g, 21);
    SolveResult res = solve(op, rhs, {.tol = 1e-10});
    GridFunction resv = op.apply(res.u);
    double num = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        double r = rhs[i] - rhs.mean() - resv[i];
        num += r * r;
    }
    CHECK(std::sqrt(num) <= 1.5e-10 * rhs.norm2());
}

TEST_CASE("iteration cap failure carries the residual history") {
    TorusGrid g = TorusGrid::unit(2, 32);
    DiscreteOperator op = assemble(layered_field(2), 1, g);
    GridFunction rhs = random_zero_mean(g, 33);
    try {
        solve(op, rhs, {.tol = 1e-14, .max_iterations = 1});
        FAIL("expected SolverFailure");
    } catch (const SolverFailure& e) {
        CHECK(e.residual_history.size() >= 2);
    }
}
