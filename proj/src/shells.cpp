#include "msgreen/shells.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace msgreen {

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& q_form) {
    if (q_form.rows() != q_form.cols())
        throw std::invalid_argument("shells: quadratic form must be square");
    Eigen::MatrixXd sym = 0.5 * (q_form + q_form.transpose());
    if (!q_form.isApprox(sym, 1e-12))
        throw std::invalid_argument("shells: quadratic form must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("shells: quadratic form must be positive definite");
    return sym.inverse();
}

double form_value(const Eigen::VectorXi& k, const Eigen::MatrixXd& q_inv) {
    Eigen::VectorXd kd = k.cast<double>();
    return kd.dot(q_inv * kd);
}

}  // namespace

int shell_index(const Eigen::VectorXi& k, const Eigen::MatrixXd& q_form) {
    Eigen::MatrixXd q_inv = checked_inverse(q_form);
    double q = form_value(k, q_inv);
    int m = 0;
    double bound = 4.0;  // 4^{m+1}
    while (q >= bound) {
        ++m;
        bound *= 4.0;
    }
    return m;
}

void for_each_shell_point(int m, const Eigen::MatrixXd& q_form, int dim,
                          const std::function<void(const Eigen::VectorXi&)>& fn,
                          std::int64_t point_cap) {
    if (m < 0) throw std::invalid_argument("for_each_shell_point: m must be >= 0");
    Eigen::MatrixXd q_inv = checked_inverse(q_form);
    const double lo = (m == 0) ? 0.0 : std::pow(4.0, m);
    const double hi = std::pow(4.0, m + 1);

    // outer ellipsoid {k.Q^-1.k < 4^{m+1}} fits in |k_a| <= 2^{m+1} sqrt(Q_aa)
    std::vector<int> half(dim);
    std::int64_t candidates = 1;
    for (int a = 0; a < dim; ++a) {
        half[a] = static_cast<int>(std::floor(std::pow(2.0, m + 1) * std::sqrt(q_form(a, a)))) + 1;
        candidates *= 2 * static_cast<std::int64_t>(half[a]) + 1;
    }
    if (candidates > point_cap) {
        std::ostringstream os;
        os << "for_each_shell_point: scan box for m=" << m << " has " << candidates
           << " candidates, above the cap " << point_cap;
        throw std::runtime_error(os.str());
    }

    Eigen::VectorXi k(dim);
    for (int a = 0; a < dim; ++a) k[a] = -half[a];
    while (true) {
        double q = form_value(k, q_inv);
        if (q >= lo && q < hi) fn(k);
        int a = dim - 1;
        while (a >= 0) {
            if (++k[a] <= half[a]) break;
            k[a] = -half[a];
            --a;
        }
        if (a < 0) break;
    }
}

ShellSet enumerate_shell(int m, const Eigen::MatrixXd& q_form, int dim,
                         std::int64_t point_cap) {
    ShellSet set;
    set.m = m;
    set.q_form = q_form;
    for_each_shell_point(m, q_form, dim,
                         [&](const Eigen::VectorXi& k) { set.points.push_back(k); }, point_cap);
    return set;
}

Eigen::MatrixXd shell_hessian_sum(int m, const StarGreen& star, double* abs_scale,
                                  bool orbit_grouped) {
    const int d = star.dim();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd abs_sum = Eigen::MatrixXd::Zero(d, d);

    if (!orbit_grouped) {
        for_each_shell_point(m, star.q, d, [&](const Eigen::VectorXi& k) {
            if (k.isZero()) return;
            Eigen::MatrixXd h = star.hess(k.cast<double>());
            sum += h;
            abs_sum += h.cwiseAbs();
        });
    } else {
        // accumulate each signed-permutation orbit before adding it in
        std::map<std::vector<int>, Eigen::MatrixXd> orbits;
        std::map<std::vector<int>, Eigen::MatrixXd> orbit_abs;
        for_each_shell_point(m, star.q, d, [&](const Eigen::VectorXi& k) {
            if (k.isZero()) return;
            std::vector<int> key(d);
            for (int a = 0; a < d; ++a) key[a] = std::abs(k[a]);
            std::sort(key.begin(), key.end());
            Eigen::MatrixXd h = star.hess(k.cast<double>());
            auto [it, fresh] = orbits.try_emplace(key, Eigen::MatrixXd::Zero(d, d));
            it->second += h;
            auto [ita, fresha] = orbit_abs.try_emplace(key, Eigen::MatrixXd::Zero(d, d));
            ita->second += h.cwiseAbs();
        });
        for (auto& [key, val] : orbits) sum += val;
        for (auto& [key, val] : orbit_abs) abs_sum += val;
    }
    if (abs_scale) *abs_scale = abs_sum.maxCoeff();
    return sum;
}

std::vector<ShellDecayRow> shell_decay_certificate(const StarGreen& star, int m_max) {
    if (m_max < 2) throw std::invalid_argument("shell_decay_certificate: m_max must be >= 2");
    std::vector<ShellDecayRow> rows;
    for (int m = 1; m <= m_max; ++m) {
        ShellDecayRow row;
        row.m = m;
        std::int64_t count = 0;
        for_each_shell_point(m, star.q, star.dim(), [&](const Eigen::VectorXi& k) {
            if (!k.isZero()) ++count;
        });
        row.count = count;
        row.sum = shell_hessian_sum(m, star, &row.abs_sum);
        row.norm = row.sum.cwiseAbs().maxCoeff();
        row.ratio = rows.empty() ? 0.0 : row.norm / rows.back().norm;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_certificate_csv(const std::string& path, const std::vector<ShellDecayRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_certificate_csv: cannot open " + path);
    if (rows.empty()) return;
    const int d = static_cast<int>(rows.front().sum.rows());
    out << "m,count";
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out << ",S_" << i << j;
    out << ",abs_sum,ratio\n";
    out.precision(17);
    for (const auto& row : rows) {
        out << row.m << "," << row.count;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out << "," << row.sum(i, j);
        out << "," << row.abs_sum << "," << row.ratio << "\n";
    }
}

}  // namespace msgreen
