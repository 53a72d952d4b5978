#include "msgreen/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace msgreen {

namespace {

GaussRule compute_gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    // Newton iteration from the Chebyshev initial guess
    for (int i = 0; i < order; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[order - 1 - i] = x;
        rule.weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

GaussRule composite_gauss_unit(int intervals, int per_interval) {
    const GaussRule& base = gauss_legendre(per_interval);
    GaussRule rule;
    double len = 1.0 / intervals;
    for (int i = 0; i < intervals; ++i) {
        double mid = (i + 0.5) * len;
        for (int k = 0; k < per_interval; ++k) {
            rule.nodes.push_back(mid + 0.5 * len * base.nodes[k]);
            rule.weights.push_back(0.5 * len * base.weights[k]);
        }
    }
    return rule;
}

namespace {

double box_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& lo,
                    const Eigen::VectorXd& hi) {
    double s = 0.0;
    for (int a = 0; a < p.size(); ++a) {
        double d = std::max({lo[a] - p[a], p[a] - hi[a], 0.0});
        s += d * d;
    }
    return std::sqrt(s);
}

double tensor_gauss(const std::function<double(const Eigen::VectorXd&)>& f,
                    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int order) {
    const int d = static_cast<int>(lo.size());
    const GaussRule& rule = gauss_legendre(order);
    Eigen::VectorXd x(d);
    double vol_jac = 1.0;
    for (int a = 0; a < d; ++a) vol_jac *= 0.5 * (hi[a] - lo[a]);
    std::int64_t count = 1;
    for (int a = 0; a < d; ++a) count *= order;
    std::vector<int> iv(d, 0);
    double acc = 0.0;
    for (std::int64_t i = 0; i < count; ++i) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            x[a] = 0.5 * (lo[a] + hi[a]) + 0.5 * (hi[a] - lo[a]) * rule.nodes[iv[a]];
            w *= rule.weights[iv[a]];
        }
        acc += w * f(x);
        for (int a = d - 1; a >= 0; --a) {
            if (++iv[a] < order) break;
            iv[a] = 0;
        }
    }
    return acc * vol_jac;
}

double integrate_recursive(const std::function<double(const Eigen::VectorXd&)>& f,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                           const Eigen::VectorXd* singular, const QuadPolicy& policy,
                           int depth, bool refined) {
    const int d = static_cast<int>(lo.size());
    const double diam = (hi - lo).norm();
    double dist = singular ? box_distance(*singular, lo, hi) : std::numeric_limits<double>::max();

    if (singular && depth > 0 && dist < diam) {
        // bisect every axis, recurse
        double acc = 0.0;
        Eigen::VectorXd clo(d), chi(d);
        for (int mask = 0; mask < (1 << d); ++mask) {
            for (int a = 0; a < d; ++a) {
                double mid = 0.5 * (lo[a] + hi[a]);
                clo[a] = (mask & (1 << a)) ? mid : lo[a];
                chi[a] = (mask & (1 << a)) ? hi[a] : mid;
            }
            acc += integrate_recursive(f, clo, chi, singular, policy, depth - 1, true);
        }
        return acc;
    }

    int order = refined ? std::min(policy.points_per_axis, policy.refined_order)
                        : policy.points_per_axis;
    if (policy.distance_scaled && singular) {
        double ratio = dist / std::max(diam, 1e-300);
        if (ratio >= 8.0)
            order = std::max(4, order / 4);
        else if (ratio >= 3.0)
            order = std::max(4, order / 2);
    }
    return tensor_gauss(f, lo, hi, order);
}

}  // namespace

double integrate_box(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                     const Eigen::VectorXd* singular, const QuadPolicy& policy) {
    return integrate_recursive(f, lo, hi, singular, policy, policy.refine_depth, false);
}

}  // namespace msgreen
