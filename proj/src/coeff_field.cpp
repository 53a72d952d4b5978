#include "msgreen/coeff_field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace msgreen {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce_unit(double x) { return x - std::floor(x); }

Eigen::VectorXd reduce_unit(const Eigen::VectorXd& x) {
    Eigen::VectorXd r(x.size());
    for (int a = 0; a < x.size(); ++a) r[a] = reduce_unit(x[a]);
    return r;
}

void symmetric_eig_range(const Eigen::MatrixXd& a, double& lo, double& hi) {
    Eigen::MatrixXd s = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    lo = es.eigenvalues().minCoeff();
    hi = es.eigenvalues().maxCoeff();
}

int nth_prime(int i) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    if (i < 0 || i >= 10) throw std::invalid_argument("halton: dimension too large");
    return primes[i];
}

}  // namespace

Eigen::VectorXd halton_point(int index, int dim) {
    Eigen::VectorXd p(dim);
    for (int a = 0; a < dim; ++a) {
        int base = nth_prime(a);
        double f = 1.0, r = 0.0;
        int i = index + 1;
        while (i > 0) {
            f /= base;
            r += f * (i % base);
            i /= base;
        }
        p[a] = r;
    }
    return p;
}

CoefficientField CoefficientField::constant(const Eigen::MatrixXd& matrix, double mu) {
    if (matrix.rows() != matrix.cols() || matrix.rows() < 2)
        throw std::invalid_argument("constant field: matrix must be d x d, d >= 2");
    CoefficientField f;
    f.kind_ = Kind::constant;
    f.dim_ = static_cast<int>(matrix.rows());
    f.mu_ = mu;
    f.constant_ = matrix;
    f.symmetric_ = matrix.isApprox(matrix.transpose(), 1e-14);
    f.construction_scan();
    return f;
}

CoefficientField CoefficientField::layered(int dim, double offset, double amplitude,
                                           int frequency, double phase, double mu) {
    if (dim < 2) throw std::invalid_argument("layered field: dim must be >= 2");
    CoefficientField f;
    f.kind_ = Kind::layered;
    f.dim_ = dim;
    f.mu_ = mu;
    f.layered_offset_ = offset;
    f.layered_amplitude_ = amplitude;
    f.layered_frequency_ = frequency;
    f.layered_phase_ = phase;
    f.symmetric_ = true;
    f.construction_scan();
    return f;
}

CoefficientField CoefficientField::layered_samples(int dim, std::vector<double> samples,
                                                   double mu) {
    if (dim < 2) throw std::invalid_argument("layered field: dim must be >= 2");
    if (samples.size() < 2) throw std::invalid_argument("layered field: need >= 2 samples");
    CoefficientField f;
    f.kind_ = Kind::layered;
    f.dim_ = dim;
    f.mu_ = mu;
    f.layered_samples_ = std::move(samples);
    f.symmetric_ = true;
    f.construction_scan();
    return f;
}

CoefficientField CoefficientField::trigonometric(int dim, const Eigen::MatrixXd& base,
                                                 std::vector<TrigTerm> terms, double mu) {
    if (dim < 2) throw std::invalid_argument("trigonometric field: dim must be >= 2");
    if (base.rows() != dim || base.cols() != dim)
        throw std::invalid_argument("trigonometric field: base must be d x d");
    CoefficientField f;
    f.kind_ = Kind::trigonometric;
    f.dim_ = dim;
    f.mu_ = mu;
    f.trig_base_ = base;
    f.trig_terms_ = std::move(terms);
    f.symmetric_ = base.isApprox(base.transpose(), 1e-14);
    for (auto& t : f.trig_terms_) {
        if (t.amplitude.rows() != dim || t.amplitude.cols() != dim)
            throw std::invalid_argument("trigonometric field: term amplitude must be d x d");
        if (static_cast<int>(t.frequency.size()) != dim)
            throw std::invalid_argument("trigonometric field: term frequency must have d entries");
        if (t.use_sin.empty()) t.use_sin.assign(dim, false);
        if (static_cast<int>(t.use_sin.size()) != dim)
            throw std::invalid_argument("trigonometric field: term trig flags must have d entries");
        f.symmetric_ = f.symmetric_ && t.amplitude.isApprox(t.amplitude.transpose(), 1e-14);
    }
    f.construction_scan();
    return f;
}

CoefficientField CoefficientField::tabulated(int dim, int n_table, std::vector<double> table,
                                             double mu) {
    if (dim < 2) throw std::invalid_argument("tabulated field: dim must be >= 2");
    std::int64_t nodes = 1;
    for (int a = 0; a < dim; ++a) nodes *= n_table;
    if (n_table < 2 || static_cast<std::int64_t>(table.size()) != nodes * dim * dim)
        throw std::invalid_argument("tabulated field: table size mismatch");
    CoefficientField f;
    f.kind_ = Kind::tabulated;
    f.dim_ = dim;
    f.mu_ = mu;
    f.table_n_ = n_table;
    f.symmetric_ = true;
    for (std::int64_t node = 0; node < nodes && f.symmetric_; ++node)
        for (int i = 0; i < dim && f.symmetric_; ++i)
            for (int j = i + 1; j < dim; ++j)
                if (std::abs(table[node * dim * dim + i * dim + j] -
                             table[node * dim * dim + j * dim + i]) > 1e-14) {
                    f.symmetric_ = false;
                    break;
                }
    f.table_ = std::make_shared<const std::vector<double>>(std::move(table));
    f.construction_scan();
    return f;
}

CoefficientField CoefficientField::tabulated_from_file(const std::string& path, double mu) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("tabulated_from_file: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "GSCF", 4) != 0)
        throw std::runtime_error("tabulated_from_file: bad magic in " + path);
    std::uint32_t d = 0, n = 0;
    in.read(reinterpret_cast<char*>(&d), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    if (!in || d < 2 || n < 2) throw std::runtime_error("tabulated_from_file: bad header");
    std::int64_t count = d * d;
    for (std::uint32_t a = 0; a < d; ++a) count *= n;
    std::vector<double> table(count);
    in.read(reinterpret_cast<char*>(table.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw std::runtime_error("tabulated_from_file: truncated data in " + path);
    return tabulated(static_cast<int>(d), static_cast<int>(n), std::move(table), mu);
}

void CoefficientField::save_tabulated(const std::string& path) const {
    if (kind_ != Kind::tabulated)
        throw std::logic_error("save_tabulated: field is not tabulated");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_tabulated: cannot open " + path);
    const char magic[4] = {'G', 'S', 'C', 'F'};
    out.write(magic, 4);
    std::uint32_t d = static_cast<std::uint32_t>(dim_), n = static_cast<std::uint32_t>(table_n_);
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(table_->data()),
              static_cast<std::streamsize>(table_->size() * sizeof(double)));
}

Eigen::MatrixXd CoefficientField::sample_reduced(const Eigen::VectorXd& x) const {
    const int d = dim_;
    const int dc = d - extruded_axes_;  // axes carried by the stored parameters
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    for (int i = dc; i < d; ++i) a(i, i) = 1.0;

    switch (kind_) {
        case Kind::constant:
            a.topLeftCorner(dc, dc) = constant_;
            break;
        case Kind::layered: {
            double v;
            if (!layered_samples_.empty()) {
                double u = x[0] * static_cast<double>(layered_samples_.size());
                auto n = static_cast<std::int64_t>(layered_samples_.size());
                auto i0 = static_cast<std::int64_t>(std::floor(u)) % n;
                if (i0 < 0) i0 += n;
                double frac = u - std::floor(u);
                v = (1.0 - frac) * layered_samples_[i0] +
                    frac * layered_samples_[(i0 + 1) % n];
            } else {
                v = layered_offset_ +
                    layered_amplitude_ *
                        std::sin(kTwoPi * layered_frequency_ * x[0] + layered_phase_);
            }
            a.topLeftCorner(dc, dc) = v * Eigen::MatrixXd::Identity(dc, dc);
            break;
        }
        case Kind::trigonometric: {
            Eigen::MatrixXd m = trig_base_;
            for (const auto& t : trig_terms_) {
                double factor = 1.0;
                for (int ax = 0; ax < dc; ++ax) {
                    if (t.frequency[ax] == 0) continue;
                    double arg = kTwoPi * t.frequency[ax] * x[ax];
                    factor *= t.use_sin[ax] ? std::sin(arg) : std::cos(arg);
                }
                m += factor * t.amplitude;
            }
            a.topLeftCorner(dc, dc) = m;
            break;
        }
        case Kind::tabulated: {
            // periodic multilinear interpolation of each entry
            const auto& tb = *table_;
            const int n = table_n_;
            int base[8];
            double frac[8];
            for (int ax = 0; ax < dc; ++ax) {
                double u = x[ax] * n;
                double fl = std::floor(u);
                int b = static_cast<int>(fl) % n;
                if (b < 0) b += n;
                base[ax] = b;
                frac[ax] = u - fl;
            }
            const int entries = dc * dc;
            int corners = 1 << dc;
            for (int mask = 0; mask < corners; ++mask) {
                double w = 1.0;
                std::int64_t node = 0;
                for (int ax = 0; ax < dc; ++ax) {
                    bool hi = mask & (1 << ax);
                    w *= hi ? frac[ax] : 1.0 - frac[ax];
                    int c = base[ax] + (hi ? 1 : 0);
                    if (c >= n) c -= n;
                    node = node * n + c;
                }
                if (w == 0.0) continue;
                const double* e = tb.data() + node * entries;
                for (int i = 0; i < dc; ++i)
                    for (int j = 0; j < dc; ++j) a(i, j) += w * e[i * dc + j];
            }
            break;
        }
    }
    return a;
}

Eigen::MatrixXd CoefficientField::sample(const Eigen::VectorXd& x, int oscillation) const {
    if (x.size() != dim_) throw std::invalid_argument("sample: point dimension mismatch");
    if (oscillation < 1) throw std::invalid_argument("sample: oscillation must be >= 1");
    if (oscillation == 1) return sample_reduced(reduce_unit(x));
    return sample_reduced(reduce_unit(Eigen::VectorXd(static_cast<double>(oscillation) * x)));
}

CoefficientField CoefficientField::transposed() const {
    CoefficientField f = *this;
    f.constant_.transposeInPlace();
    f.trig_base_.transposeInPlace();
    for (auto& t : f.trig_terms_) t.amplitude.transposeInPlace();
    if (table_) {
        auto t = std::make_shared<std::vector<double>>(*table_);
        const int d = dim_ - extruded_axes_;
        const std::int64_t entries = d * d;
        for (std::int64_t node = 0; node * entries < static_cast<std::int64_t>(t->size()); ++node)
            for (int i = 0; i < d; ++i)
                for (int j = i + 1; j < d; ++j)
                    std::swap((*t)[node * entries + i * d + j], (*t)[node * entries + j * d + i]);
        f.table_ = std::move(t);
    }
    return f;
}

CoefficientField CoefficientField::extruded() const {
    CoefficientField f = *this;
    f.dim_ += 1;
    f.extruded_axes_ += 1;
    if (f.mu_ > 1.0) f.mu_ = 1.0;  // the new axis has unit coefficient
    return f;
}

void CoefficientField::construction_scan() const {
    const int scan = 512;
    for (int i = 0; i < scan; ++i) {
        Eigen::VectorXd x = halton_point(i, dim_);
        double lo, hi;
        symmetric_eig_range(sample_reduced(x), lo, hi);
        if (lo <= 0.0) {
            std::ostringstream os;
            os << "coefficient field is not positive definite at x = [" << x.transpose()
               << "] (min symmetric eigenvalue " << lo << ")";
            throw std::invalid_argument(os.str());
        }
        (void)hi;
    }
}

FieldValidation CoefficientField::validate(double mu, int samples) const {
    if (samples < 1) throw std::invalid_argument("validate: samples must be >= 1");
    FieldValidation rep;
    rep.min_eigenvalue = std::numeric_limits<double>::infinity();
    rep.max_eigenvalue = -std::numeric_limits<double>::infinity();
    rep.periodicity_defect = 0.0;

    auto visit = [&](const Eigen::VectorXd& x, int shift_seed) {
        Eigen::MatrixXd a = sample(x);
        double lo, hi;
        symmetric_eig_range(a, lo, hi);
        rep.min_eigenvalue = std::min(rep.min_eigenvalue, lo);
        rep.max_eigenvalue = std::max(rep.max_eigenvalue, hi);
        Eigen::VectorXd z(dim_);
        for (int a2 = 0; a2 < dim_; ++a2) z[a2] = ((shift_seed >> a2) & 1) ? 2.0 : -1.0;
        double defect = (sample(x + z) - a).cwiseAbs().maxCoeff();
        rep.periodicity_defect = std::max(rep.periodicity_defect, defect);
    };

    for (int i = 0; i < samples; ++i) visit(halton_point(i, dim_), i);
    // cell corners plus the center
    for (int mask = 0; mask < (1 << dim_); ++mask) {
        Eigen::VectorXd x(dim_);
        for (int a = 0; a < dim_; ++a) x[a] = (mask & (1 << a)) ? 0.5 : 0.0;
        visit(x, mask);
    }

    rep.passed = rep.min_eigenvalue >= mu && rep.max_eigenvalue <= 1.0 / mu &&
                 rep.periodicity_defect <= 1e-12;
    return rep;
}

std::string CoefficientField::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind_) {
        case Kind::constant:
            os << "constant[";
            for (int i = 0; i < constant_.rows(); ++i)
                for (int j = 0; j < constant_.cols(); ++j) os << constant_(i, j) << ",";
            os << "]";
            break;
        case Kind::layered:
            if (!layered_samples_.empty())
                os << "layered_samples[" << layered_samples_.size() << "]";
            else
                os << "layered[" << layered_offset_ << "+" << layered_amplitude_ << " sin(2pi "
                   << layered_frequency_ << " x1+" << layered_phase_ << ")]";
            break;
        case Kind::trigonometric:
            os << "trig[" << trig_terms_.size() << " terms, tr(base)=" << trig_base_.trace()
               << "]";
            break;
        case Kind::tabulated:
            os << "tabulated[" << table_n_ << "]";
            break;
    }
    os << " d=" << dim_ << " mu=" << mu_;
    if (extruded_axes_ > 0) os << " extruded=" << extruded_axes_;
    return os.str();
}

}  // namespace msgreen
