#include "floc/rkhs.hpp"

#include <cmath>
#include <string>

#include "floc/errors.hpp"

namespace floc {

namespace {

void check_spec(const KernelSpec& spec) {
    if (spec.r != 1)
        throw UnsupportedOrder("explicit eigensystem implemented for r=1 only (got r=" +
                               std::to_string(spec.r) + ")");
    if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda))
        throw InvalidTuning("kernel lambda must be positive and finite");
    if (spec.truncation < 1) throw InvalidTuning("truncation must be >= 1");
}

void check_unit(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0))
        throw OutOfDomain(std::string(name) + "=" + std::to_string(x) +
                          " outside [0,1]");
}

}  // namespace

double eigenvalue(int j) {
    if (j < 1) throw InvalidTuning("eigensystem index starts at 1");
    const double f = (j - 1) * M_PI;
    return f * f;
}

double eigenfunction(int j, double x) {
    if (j < 1) throw InvalidTuning("eigensystem index starts at 1");
    if (j == 1) return 1.0;
    return std::sqrt(2.0) * std::cos((j - 1) * M_PI * x);
}

double cosine_eval(const SobolevFunction& f, double x) {
    // coefficient j (0-based) rides cos(j pi x); Chebyshev recurrence keeps
    // this to a single std::cos call
    const Eigen::Index n = f.coefficients.size();
    if (n == 0) return 0.0;
    double acc = f.coefficients[0];
    if (n == 1) return acc;
    const double twoc = 2.0 * std::cos(M_PI * x);
    const double s2 = std::sqrt(2.0);
    double prev2 = 1.0;          // cos(0)
    double prev1 = 0.5 * twoc;   // cos(pi x)
    acc += f.coefficients[1] * s2 * prev1;
    for (Eigen::Index k = 2; k < n; ++k) {
        const double ck = twoc * prev1 - prev2;
        acc += f.coefficients[k] * s2 * ck;
        prev2 = prev1;
        prev1 = ck;
    }
    return acc;
}

double kernel_value(const KernelSpec& spec, double x, double y) {
    check_spec(spec);
    check_unit(x, "x");
    check_unit(y, "y");
    double acc = 1.0;  // j=1 term: phi_1^2 / (1+0)
    if (spec.truncation == 1) return acc;
    const double tx = 2.0 * std::cos(M_PI * x);
    const double ty = 2.0 * std::cos(M_PI * y);
    double cx2 = 1.0, cy2 = 1.0;            // cos(0)
    double cx1 = 0.5 * tx, cy1 = 0.5 * ty;  // cos(pi t)
    acc += 2.0 * cx1 * cy1 / (1.0 + spec.lambda * M_PI * M_PI);
    for (int k = 2; k <= spec.truncation - 1; ++k) {
        const double cx = tx * cx1 - cx2;
        const double cy = ty * cy1 - cy2;
        cx2 = cx1;
        cx1 = cx;
        cy2 = cy1;
        cy1 = cy;
        const double gamma = (k * M_PI) * (k * M_PI);
        acc += 2.0 * cx * cy / (1.0 + spec.lambda * gamma);
    }
    return acc;
}

std::vector<std::pair<double, double>> kernel_curve(const KernelSpec& spec, double y,
                                                    int grid_size) {
    if (grid_size < 2) throw InvalidTuning("kernel curve needs at least 2 points");
    std::vector<std::pair<double, double>> out;
    out.reserve(grid_size);
    for (int g = 0; g < grid_size; ++g) {
        const double x = static_cast<double>(g) / (grid_size - 1);
        out.emplace_back(x, kernel_value(spec, x, y));
    }
    return out;
}

double sobolev_norm(const SobolevFunction& f, const KernelSpec& spec) {
    check_spec(spec);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < f.coefficients.size(); ++j)
        acc += f.coefficients[j] * f.coefficients[j] *
               (1.0 + spec.lambda * eigenvalue(static_cast<int>(j) + 1));
    return std::sqrt(acc);
}

ReproducingCheck reproducing_check(const KernelSpec& spec, const SobolevFunction& f,
                                   double x) {
    check_spec(spec);
    check_unit(x, "x");
    if (f.coefficients.size() > spec.truncation)
        throw InvalidTuning("function must be band-limited to the truncation");
    ReproducingCheck out;
    out.direct = cosine_eval(f, x);
    // <R(x,.), f>_{r,lambda} = sum_j [phi_j(x)/(1+lambda gamma_j)] f_j (1+lambda gamma_j)
    double acc = 0.0;
    for (Eigen::Index j = 0; j < f.coefficients.size(); ++j) {
        const double w = 1.0 + spec.lambda * eigenvalue(static_cast<int>(j) + 1);
        const double section_coef = eigenfunction(static_cast<int>(j) + 1, x) / w;
        acc += section_coef * f.coefficients[j] * w;
    }
    out.via_kernel = acc;
    out.gap = std::abs(out.direct - out.via_kernel);
    return out;
}

double embedding_ratio(const KernelSpec& spec, const SobolevFunction& f,
                       int grid_size) {
    check_spec(spec);
    if (spec.lambda > 1.0)  // the sup-norm bound is stated for lambda <= 1
        throw InvalidTuning("embedding ratio requires lambda <= 1");
    const double norm = sobolev_norm(f, spec);
    if (norm == 0.0) throw ZeroFunction();
    double sup = 0.0;
    for (int g = 0; g < grid_size; ++g) {
        const double x = static_cast<double>(g) / (grid_size - 1);
        sup = std::max(sup, std::abs(cosine_eval(f, x)));
    }
    const double bound = std::pow(spec.lambda, -0.25 / spec.r) * norm;
    return sup / bound;
}

SobolevFunction kernel_section(const KernelSpec& spec, double x0) {
    check_spec(spec);
    check_unit(x0, "x0");
    SobolevFunction f;
    f.coefficients.resize(spec.truncation);
    for (int j = 1; j <= spec.truncation; ++j)
        f.coefficients[j - 1] =
            eigenfunction(j, x0) / (1.0 + spec.lambda * eigenvalue(j));
    return f;
}

}  // namespace floc
