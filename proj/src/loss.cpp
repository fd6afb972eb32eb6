#include "floc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "floc/errors.hpp"

namespace floc {

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

}  // namespace

LossEval make_loss(const LossSpec& spec) {
    LossEval out;
    out.kind = spec.kind;
    switch (spec.kind) {
        case LossKind::Squared:
            out.rho = [](double x) { return x * x; };
            out.psi = [](double x) { return 2.0 * x; };
            out.weight = [](double) { return 2.0; };
            break;

        case LossKind::Huber: {
            const double k = spec.huber_k;
            if (!(k > 0.0)) throw InvalidTuning("Huber k must be positive");
            out.rho = [k](double x) {
                const double ax = std::abs(x);
                return ax <= k ? 0.5 * x * x : k * (ax - 0.5 * k);
            };
            out.psi = [k](double x) {
                return std::abs(x) <= k ? x : (x > 0 ? k : -k);
            };
            out.weight = [k](double x) {
                const double ax = std::abs(x);
                return ax <= k ? 1.0 : k / ax;
            };
            break;
        }

        case LossKind::Lq: {
            const double q = spec.lq_q;
            if (!(q > 1.0 && q <= 2.0))
                throw InvalidTuning(
                    "Lq exponent must lie in (1,2]; for q=1 use CheckSmoothed with "
                    "tau=0.5");
            out.rho = [q](double x) { return std::pow(std::abs(x), q); };
            out.psi = [q](double x) {
                if (x == 0.0) return 0.0;
                return q * std::pow(std::abs(x), q - 1.0) * (x > 0 ? 1.0 : -1.0);
            };
            out.weight = [q](double x) {
                if (x == 0.0)
                    return q < 2.0 ? std::numeric_limits<double>::infinity() : 2.0;
                return q * std::pow(std::abs(x), q - 2.0);
            };
            break;
        }

        case LossKind::CheckSmoothed: {
            const double tau = spec.tau, eps = spec.epsilon;
            if (!(tau > 0.0 && tau < 1.0)) throw InvalidTuning("tau must lie in (0,1)");
            if (!(eps > 0.0)) throw InvalidTuning("epsilon must be positive");
            out.rho = [tau, eps](double x) {
                if (x >= eps) return tau * x - 0.5 * eps * tau;
                if (x >= 0.0) return 0.5 * tau * x * x / eps;
                if (x > -eps) return 0.5 * (1.0 - tau) * x * x / eps;
                return -(1.0 - tau) * x - 0.5 * eps * (1.0 - tau);
            };
            out.psi = [tau, eps](double x) {
                if (x >= eps) return tau;
                if (x >= 0.0) return tau * x / eps;
                if (x > -eps) return (1.0 - tau) * x / eps;
                return -(1.0 - tau);
            };
            out.weight = [tau, eps](double x) {
                if (x == 0.0) return 0.5 / eps;  // mean of the one-sided limits
                if (x >= eps) return tau / x;
                if (x > 0.0) return tau / eps;
                if (x > -eps) return (1.0 - tau) / eps;
                return -(1.0 - tau) / x;
            };
            break;
        }

        case LossKind::Expectile: {
            const double alpha = spec.alpha;
            if (!(alpha > 0.0 && alpha < 1.0))
                throw InvalidTuning("alpha must lie in (0,1)");
            out.rho = [alpha](double x) {
                return 0.5 * (x < 0 ? 1.0 - alpha : alpha) * x * x;
            };
            out.psi = [alpha](double x) {
                return (x < 0 ? 1.0 - alpha : alpha) * x;
            };
            out.weight = [alpha](double x) {
                if (x == 0.0) return 0.5;  // mean of the one-sided limits
                return x < 0 ? 1.0 - alpha : alpha;
            };
            break;
        }

        case LossKind::LogCosh:
            out.rho = [](double x) {
                // log(cosh x) = |x| + log1p(exp(-2|x|)) - log 2, overflow-safe
                const double ax = std::abs(x);
                return ax + std::log1p(std::exp(-2.0 * ax)) - M_LN2;
            };
            out.psi = [](double x) { return std::tanh(x); };
            out.weight = [](double x) { return x == 0.0 ? 1.0 : std::tanh(x) / x; };
            break;
    }
    return out;
}

LossEval scale_loss(const LossEval& base, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw InvalidTuning("scale must be positive and finite");
    LossEval out;
    out.kind = base.kind;
    out.rho = [rho = base.rho, sigma](double x) {
        return sigma * sigma * rho(x / sigma);
    };
    out.psi = [psi = base.psi, sigma](double x) { return sigma * psi(x / sigma); };
    out.weight = [w = base.weight, sigma](double x) { return w(x / sigma); };
    return out;
}

double preliminary_scale(const std::vector<double>& residuals) {
    if (residuals.empty()) throw EmptyInput();
    std::vector<double> work = residuals;
    const double med = median_inplace(work);
    for (double& v : work) v = std::abs(v - med);
    const double mad = median_inplace(work);
    if (mad < 1e-12) return 1.0;
    return 1.4826 * mad;
}

}  // namespace floc
