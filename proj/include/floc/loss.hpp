#pragma once

// Convex loss catalogue: rho with derivative psi and the IRLS weight
// psi(x)/x, continuity-extended at x = 0.

#include <functional>
#include <vector>

#include "floc/model.hpp"

namespace floc {

struct LossEval {
    LossKind kind = LossKind::Squared;
    std::function<double(double)> rho;
    std::function<double(double)> psi;
    std::function<double(double)> weight;  // psi(x)/x; limit value at x=0
};

// Validates tuning parameters (throws InvalidTuning) and returns the triple.
//
// Conventions per kind, chosen so that weight = psi/x stays bounded near 0
// for every supported loss:
//   Squared          rho = x^2
//   Huber(k)         rho = x^2/2 inside, k|x| - k^2/2 outside
//   Lq(q), 1<q<=2    rho = |x|^q   (weight(0) = +inf when q < 2; the solver caps it)
//   CheckSmoothed    two quadratics tau x^2/(2 eps) / (1-tau) x^2/(2 eps) on
//                    |x| < eps, continued with the matching check-loss slopes
//                    tau / -(1-tau) outside, so rho is convex and C^1; the
//                    linear tails sit eps*tau/2 resp. eps*(1-tau)/2 below the
//                    exact check loss
//   Expectile(alpha) rho = |alpha - 1(x<0)| x^2 / 2
//   LogCosh          rho = log(cosh(x))
LossEval make_loss(const LossSpec& spec);

// sigma^2 rho(x/sigma): preserves convexity and the quadratic behaviour near
// 0 while making the tuning constants scale-free.
LossEval scale_loss(const LossEval& base, double sigma);

// Robust residual scale: 1.4826 x median absolute deviation about the
// median; falls back to 1.0 when the MAD degenerates.
double preliminary_scale(const std::vector<double>& residuals);

}  // namespace floc
