#pragma once

// Reproducing-kernel diagnostics for the lambda-weighted Sobolev inner
// product <f,g> = <f,g>_2 + lambda <f^(r), g^(r)>_2 on [0,1]. The explicit
// eigensystem is the r=1 cosine family; anything else is refused rather than
// approximated.

#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace floc {

struct KernelSpec {
    int r = 1;
    double lambda = 1.0;    // > 0; the embedding bound additionally needs <= 1
    int truncation = 10000; // series length N
};

// Cosine-basis coefficients f_1..f_N: f(x) = f_1 + sum_j f_j sqrt(2) cos((j-1) pi x).
struct SobolevFunction {
    Eigen::VectorXd coefficients;
};

// gamma_1 = 0, gamma_j = ((j-1) pi)^2; 1-indexed.
double eigenvalue(int j);
// phi_1 = 1, phi_j(x) = sqrt(2) cos((j-1) pi x); 1-indexed.
double eigenfunction(int j, double x);

double cosine_eval(const SobolevFunction& f, double x);

// Truncated series sum_{j<=N} phi_j(x) phi_j(y) / (1 + lambda gamma_j).
double kernel_value(const KernelSpec& spec, double x, double y);

// (x, kernel_value(x, y)) pairs over an equispaced grid on [0,1].
std::vector<std::pair<double, double>> kernel_curve(const KernelSpec& spec, double y,
                                                    int grid_size);

// sqrt(sum f_j^2 (1 + lambda gamma_j)).
double sobolev_norm(const SobolevFunction& f, const KernelSpec& spec);

struct ReproducingCheck {
    double direct = 0.0;      // f(x)
    double via_kernel = 0.0;  // <kernel section at x, f> in coefficient space
    double gap = 0.0;
};

// Exercises f(x) = <R(x,.), f> for band-limited f (length <= truncation).
ReproducingCheck reproducing_check(const KernelSpec& spec, const SobolevFunction& f,
                                   double x);

// sup_grid |f| / (lambda^{-1/4r} ||f||); bounded across lambda by the
// Sobolev embedding constant.
double embedding_ratio(const KernelSpec& spec, const SobolevFunction& f,
                       int grid_size = 2000);

// Kernel section R(x0, .) truncated to N terms, as coefficients.
SobolevFunction kernel_section(const KernelSpec& spec, double x0);

}  // namespace floc
