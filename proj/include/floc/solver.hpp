#pragma once

// Penalized iteratively reweighted least squares over the B-spline
// coefficients, with step-halving so the objective never increases. Each
// iteration solves the banded system (B'DWB + 2*lambda*P) c = B'DW y where D
// carries the 1/(n m_i) subject weights and W the loss weights psi(r)/r.

#include <vector>

#include <Eigen/Dense>

#include "floc/basis.hpp"
#include "floc/loss.hpp"
#include "floc/model.hpp"

namespace floc {

struct FitResult {
    SplineFunction function;
    double lambda_used = 0.0;
    double objective = 0.0;
    Eigen::VectorXd residuals;      // per observation, canonical row order
    Eigen::VectorXd hat_diag;       // leverage of the final weighted system
    int iterations = 0;
    bool converged = false;
    Eigen::VectorXd weight_trace;   // clamped IRLS weights of the final system
    std::vector<double> objective_trace;  // objective after init and each iteration
};

// Requires lambda > 0 and total points >= r. Initialization is the
// squared-loss ridge solution at the same lambda unless warm_start is given.
// When lambda is so large that the penalty numerically swallows the data
// block, the solve falls back to the exact weighted polynomial regression of
// degree r-1 (the smooth limit); lambdas whose penalty scale overflows
// doubles throw SingularSystem.
FitResult fit(const ObservationSet& data, ModelPtr model, const LossEval& loss,
              double lambda, const FitConfig& config);

// Same fit on a prebuilt design (lambda_select reuses one design across the
// whole grid).
FitResult fit_prepared(const DesignMatrix& dm, ModelPtr model, const LossEval& loss,
                       double lambda, const FitConfig& config,
                       const Eigen::VectorXd* warm_start = nullptr);

// mu_hat^(s) on a grid; s must be < 2r.
std::vector<double> fit_derivative(const FitResult& result, int s,
                                   const std::vector<double>& grid);

// Value of the penalized objective (1/n) sum_i (1/m_i) sum_j rho(r_ij)
// + lambda c'Pc, and its gradient; the gradient backs the stationarity tests.
double objective_value(const DesignMatrix& dm, const SplineModel& model,
                       const LossEval& loss, double lambda,
                       const Eigen::VectorXd& coef);
Eigen::VectorXd objective_gradient(const DesignMatrix& dm, const SplineModel& model,
                                   const LossEval& loss, double lambda,
                                   const Eigen::VectorXd& coef);

// Loss weight with the solver's clamping rules: continuity value within
// 1e-10 of zero, hard cap at 1e12.
double clamped_weight(const LossEval& loss, double residual);

}  // namespace floc
