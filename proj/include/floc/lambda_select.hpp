#pragma once

// Smoothing selection: weighted GCV scores over a log-spaced lambda grid,
// sweeping smooth to rough (descending lambda) with warm-started fits.

#include <vector>

#include "floc/solver.hpp"

namespace floc {

struct GcvTrace {
    std::vector<double> lambdas;     // strictly increasing
    std::vector<double> gcv_values;  // +inf marks degenerate or failed fits
    std::vector<char> fits_converged;
    int chosen_index = -1;
};

struct SelectResult {
    FitResult best;
    GcvTrace trace;
};

// GCV(lambda) = [sum_i m_i^{-1} sum_j W(r_ij) r_ij^2] /
//               (1 - n^{-1} sum_i m_i^{-1} sum_j h_ij)^2,
// using the final clamped IRLS weights; +inf when the denominator vanishes
// (leverage exhausts the sample).
double gcv_value(const FitResult& result, const ObservationSet& data);

// Fits every grid point and returns the GCV minimizer; ties and all-infinite
// traces resolve toward the largest (smoothest) lambda. Grid points whose
// factorization fails are recorded as +inf; AllFitsFailed only when none
// survives. Non-converged fits still compete, flagged in the trace.
SelectResult select(const ObservationSet& data, ModelPtr model, const LossEval& loss,
                    const GcvGrid& grid, const FitConfig& config);

std::vector<double> log_spaced(double lo, double hi, int count);

// Applies LossSpec.scale: Raw (or Squared, which is scale-free) just builds
// the loss; PreliminaryMAD runs a squared-loss pilot under the same lambda
// policy and rescales the loss by the robust residual scale.
LossEval resolve_loss(const LossSpec& spec, const ObservationSet& data,
                      ModelPtr model, const FitConfig& config);

}  // namespace floc
