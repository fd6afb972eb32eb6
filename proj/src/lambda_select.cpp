#include "floc/lambda_select.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "floc/errors.hpp"

namespace floc {

std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi >= lo))
        throw ConfigError("lambda grid needs 0 < lo <= hi");
    if (count < 1) throw ConfigError("lambda grid needs at least one point");
    std::vector<double> out;
    out.reserve(count);
    if (count == 1) {
        out.push_back(lo);
        return out;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
        out.push_back(std::exp(llo + (lhi - llo) * i / (count - 1)));
    return out;
}

double gcv_value(const FitResult& result, const ObservationSet& data) {
    double num = 0.0;
    double lev = 0.0;
    Eigen::Index row = 0;
    for (const auto& s : data.subjects()) {
        const double inv_m = 1.0 / static_cast<double>(s.t.size());
        for (std::size_t j = 0; j < s.t.size(); ++j, ++row) {
            const double r = result.residuals[row];
            num += inv_m * result.weight_trace[row] * r * r;
            lev += inv_m * result.hat_diag[row];
        }
    }
    const double d = 1.0 - lev / static_cast<double>(data.n());
    if (d * d <= 1e-12) return std::numeric_limits<double>::infinity();
    return num / (d * d);
}

SelectResult select(const ObservationSet& data, ModelPtr model, const LossEval& loss,
                    const GcvGrid& grid, const FitConfig& config) {
    GcvTrace trace;
    trace.lambdas = log_spaced(grid.lambda_min, grid.lambda_max, grid.count);
    const int count = static_cast<int>(trace.lambdas.size());
    trace.gcv_values.assign(count, std::numeric_limits<double>::infinity());
    trace.fits_converged.assign(count, 0);

    std::optional<FitResult> best;
    int best_idx = -1;
    const DesignMatrix dm = design_matrix(*model, data);
    std::optional<Eigen::VectorXd> warm;
    for (int idx = count - 1; idx >= 0; --idx) {
        FitResult fr;
        try {
            fr = fit_prepared(dm, model, loss, trace.lambdas[idx], config,
                              warm ? &*warm : nullptr);
        } catch (const SingularSystem&) {
            continue;  // +inf entry already in place
        }
        warm = fr.function.coefficients;
        trace.gcv_values[idx] = gcv_value(fr, data);
        trace.fits_converged[idx] = fr.converged ? 1 : 0;
        // first success is the largest lambda, so ties resolve smooth
        if (!best || trace.gcv_values[idx] < trace.gcv_values[best_idx]) {
            best = std::move(fr);
            best_idx = idx;
        }
    }
    if (!best)
        throw AllFitsFailed("every lambda on the grid produced a singular system");
    trace.chosen_index = best_idx;
    return SelectResult{std::move(*best), std::move(trace)};
}

LossEval resolve_loss(const LossSpec& spec, const ObservationSet& data,
                      ModelPtr model, const FitConfig& config) {
    LossEval loss = make_loss(spec);
    if (spec.scale != ScaleMode::PreliminaryMAD || spec.kind == LossKind::Squared)
        return loss;

    const LossEval pilot_loss = make_loss(LossSpec::squared());
    FitResult pilot;
    if (const auto* fixed = std::get_if<FixedLambda>(&config.lambda))
        pilot = fit(data, model, pilot_loss, fixed->value, config);
    else
        pilot = select(data, model, pilot_loss, std::get<GcvGrid>(config.lambda),
                       config)
                    .best;
    const std::vector<double> res(pilot.residuals.data(),
                                  pilot.residuals.data() + pilot.residuals.size());
    return scale_loss(loss, preliminary_scale(res));
}

}  // namespace floc
