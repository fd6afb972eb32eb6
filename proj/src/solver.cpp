#include "floc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "floc/banded.hpp"
#include "floc/errors.hpp"

namespace floc {

namespace {

constexpr double kTinyResidual = 1e-10;
constexpr double kWeightCap = 1e12;

Eigen::VectorXd compute_residuals(const DesignMatrix& dm, const Eigen::VectorXd& c) {
    const int K = dm.order;
    Eigen::VectorXd r(dm.rows());
    for (Eigen::Index row = 0; row < dm.rows(); ++row)
        r[row] = dm.y[row] - dm.vals.col(row).dot(c.segment(dm.first[row], K));
    return r;
}

double max_abs_entry(const BandedMatrix& a) {
    double best = 0.0;
    for (int j = 0; j < a.dim(); ++j) {
        const int top = std::min(a.dim(), j + a.bandwidth() + 1);
        for (int i = j; i < top; ++i) best = std::max(best, std::abs(a.get(i, j)));
    }
    return best;
}

// weighted normal-equation pieces: M = B'DWB + 2 lambda P, rhs = B'DW y;
// returns the largest diagonal of the data block (its entrywise scale,
// since that block is positive semidefinite)
double assemble(const DesignMatrix& dm, const Eigen::VectorXd& w,
                const BandedMatrix& penalty, double lambda, double p_max,
                BandedMatrix& M, Eigen::VectorXd& rhs) {
    if (!std::isfinite(2.0 * lambda * p_max))
        throw SingularSystem("penalty scale overflows at this lambda");
    const int K = dm.order;
    M.set_zero();
    rhs.setZero();
    for (Eigen::Index row = 0; row < dm.rows(); ++row) {
        const double s = dm.d[row] * w[row];
        if (s == 0.0) continue;
        const int f = dm.first[row];
        const auto col = dm.vals.col(row);
        const double sy = s * dm.y[row];
        for (int a = 0; a < K; ++a) {
            rhs[f + a] += sy * col[a];
            for (int b = 0; b <= a; ++b) M.at(f + a, f + b) += s * col[a] * col[b];
        }
    }
    double e_max = 0.0;
    for (int a = 0; a < M.dim(); ++a) e_max = std::max(e_max, M.get(a, a));
    M.add_scaled(penalty, 2.0 * lambda);
    return e_max;
}

BandedLdlt factor_with_jitter(const BandedMatrix& M, const BandedMatrix& penalty) {
    try {
        return BandedLdlt(M);
    } catch (const SingularSystem&) {
        BandedMatrix jittered = M;
        jittered.add_diagonal(1e-10 * penalty.trace() / penalty.dim());
        return BandedLdlt(jittered);
    }
}

// (B'DWB + 2 lambda P) c computed as two separate products; unlike the
// assembled band this loses no data digits when the penalty dominates
Eigen::VectorXd apply_normal(const DesignMatrix& dm, const Eigen::VectorXd& w,
                             const BandedMatrix& penalty, double lambda,
                             const Eigen::VectorXd& c) {
    const int K = dm.order;
    Eigen::VectorXd out = 2.0 * lambda * penalty.multiply(c);
    for (Eigen::Index row = 0; row < dm.rows(); ++row) {
        const double s = dm.d[row] * w[row];
        if (s == 0.0) continue;
        const int f = dm.first[row];
        const auto col = dm.vals.col(row);
        out.segment(f, K) += (s * col.dot(c.segment(f, K))) * col;
    }
    return out;
}

// exact coefficients of the monomials 1, t, ..., t^{r-1} on the B-spline
// basis via Marsden's identity: the coefficient of t^p on basis a is the
// p-th elementary symmetric mean of the order-1 knots interior to that
// basis' support
Eigen::MatrixXd null_space_basis(const SplineModel& sm) {
    const int K = sm.order;
    const int r = sm.r;
    Eigen::MatrixXd N(sm.dim, r);
    std::vector<double> e(static_cast<std::size_t>(r));
    for (int a = 0; a < sm.dim; ++a) {
        std::fill(e.begin(), e.end(), 0.0);
        e[0] = 1.0;
        for (int j = 1; j < K; ++j) {
            const double v = sm.knots[static_cast<std::size_t>(a) + j];
            for (int p = std::min(r - 1, j); p >= 1; --p) e[p] += v * e[p - 1];
        }
        double choose = 1.0;  // C(K-1, p), updated incrementally
        for (int p = 0; p < r; ++p) {
            if (p > 0) choose *= static_cast<double>(K - p) / p;
            N(a, p) = e[p] / choose;
        }
    }
    return N;
}

struct FlatFit {
    Eigen::VectorXd coef;      // spline coefficients of the polynomial fit
    Eigen::MatrixXd n_basis;   // dim x r null-space basis
    Eigen::MatrixXd gram_inv;  // r x r inverse of the weighted normal matrix
};

// weighted least squares constrained to the penalty's null space: the
// lambda -> infinity limit, solved exactly in r unknowns
FlatFit flat_fit(const DesignMatrix& dm, const Eigen::VectorXd& w,
                 const SplineModel& sm) {
    Eigen::MatrixXd N = null_space_basis(sm);
    const int K = dm.order;
    const int r = static_cast<int>(N.cols());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(r, r);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(r);
    for (Eigen::Index row = 0; row < dm.rows(); ++row) {
        const double s = dm.d[row] * w[row];
        if (s == 0.0) continue;
        const Eigen::VectorXd A =
            N.middleRows(dm.first[row], K).transpose() * dm.vals.col(row);
        G.noalias() += s * A * A.transpose();
        b.noalias() += s * A * dm.y[row];
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    FlatFit out;
    out.coef = N * ldlt.solve(b);
    out.gram_inv = ldlt.solve(Eigen::MatrixXd::Identity(r, r));
    if (!out.coef.allFinite() || !out.gram_inv.allFinite())
        throw SingularSystem("flat-limit normal equations are singular");
    out.n_basis = std::move(N);
    return out;
}

double quad_data_term(const DesignMatrix& dm, const Eigen::VectorXd& w,
                      const Eigen::VectorXd& c) {
    const int K = dm.order;
    double acc = 0.0;
    for (Eigen::Index row = 0; row < dm.rows(); ++row) {
        const double e =
            dm.y[row] - dm.vals.col(row).dot(c.segment(dm.first[row], K));
        acc += dm.d[row] * w[row] * e * e;
    }
    return acc;
}

struct SolvedSystem {
    Eigen::VectorXd coef;
    std::optional<BandedLdlt> ldlt;  // absent when only the flat limit solves
    std::optional<FlatFit> flat;     // set when the flat limit is the answer
};

// Factor and solve M c = rhs. Extreme penalty dominance brings two
// hazards. From ~1e8 entrywise dominance the assembled band stores the
// data block with reduced precision; iterative refinement against the
// unassembled operator wins those digits back. From ~1e12 the rounding of
// the penalty entries themselves biases the null-space components of any
// banded solve, so the exact flat-limit (polynomial) fit is computed too
// and returned whenever the banded solution no longer beats it on the
// data term -- in exact arithmetic the true solution always does outside
// the flat regime. Past ~1e16 the data block vanishes from the band
// outright, the factorization fails, and only the flat limit remains.
SolvedSystem solve_system(const DesignMatrix& dm, const Eigen::VectorXd& w,
                          const SplineModel& sm, double p_max, double lambda,
                          BandedMatrix& M, Eigen::VectorXd& rhs) {
    const BandedMatrix& penalty = sm.penalty;
    const double e_max = assemble(dm, w, penalty, lambda, p_max, M, rhs);
    const bool near_limit = e_max > 0.0 && 2.0 * lambda * p_max > 1e12 * e_max;
    SolvedSystem out;
    try {
        out.ldlt.emplace(factor_with_jitter(M, penalty));
    } catch (const SingularSystem&) {
        if (!near_limit) throw;
    }
    if (out.ldlt) {
        Eigen::VectorXd c = out.ldlt->solve(rhs);
        if (2.0 * lambda * p_max > 1e8 * e_max) {
            double prev = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 40; ++k) {
                const Eigen::VectorXd resid =
                    rhs - apply_normal(dm, w, penalty, lambda, c);
                const Eigen::VectorXd delta = out.ldlt->solve(resid);
                const double dn = delta.norm();
                if (!std::isfinite(dn) || dn >= prev) break;
                c += delta;
                prev = dn;
                if (dn <= 1e-15 * std::max(1.0, c.norm())) break;
            }
        }
        out.coef = std::move(c);
    }
    if (near_limit) {
        std::optional<FlatFit> flat;
        try {
            flat.emplace(flat_fit(dm, w, sm));
        } catch (const SingularSystem&) {
            if (!out.ldlt) throw;
        }
        if (flat && (!out.ldlt ||
                     quad_data_term(dm, w, out.coef) >=
                         quad_data_term(dm, w, flat->coef) * (1.0 - 1e-9))) {
            out.coef = flat->coef;
            out.flat.emplace(std::move(*flat));
        }
    }
    return out;
}

}  // namespace

double clamped_weight(const LossEval& loss, double residual) {
    double w = std::abs(residual) < kTinyResidual ? loss.weight(0.0)
                                                  : loss.weight(residual);
    if (!(w <= kWeightCap)) w = kWeightCap;  // also catches +inf
    return w;
}

double objective_value(const DesignMatrix& dm, const SplineModel& model,
                       const LossEval& loss, double lambda,
                       const Eigen::VectorXd& coef) {
    const Eigen::VectorXd r = compute_residuals(dm, coef);
    double data_term = 0.0;
    for (Eigen::Index row = 0; row < dm.rows(); ++row)
        data_term += dm.d[row] * loss.rho(r[row]);
    return data_term + lambda * model.penalty.quad_form(coef);
}

Eigen::VectorXd objective_gradient(const DesignMatrix& dm, const SplineModel& model,
                                   const LossEval& loss, double lambda,
                                   const Eigen::VectorXd& coef) {
    const int K = dm.order;
    const Eigen::VectorXd r = compute_residuals(dm, coef);
    Eigen::VectorXd g = 2.0 * lambda * model.penalty.multiply(coef);
    for (Eigen::Index row = 0; row < dm.rows(); ++row) {
        const double s = dm.d[row] * loss.psi(r[row]);
        g.segment(dm.first[row], K) -= s * dm.vals.col(row);
    }
    return g;
}

FitResult fit_prepared(const DesignMatrix& dm, ModelPtr model, const LossEval& loss,
                       double lambda, const FitConfig& config,
                       const Eigen::VectorXd* warm_start) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidTuning("lambda must be positive and finite");
    if (dm.rows() < model->r)
        throw TooFewPoints("need at least r observations to fit");

    const SplineModel& sm = *model;
    const int dim = sm.dim;
    const int K = sm.order;
    const double p_max = max_abs_entry(sm.penalty);
    BandedMatrix M(dim, K - 1);
    Eigen::VectorXd rhs(dim);
    Eigen::VectorXd c(dim);

    if (warm_start) {
        c = *warm_start;
    } else {
        // squared-loss ridge at the same lambda
        Eigen::VectorXd w2 = Eigen::VectorXd::Constant(dm.rows(), 2.0);
        c = solve_system(dm, w2, sm, p_max, lambda, M, rhs).coef;
    }

    FitResult out;
    out.lambda_used = lambda;
    double obj = objective_value(dm, sm, loss, lambda, c);
    out.objective_trace.push_back(obj);

    Eigen::VectorXd w(dm.rows());
    for (int it = 1; it <= config.max_iter; ++it) {
        const Eigen::VectorXd r = compute_residuals(dm, c);
        for (Eigen::Index row = 0; row < dm.rows(); ++row)
            w[row] = clamped_weight(loss, r[row]);
        const Eigen::VectorXd target =
            solve_system(dm, w, sm, p_max, lambda, M, rhs).coef;

        // the IRLS step is a descent direction for every convex loss here,
        // but not always a full step; halve until the objective stops rising
        const Eigen::VectorXd dir = target - c;
        Eigen::VectorXd cand = target;
        double cand_obj = objective_value(dm, sm, loss, lambda, cand);
        double step = 1.0;
        const double slack = 1e-13 * (1.0 + std::abs(obj));
        int halvings = 0;
        while (cand_obj > obj + slack && halvings < 60) {
            step *= 0.5;
            cand = c + step * dir;
            cand_obj = objective_value(dm, sm, loss, lambda, cand);
            ++halvings;
        }
        if (cand_obj > obj + slack) {
            // no decrease at the floating noise floor: stay put
            cand = c;
            cand_obj = obj;
        }

        const double denom = std::max(cand.norm(), 1e-12);
        const double rel = (cand - c).norm() / denom;
        c = cand;
        obj = cand_obj;
        out.objective_trace.push_back(obj);
        out.iterations = it;
        if (rel < config.coef_tol) {
            out.converged = true;
            break;
        }
    }

    // final weighted system: residuals, weights, leverage
    out.residuals = compute_residuals(dm, c);
    out.weight_trace.resize(dm.rows());
    for (Eigen::Index row = 0; row < dm.rows(); ++row)
        out.weight_trace[row] = clamped_weight(loss, out.residuals[row]);
    const SolvedSystem fin =
        solve_system(dm, out.weight_trace, sm, p_max, lambda, M, rhs);
    out.hat_diag.resize(dm.rows());
    if (fin.flat) {
        // leverage of the r-dimensional polynomial fit; sums to exactly r
        const Eigen::MatrixXd& N = fin.flat->n_basis;
        for (Eigen::Index row = 0; row < dm.rows(); ++row) {
            const Eigen::VectorXd A =
                N.middleRows(dm.first[row], K).transpose() * dm.vals.col(row);
            out.hat_diag[row] = dm.d[row] * out.weight_trace[row] *
                                A.dot(fin.flat->gram_inv * A);
        }
    } else {
        const BandedMatrix zinv = fin.ldlt->inverse_band();
        for (Eigen::Index row = 0; row < dm.rows(); ++row) {
            const int f = dm.first[row];
            const auto col = dm.vals.col(row);
            double q = 0.0;
            for (int a = 0; a < K; ++a) {
                q += col[a] * col[a] * zinv.get(f + a, f + a);
                for (int b = 0; b < a; ++b)
                    q += 2.0 * col[a] * col[b] * zinv.get(f + a, f + b);
            }
            out.hat_diag[row] = dm.d[row] * out.weight_trace[row] * q;
        }
    }

    out.function = SplineFunction{std::move(model), std::move(c)};
    out.objective = objective_value(dm, sm, loss, lambda, out.function.coefficients);
    return out;
}

FitResult fit(const ObservationSet& data, ModelPtr model, const LossEval& loss,
              double lambda, const FitConfig& config) {
    const DesignMatrix dm = design_matrix(*model, data);
    return fit_prepared(dm, std::move(model), loss, lambda, config);
}

std::vector<double> fit_derivative(const FitResult& result, int s,
                                   const std::vector<double>& grid) {
    const int order = result.function.model->order;
    if (s < 0 || s >= order)
        throw OutOfDomain("derivative order " + std::to_string(s) +
                          " outside [0, " + std::to_string(order) + ")");
    std::vector<double> out;
    out.reserve(grid.size());
    for (double t : grid) out.push_back(evaluate(result.function, t, s));
    return out;
}

}  // namespace floc
