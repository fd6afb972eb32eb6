#pragma once

// Observation containers and the small config structs consumed by the
// fitting pipeline.

#include <cstdint>
#include <variant>
#include <vector>

namespace floc {

enum class DesignKind { Common, Independent };

struct RawPoint {
    long subject = 0;
    double t = 0.0;
    double y = 0.0;
};

struct SubjectRecord {
    long id = 0;
    std::vector<double> t;  // ascending
    std::vector<double> y;
};

// Validated sample: subjects sorted by id, points sorted by t within each
// subject, every t in [0,1], every value finite, every subject non-empty.
class ObservationSet {
public:
    static ObservationSet from_records(std::vector<SubjectRecord> records);

    const std::vector<SubjectRecord>& subjects() const { return subjects_; }
    std::size_t n() const { return subjects_.size(); }
    std::size_t total_points() const { return total_; }
    DesignKind design_kind() const { return kind_; }

private:
    ObservationSet() = default;
    std::vector<SubjectRecord> subjects_;
    std::size_t total_ = 0;
    DesignKind kind_ = DesignKind::Independent;
};

ObservationSet validate(const std::vector<RawPoint>& raw);

// Tolerance used both to merge near-duplicate sampling points into one knot
// and to decide whether all subjects share a common grid.
inline constexpr double kDedupTol = 1e-10;

struct DesignSummary {
    std::size_t n = 0;
    double m_harmonic = 0.0;          // n / sum(1/m_i); equals m when all m_i match
    std::vector<double> unique_knots;  // deduplicated pooled sampling points
    double a = 0.0;                    // unique_knots.front()
    double b = 0.0;                    // unique_knots.back()
};

DesignSummary summarize(const ObservationSet& data, double dedup_tol = kDedupTol);

// --- loss selection ---

enum class LossKind { Squared, Huber, Lq, CheckSmoothed, Expectile, LogCosh };

enum class ScaleMode { Raw, PreliminaryMAD };

struct LossSpec {
    LossKind kind = LossKind::Squared;
    double huber_k = 0.70;
    double lq_q = 1.5;
    double tau = 0.5;
    double epsilon = 1e-4;  // CheckSmoothed rounding half-width
    double alpha = 0.5;     // expectile level
    ScaleMode scale = ScaleMode::Raw;

    static LossSpec squared() { return {}; }
    static LossSpec huber(double k = 0.70, ScaleMode s = ScaleMode::Raw) {
        LossSpec spec;
        spec.kind = LossKind::Huber;
        spec.huber_k = k;
        spec.scale = s;
        return spec;
    }
    static LossSpec lq(double q) {
        LossSpec spec;
        spec.kind = LossKind::Lq;
        spec.lq_q = q;
        return spec;
    }
    static LossSpec check_smoothed(double tau, double epsilon) {
        LossSpec spec;
        spec.kind = LossKind::CheckSmoothed;
        spec.tau = tau;
        spec.epsilon = epsilon;
        return spec;
    }
    static LossSpec expectile(double alpha) {
        LossSpec spec;
        spec.kind = LossKind::Expectile;
        spec.alpha = alpha;
        return spec;
    }
    static LossSpec log_cosh() {
        LossSpec spec;
        spec.kind = LossKind::LogCosh;
        return spec;
    }
};

// --- smoothing parameter policy ---

struct GcvGrid {
    double lambda_min = 1e-10;
    double lambda_max = 1e1;
    int count = 50;
};

struct FixedLambda {
    double value = 1.0;
};

using LambdaPolicy = std::variant<FixedLambda, GcvGrid>;

struct FitConfig {
    int r = 2;  // penalty order; spline order is 2r
    LambdaPolicy lambda = GcvGrid{};
    int max_iter = 500;
    double coef_tol = 1e-8;
};

}  // namespace floc
