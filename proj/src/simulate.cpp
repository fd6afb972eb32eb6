#include "floc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "floc/errors.hpp"

namespace floc {

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t idx) {
    // splitmix64 at stream position idx: golden-ratio increments, then the
    // bit-mixing finalizer
    std::uint64_t z = master + (idx + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double mean_value(const SimDesign& design, double t) {
    switch (design.mean_kind) {
        case MeanKind::Sinusoidal:
            return std::sin(6.0 * M_PI * t) * (t + 1.0);
        case MeanKind::Bump:
            return 3.0 * std::exp(-(0.25 - t) * (0.25 - t) / 0.1);
        case MeanKind::Custom:
            if (!design.custom_mean)
                throw ConfigError("Custom mean requested without a callable");
            return design.custom_mean(t);
    }
    throw ConfigError("unknown mean kind");
}

double noise_draw(ErrorLaw law, std::mt19937_64& rng) {
    switch (law) {
        case ErrorLaw::Gaussian: {
            std::normal_distribution<double> n01(0.0, 1.0);
            return n01(rng);
        }
        case ErrorLaw::T3: {
            std::student_t_distribution<double> t3(3.0);
            return t3(rng);
        }
        case ErrorLaw::SkewT3: {
            // noncentral t3: N(0.5, 1) / sqrt(chi^2_3 / 3)
            std::normal_distribution<double> num(0.5, 1.0);
            std::chi_squared_distribution<double> chi3(3.0);
            return num(rng) / std::sqrt(chi3(rng) / 3.0);
        }
        case ErrorLaw::MixGauss: {
            std::bernoulli_distribution wide(0.15);
            std::normal_distribution<double> n01(0.0, 1.0);
            const double sd = wide(rng) ? 3.0 : 1.0;
            return sd * n01(rng);
        }
        case ErrorLaw::Slash: {
            std::normal_distribution<double> n01(0.0, 1.0);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const double z = n01(rng);
            double u = unif(rng);
            while (u == 0.0) u = unif(rng);
            return z / u;
        }
    }
    throw ConfigError("unknown error law");
}

namespace {

void check_design(const SimDesign& d) {
    if (d.n < 1) throw ConfigError("simulation needs n >= 1");
    if (d.m.empty()) throw ConfigError("simulation needs an m specification");
    if (d.m.size() != 1 && d.m.size() != static_cast<std::size_t>(d.n))
        throw ConfigError("m must be a single value or one per subject");
    for (int mi : d.m)
        if (mi < 1) throw ConfigError("every m_i must be >= 1");
    if (d.design == DesignKind::Common)
        for (int mi : d.m)
            if (mi != d.m.front())
                throw ConfigError("common design requires equal m_i");
    if (!(d.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (d.kl_terms < 1) throw ConfigError("kl_terms must be >= 1");
    if (d.eval_grid_size < 1) throw ConfigError("eval_grid_size must be >= 1");
}

double kl_curve(const SimDesign& d, const std::vector<double>& scores, double t) {
    double x = mean_value(d, t);
    const double s2 = std::sqrt(2.0);
    for (int k = 0; k < d.kl_terms; ++k) {
        const double freq = (k + 0.5) * M_PI;
        x += s2 * scores[k] * std::sin(freq * t) / freq;
    }
    return x;
}

}  // namespace

GeneratedData generate(const SimDesign& design) {
    check_design(design);
    std::mt19937_64 rng(design.seed);
    std::student_t_distribution<double> t5(5.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<double> common_t;
    if (design.design == DesignKind::Common) {
        const int m = design.m.front();
        common_t.resize(m);
        for (int j = 0; j < m; ++j)
            common_t[j] = static_cast<double>(j + 1) / (m + 1);
    }

    std::vector<double> noiseless;
    std::vector<SubjectRecord> records;
    records.reserve(design.n);
    std::vector<double> scores(design.kl_terms);
    for (int i = 0; i < design.n; ++i) {
        SubjectRecord rec;
        rec.id = i + 1;
        const int mi = design.m.size() == 1 ? design.m.front()
                                            : design.m[static_cast<std::size_t>(i)];
        if (design.design == DesignKind::Common) {
            rec.t = common_t;
        } else {
            rec.t.resize(mi);
            for (int j = 0; j < mi; ++j) rec.t[j] = unif(rng);
            std::sort(rec.t.begin(), rec.t.end());
        }
        for (int k = 0; k < design.kl_terms; ++k) scores[k] = t5(rng);
        rec.y.resize(rec.t.size());
        for (std::size_t j = 0; j < rec.t.size(); ++j) {
            const double x = kl_curve(design, scores, rec.t[j]);
            noiseless.push_back(x);
            rec.y[j] = design.sigma > 0.0
                           ? x + design.sigma * noise_draw(design.error_law, rng)
                           : x;
        }
        records.push_back(std::move(rec));
    }
    ObservationSet data = ObservationSet::from_records(std::move(records));

    std::vector<double> eval_grid;
    if (design.design == DesignKind::Common &&
        design.eval_kind == EvalGridKind::Sites) {
        eval_grid = common_t;
    } else {
        double lo = 1.0, hi = 0.0;
        for (const auto& s : data.subjects()) {
            lo = std::min(lo, s.t.front());
            hi = std::max(hi, s.t.back());
        }
        const int G = design.eval_grid_size;
        for (int g = 1; g <= G; ++g) {
            const double t = static_cast<double>(g) / (G + 1);
            if (t >= lo && t <= hi) eval_grid.push_back(t);
        }
        if (eval_grid.empty()) eval_grid = {lo, hi};
    }
    std::vector<double> true_mean;
    true_mean.reserve(eval_grid.size());
    for (double t : eval_grid) true_mean.push_back(mean_value(design, t));
    return GeneratedData{std::move(data), std::move(eval_grid),
                         std::move(true_mean), std::move(noiseless)};
}

double mse(const SplineFunction& fitted, const std::vector<double>& true_mean,
           const std::vector<double>& grid) {
    if (grid.empty() || grid.size() != true_mean.size())
        throw ConfigError("mse needs matching non-empty grid and truth");
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double diff = evaluate(fitted, grid[j]) - true_mean[j];
        acc += diff * diff;
    }
    return acc / static_cast<double>(grid.size());
}

MonteCarloReport run_cell(const SimDesign& design, const Estimator& estimator,
                          int reps) {
    if (reps < 2) throw ConfigError("run_cell needs at least 2 replicates");
    MonteCarloReport report;
    report.replicates = reps;
    report.estimator = estimator.label;
    report.replicate_mse.reserve(reps);

    for (int rep = 0; rep < reps; ++rep) {
        SimDesign d = design;
        d.seed = replicate_seed(design.seed, static_cast<std::uint64_t>(rep));
        double value = std::numeric_limits<double>::quiet_NaN();
        try {
            const GeneratedData gen = generate(d);
            const DesignSummary summary = summarize(gen.data);
            ModelPtr model = build_model(summary, estimator.config.r);
            const LossEval loss =
                resolve_loss(estimator.loss, gen.data, model, estimator.config);
            FitResult fr;
            if (const auto* fixed = std::get_if<FixedLambda>(&estimator.config.lambda))
                fr = fit(gen.data, model, loss, fixed->value, estimator.config);
            else
                fr = select(gen.data, model, loss,
                            std::get<GcvGrid>(estimator.config.lambda),
                            estimator.config)
                         .best;
            value = mse(fr.function, gen.true_mean, gen.eval_grid);
        } catch (const Error&) {
            ++report.failed;
        }
        report.replicate_mse.push_back(value);
    }

    // ordered accumulation keeps the report independent of execution order
    double sum = 0.0;
    int ok = 0;
    for (double v : report.replicate_mse)
        if (std::isfinite(v)) {
            sum += v;
            ++ok;
        }
    report.mean_mse = ok > 0 ? sum / ok : std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (double v : report.replicate_mse)
        if (std::isfinite(v)) ss += (v - report.mean_mse) * (v - report.mean_mse);
    report.stderr_mse = ok > 1 ? std::sqrt(ss / (ok - 1) / ok)
                               : std::numeric_limits<double>::quiet_NaN();
    return report;
}

RateResult rate_experiment(const Estimator& estimator, const SimDesign& base,
                           const std::vector<int>& n_sequence, MPolicy m_policy,
                           int reps) {
    if (n_sequence.size() < 3)
        throw ConfigError("rate experiment needs at least 3 sample sizes");
    for (std::size_t i = 1; i < n_sequence.size(); ++i)
        if (n_sequence[i] <= n_sequence[i - 1])
            throw ConfigError("n sequence must be strictly increasing");

    RateResult out;
    for (int n : n_sequence) {
        SimDesign d = base;
        d.n = n;
        // rate comparisons need an m-independent metric: at the sampled sites a
        // sparse fit interpolates the site means and the discretization floor
        // disappears from the score
        d.eval_kind = EvalGridKind::Fine;
        const int m = m_policy.kind == MPolicy::Kind::Fixed
                          ? static_cast<int>(std::lround(m_policy.value))
                          : static_cast<int>(std::lround(
                                m_policy.value * std::sqrt(static_cast<double>(n))));
        d.m = {std::max(1, m)};
        d.seed = replicate_seed(base.seed, 1000003ull * static_cast<std::uint64_t>(n));
        const MonteCarloReport rep = run_cell(d, estimator, reps);
        out.points.push_back(RatePoint{n, d.m.front(), rep.mean_mse, rep.stderr_mse});
    }

    // least-squares slope of log mean-MSE on log n
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double N = static_cast<double>(out.points.size());
    for (const auto& p : out.points) {
        const double x = std::log(static_cast<double>(p.n));
        const double y = std::log(p.mean_mse);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.slope = (sxy - sx * sy / N) / (sxx - sx * sx / N);
    return out;
}

}  // namespace floc
