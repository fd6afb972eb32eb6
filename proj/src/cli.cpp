#include "floc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"

#include "floc/csvio.hpp"
#include "floc/errors.hpp"
#include "floc/lambda_select.hpp"
#include "floc/rkhs.hpp"
#include "floc/simulate.hpp"

namespace floc {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// --- shared option plumbing ---

struct FlagSet {
    std::string input;
    std::string out_dir = ".";
    std::string loss = "huber";
    double k = 0.70;
    double q = 1.5;
    double tau = 0.5;
    std::string tau_list = "0.1,0.3,0.5,0.7,0.9";
    double alpha = 0.5;
    int r = 2;
    double lambda = 0.0;
    bool lambda_set = false;
    std::string gcv_grid;
    int grid_size = 200;
    bool rescale = false;
    std::uint64_t seed = 12345;
    int reps = 200;

    // simulate / rates extras
    std::string mean = "sinusoidal";
    std::string law = "gaussian";
    std::string design = "common";
    int n = 60;
    int m = 20;
    double sigma = 0.2;
    std::string regime = "dense";

    // kernel extras
    std::string lambda_csv = "0.3,0.6,0.9";
    double y_center = 0.5;
    int truncation = 10000;
};

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string tok =
            s.substr(start, comma == std::string::npos ? comma : comma - start);
        if (tok.empty())
            throw ConfigError(std::string("empty entry in ") + what + " list");
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            throw ConfigError(std::string("invalid ") + what + " value: '" + tok + "'");
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw ConfigError(std::string(what) + " list is empty");
    return out;
}

GcvGrid parse_gcv_grid(const std::string& s) {
    GcvGrid g;
    if (s.empty()) return g;
    double lo = 0.0, hi = 0.0;
    int count = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf,%d%c", &lo, &hi, &count, &tail) != 3)
        throw ConfigError("--gcv-grid expects 'lo,hi,count'");
    if (!(lo > 0.0) || !(hi >= lo) || count < 2)
        throw ConfigError("--gcv-grid needs 0 < lo <= hi and count >= 2");
    g.lambda_min = lo;
    g.lambda_max = hi;
    g.count = count;
    return g;
}

LambdaPolicy lambda_policy(const FlagSet& f) {
    if (f.lambda_set) {
        if (!(f.lambda > 0.0)) throw ConfigError("--lambda must be positive");
        return FixedLambda{f.lambda};
    }
    return parse_gcv_grid(f.gcv_grid);
}

double quantile_type7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

double default_check_epsilon(const std::vector<double>& y) {
    const double iqr = quantile_type7(y, 0.75) - quantile_type7(y, 0.25);
    if (iqr < 1e-12) return 1e-4;  // degenerate response spread
    return 1e-4 * iqr;
}

LossSpec loss_from_flags(const FlagSet& f, const std::vector<double>& responses) {
    if (f.loss == "squared") return LossSpec::squared();
    if (f.loss == "huber") return LossSpec::huber(f.k);
    if (f.loss == "lq") return LossSpec::lq(f.q);
    if (f.loss == "expectile") return LossSpec::expectile(f.alpha);
    if (f.loss == "logcosh") return LossSpec::log_cosh();
    if (f.loss == "quantile") {
        const double eps =
            responses.empty() ? 1e-4 : default_check_epsilon(responses);
        return LossSpec::check_smoothed(f.tau, eps);
    }
    throw ConfigError("unknown loss '" + f.loss +
                      "' (squared|huber|lq|quantile|expectile|logcosh)");
}

std::string loss_label(const LossSpec& s) {
    switch (s.kind) {
        case LossKind::Squared: return "squared";
        case LossKind::Huber: return "huber";
        case LossKind::Lq: return "lq";
        case LossKind::CheckSmoothed: return "quantile";
        case LossKind::Expectile: return "expectile";
        case LossKind::LogCosh: return "logcosh";
    }
    return "?";
}

std::ofstream open_out(const FlagSet& f, const std::string& name) {
    fs::path dir(f.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    return out;
}

struct LoadedData {
    std::vector<RawPoint> raw;
    bool rescaled = false;
    double t_min = 0.0;
    double t_max = 1.0;
    std::vector<double> responses;
};

LoadedData load_input(const FlagSet& f) {
    LoadedData ld;
    ld.raw = read_long_csv_file(f.input);
    if (f.rescale) {
        double lo = ld.raw.front().t, hi = ld.raw.front().t;
        for (const auto& p : ld.raw) {
            lo = std::min(lo, p.t);
            hi = std::max(hi, p.t);
        }
        if (!(hi > lo))
            throw ConfigError("--rescale needs at least two distinct t values");
        for (auto& p : ld.raw) p.t = (p.t - lo) / (hi - lo);
        ld.rescaled = true;
        ld.t_min = lo;
        ld.t_max = hi;
    }
    ld.responses.reserve(ld.raw.size());
    for (const auto& p : ld.raw) ld.responses.push_back(p.y);
    return ld;
}

std::vector<double> unit_grid(double a, double b, int size) {
    if (size < 2) throw ConfigError("--grid-size must be >= 2");
    std::vector<double> g(size);
    for (int i = 0; i < size; ++i) g[i] = a + (b - a) * i / (size - 1);
    return g;
}

ordered_json loss_json(const LossSpec& s) {
    ordered_json j;
    j["kind"] = loss_label(s);
    switch (s.kind) {
        case LossKind::Huber: j["k"] = s.huber_k; break;
        case LossKind::Lq: j["q"] = s.lq_q; break;
        case LossKind::CheckSmoothed:
            j["tau"] = s.tau;
            j["epsilon"] = s.epsilon;
            break;
        case LossKind::Expectile: j["alpha"] = s.alpha; break;
        default: break;
    }
    j["scale_mode"] = s.scale == ScaleMode::Raw ? "raw" : "preliminary_mad";
    return j;
}

// --- commands ---

void cmd_fit(const FlagSet& f) {
    const LoadedData ld = load_input(f);
    const ObservationSet data = validate(ld.raw);
    const DesignSummary summary = summarize(data);

    FitConfig config;
    config.r = f.r;
    config.lambda = lambda_policy(f);

    ModelPtr model = build_model(summary, config.r);
    const LossSpec spec = loss_from_flags(f, ld.responses);
    const LossEval loss = resolve_loss(spec, data, model, config);

    FitResult fr;
    GcvTrace trace;
    if (const auto* fixed = std::get_if<FixedLambda>(&config.lambda)) {
        fr = fit(data, model, loss, fixed->value, config);
        trace.lambdas = {fixed->value};
        trace.gcv_values = {gcv_value(fr, data)};
        trace.fits_converged = {static_cast<char>(fr.converged ? 1 : 0)};
        trace.chosen_index = 0;
    } else {
        SelectResult sr =
            select(data, model, loss, std::get<GcvGrid>(config.lambda), config);
        fr = std::move(sr.best);
        trace = std::move(sr.trace);
    }

    const double span = ld.t_max - ld.t_min;  // 1 unless rescaled
    const auto grid = unit_grid(summary.a, summary.b, f.grid_size);

    {
        auto out = open_out(f, "fitted.csv");
        out << "t,mu_hat\n";
        for (double t : grid)
            out << fmt17(ld.t_min + span * t) << ','
                << fmt17(evaluate(fr.function, t)) << '\n';
    }
    {
        // derivative values are reported per original time units
        auto out = open_out(f, "derivatives.csv");
        out << "t,s,value\n";
        for (int s = 0; s <= config.r; ++s) {
            const double chain = std::pow(1.0 / span, s);
            for (double t : grid)
                out << fmt17(ld.t_min + span * t) << ',' << s << ','
                    << fmt17(chain * evaluate(fr.function, t, s)) << '\n';
        }
    }
    {
        auto out = open_out(f, "gcv_trace.csv");
        out << "lambda,gcv,converged\n";
        for (std::size_t i = 0; i < trace.lambdas.size(); ++i)
            out << fmt17(trace.lambdas[i]) << ',' << fmt17(trace.gcv_values[i]) << ','
                << (trace.fits_converged[i] ? 1 : 0) << '\n';
    }
    {
        ordered_json meta;
        meta["command"] = "fit";
        meta["input"] = f.input;
        meta["n"] = data.n();
        meta["design"] =
            data.design_kind() == DesignKind::Common ? "common" : "independent";
        meta["m_harmonic"] = summary.m_harmonic;
        meta["a"] = summary.a;
        meta["b"] = summary.b;
        meta["rescale"] = {{"active", ld.rescaled},
                           {"t_min", ld.t_min},
                           {"t_max", ld.t_max}};
        meta["loss"] = loss_json(spec);
        meta["r"] = config.r;
        if (const auto* fixed = std::get_if<FixedLambda>(&config.lambda)) {
            meta["lambda_policy"] = {{"type", "fixed"}, {"value", fixed->value}};
        } else {
            const auto& g = std::get<GcvGrid>(config.lambda);
            meta["lambda_policy"] = {{"type", "gcv"},
                                     {"lo", g.lambda_min},
                                     {"hi", g.lambda_max},
                                     {"count", g.count}};
        }
        meta["lambda"] = fr.lambda_used;
        meta["iterations"] = fr.iterations;
        meta["converged"] = fr.converged;
        meta["objective"] = fr.objective;
        meta["edf"] = fr.hat_diag.sum();
        meta["grid_size"] = f.grid_size;
        meta["order"] = fr.function.model->order;
        meta["knots"] = fr.function.model->knots;
        meta["coefficients"] = std::vector<double>(
            fr.function.coefficients.data(),
            fr.function.coefficients.data() + fr.function.coefficients.size());
        auto out = open_out(f, "fit_meta.json");
        out << meta.dump(2) << '\n';
    }
}

void cmd_quantiles(const FlagSet& f) {
    const LoadedData ld = load_input(f);
    const ObservationSet data = validate(ld.raw);
    const DesignSummary summary = summarize(data);

    const std::vector<double> taus = parse_double_list(f.tau_list, "tau");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0 && taus[i] < 1.0))
            throw ConfigError("tau values must lie in (0,1)");
        if (i > 0 && taus[i] <= taus[i - 1])
            throw ConfigError("tau list must be strictly increasing");
    }

    FitConfig config;
    config.r = f.r;
    config.lambda = lambda_policy(f);
    ModelPtr model = build_model(summary, config.r);
    const double eps = default_check_epsilon(ld.responses);

    const double span = ld.t_max - ld.t_min;
    const auto grid = unit_grid(summary.a, summary.b, f.grid_size);

    auto out = open_out(f, "quantiles.csv");
    out << "t,tau,value\n";
    for (double tau : taus) {
        const LossSpec spec = LossSpec::check_smoothed(tau, eps);
        const LossEval loss = make_loss(spec);
        FitResult fr;
        if (const auto* fixed = std::get_if<FixedLambda>(&config.lambda))
            fr = fit(data, model, loss, fixed->value, config);
        else
            fr = select(data, model, loss, std::get<GcvGrid>(config.lambda), config)
                     .best;
        for (double t : grid)
            out << fmt17(ld.t_min + span * t) << ',' << fmtg(tau) << ','
                << fmt17(evaluate(fr.function, t)) << '\n';
    }
}

MeanKind parse_mean(const std::string& s) {
    if (s == "sinusoidal") return MeanKind::Sinusoidal;
    if (s == "bump") return MeanKind::Bump;
    throw ConfigError("unknown mean '" + s + "' (sinusoidal|bump)");
}

ErrorLaw parse_law(const std::string& s) {
    if (s == "gaussian") return ErrorLaw::Gaussian;
    if (s == "t3") return ErrorLaw::T3;
    if (s == "skewt3") return ErrorLaw::SkewT3;
    if (s == "mixgauss") return ErrorLaw::MixGauss;
    if (s == "slash") return ErrorLaw::Slash;
    throw ConfigError("unknown law '" + s + "' (gaussian|t3|skewt3|mixgauss|slash)");
}

void cmd_simulate(const FlagSet& f) {
    SimDesign d;
    d.mean_kind = parse_mean(f.mean);
    d.error_law = parse_law(f.law);
    if (f.design == "common")
        d.design = DesignKind::Common;
    else if (f.design == "independent")
        d.design = DesignKind::Independent;
    else
        throw ConfigError("unknown design '" + f.design + "' (common|independent)");
    d.n = f.n;
    d.m = {f.m};
    d.sigma = f.sigma;
    d.seed = f.seed;

    Estimator est;
    est.loss = loss_from_flags(f, {});
    est.config.r = f.r;
    est.config.lambda = lambda_policy(f);
    est.label = loss_label(est.loss);

    const MonteCarloReport report = run_cell(d, est, f.reps);

    auto out = open_out(f, "simulate_report.csv");
    out << "mean,law,design,n,m,sigma,loss,reps,failed,mean_mse,stderr_mse\n";
    out << f.mean << ',' << f.law << ',' << f.design << ',' << d.n << ','
        << f.m << ',' << fmtg(d.sigma) << ',' << est.label << ','
        << report.replicates << ',' << report.failed << ','
        << fmt17(report.mean_mse) << ',' << fmt17(report.stderr_mse) << '\n';
}

void cmd_rates(const FlagSet& f) {
    SimDesign base;
    base.mean_kind = MeanKind::Sinusoidal;
    base.sigma = 0.2;
    base.error_law = ErrorLaw::Gaussian;
    base.seed = f.seed;

    std::vector<int> n_seq;
    MPolicy policy;
    if (f.regime == "dense") {
        base.design = DesignKind::Common;
        n_seq = {50, 100, 200, 400};
        policy = MPolicy::sqrt_scale(4.0);
    } else if (f.regime == "sparse") {
        base.design = DesignKind::Common;
        n_seq = {50, 100, 200, 400};
        policy = MPolicy::fixed(5.0);
    } else if (f.regime == "independent") {
        base.design = DesignKind::Independent;
        n_seq = {100, 400, 1600};
        policy = MPolicy::fixed(5.0);
    } else {
        throw ConfigError("unknown regime '" + f.regime +
                          "' (dense|sparse|independent)");
    }

    Estimator est;
    est.loss = loss_from_flags(f, {});
    est.config.r = f.r;
    // rate presets sweep a trimmed grid; wide enough for every n here
    est.config.lambda = f.gcv_grid.empty() && !f.lambda_set
                            ? GcvGrid{1e-8, 1e-1, 25}
                            : lambda_policy(f);
    est.label = loss_label(est.loss);

    const RateResult rr = rate_experiment(est, base, n_seq, policy, f.reps);

    {
        auto out = open_out(f, "rates.csv");
        out << "regime,loss,n,m,mean_mse,stderr_mse\n";
        for (const auto& p : rr.points)
            out << f.regime << ',' << est.label << ',' << p.n << ',' << p.m << ','
                << fmt17(p.mean_mse) << ',' << fmt17(p.stderr_mse) << '\n';
    }
    {
        auto out = open_out(f, "rates_slope.csv");
        out << "regime,loss,slope\n";
        out << f.regime << ',' << est.label << ',' << fmt17(rr.slope) << '\n';
    }
}

void cmd_kernel(const FlagSet& f) {
    const std::vector<double> lambdas = parse_double_list(f.lambda_csv, "lambda");
    for (double l : lambdas) {
        KernelSpec spec{1, l, f.truncation};
        const auto curve = kernel_curve(spec, f.y_center, f.grid_size);
        auto out = open_out(f, "kernel_lambda" + fmtg(l) + ".csv");
        out << "x,value\n";
        for (const auto& [x, v] : curve) out << fmt17(x) << ',' << fmt17(v) << '\n';
    }
}

}  // namespace

int run_cli(std::vector<std::string> args) {
    CLI::App app{"penalized M-type smoothing splines for functional data"};
    app.require_subcommand(1);
    FlagSet f;

    auto add_loss_flags = [&f](CLI::App* sub) {
        sub->add_option("--loss", f.loss,
                        "squared|huber|lq|quantile|expectile|logcosh");
        sub->add_option("--k", f.k, "Huber threshold");
        sub->add_option("--q", f.q, "Lq exponent in (1,2]");
        sub->add_option("--alpha", f.alpha, "expectile level in (0,1)");
        sub->add_option("--r", f.r, "penalty order (1..3)");
    };
    auto add_lambda_flags = [&f](CLI::App* sub) {
        sub->add_option("--lambda", f.lambda, "fixed smoothing parameter")
            ->each([&f](const std::string&) { f.lambda_set = true; });
        sub->add_option("--gcv-grid", f.gcv_grid, "lo,hi,count for GCV search");
    };
    auto add_out_flags = [&f](CLI::App* sub) {
        sub->add_option("--out", f.out_dir, "output directory");
        sub->add_option("--grid-size", f.grid_size, "output grid resolution");
    };

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit one location curve");
    fit_cmd->add_option("input", f.input, "long-format CSV (subject,t,y)")
        ->required();
    add_loss_flags(fit_cmd);
    fit_cmd->add_option("--tau", f.tau, "quantile level for --loss quantile");
    add_lambda_flags(fit_cmd);
    add_out_flags(fit_cmd);
    fit_cmd->add_flag("--rescale", f.rescale, "map raw t affinely onto [0,1]");
    fit_cmd->callback([&f] { cmd_fit(f); });

    CLI::App* q_cmd = app.add_subcommand("quantiles", "fit a family of quantile curves");
    q_cmd->add_option("input", f.input, "long-format CSV (subject,t,y)")->required();
    q_cmd->add_option("--tau", f.tau_list, "comma-separated quantile levels");
    q_cmd->add_option("--r", f.r, "penalty order (1..3)");
    add_lambda_flags(q_cmd);
    add_out_flags(q_cmd);
    q_cmd->add_flag("--rescale", f.rescale, "map raw t affinely onto [0,1]");
    q_cmd->callback([&f] { cmd_quantiles(f); });

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo cell report");
    add_loss_flags(sim_cmd);
    sim_cmd->add_option("--tau", f.tau, "quantile level for --loss quantile");
    add_lambda_flags(sim_cmd);
    add_out_flags(sim_cmd);
    sim_cmd->add_option("--mean", f.mean, "sinusoidal|bump");
    sim_cmd->add_option("--law", f.law, "gaussian|t3|skewt3|mixgauss|slash");
    sim_cmd->add_option("--design", f.design, "common|independent");
    sim_cmd->add_option("--n", f.n, "subjects");
    sim_cmd->add_option("--m", f.m, "points per subject");
    sim_cmd->add_option("--sigma", f.sigma, "noise scale");
    sim_cmd->add_option("--reps", f.reps, "replicates");
    sim_cmd->add_option("--seed", f.seed, "master seed");
    sim_cmd->callback([&f] { cmd_simulate(f); });

    CLI::App* rates_cmd = app.add_subcommand("rates", "rate-of-convergence sweep");
    add_loss_flags(rates_cmd);
    add_lambda_flags(rates_cmd);
    add_out_flags(rates_cmd);
    rates_cmd->add_option("--regime", f.regime, "dense|sparse|independent");
    rates_cmd->add_option("--reps", f.reps, "replicates per n");
    rates_cmd->add_option("--seed", f.seed, "master seed");
    rates_cmd->callback([&f] { cmd_rates(f); });

    CLI::App* kernel_cmd = app.add_subcommand("kernel", "reproducing-kernel curves");
    kernel_cmd->add_option("--lambda", f.lambda_csv, "comma-separated lambda values");
    kernel_cmd->add_option("--y", f.y_center, "kernel center in [0,1]");
    kernel_cmd->add_option("--truncation", f.truncation, "series length");
    add_out_flags(kernel_cmd);
    kernel_cmd->callback([&f] { cmd_kernel(f); });

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("floc");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidTuning& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const TOutOfRange& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NonFiniteValue& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const EmptyInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const TooFewPoints& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const UnsupportedOrder& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace floc
