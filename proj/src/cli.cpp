#include <llasso/cli.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <llasso/core.hpp>
#include <llasso/estimators.hpp>
#include <llasso/orthonormal.hpp>
#include <llasso/simbench.hpp>
#include <llasso/tuning.hpp>

namespace llasso::cli {
namespace {

struct OutputOptions {
    std::string format = "table";
    std::string path;
};

void add_output_options(CLI::App* cmd, OutputOptions& o)
{
    cmd->add_option("--format", o.format, "Output format: table (for people) or csv (stable)")
        ->check(CLI::IsMember({"table", "csv"}));
    cmd->add_option("--out", o.path, "Write output to this file instead of stdout");
}

void emit(const OutputOptions& o, const std::string& text, std::ostream& out)
{
    if (o.path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.path, std::ios::binary);
    if (!f) throw InputError("cannot write " + o.path);
    f << text;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_number(const std::string& s)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InputError("not a number: '" + s + "'");
    }
    if (used != s.size()) throw InputError("not a number: '" + s + "'");
    return v;
}

std::vector<double> parse_number_list(const std::string& s)
{
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(parse_number(item));
    if (out.empty()) throw InputError("empty list");
    return out;
}

// "1-5", "2", "1,3,5" or any comma-separated mix.
std::vector<int> parse_examples(const std::string& s)
{
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        const auto dash = item.find('-');
        try {
            if (dash == std::string::npos) {
                out.push_back(std::stoi(item));
            } else {
                const int a = std::stoi(item.substr(0, dash));
                const int b = std::stoi(item.substr(dash + 1));
                if (b < a) throw InputError("bad example range '" + item + "'");
                for (int k = a; k <= b; ++k) out.push_back(k);
            }
        } catch (const std::logic_error&) {
            throw InputError("bad example list '" + s + "'");
        }
    }
    if (out.empty()) throw InputError("no examples requested");
    return out;
}

std::vector<Family> parse_families(const std::string& s)
{
    std::vector<Family> out;
    for (const auto& item : split_list(s)) out.push_back(family_from_string(item));
    if (out.empty()) throw InputError("no estimators requested");
    return out;
}

std::string num(double v)
{
    return fmt::format("{:.10g}", v);
}

struct FitArgs {
    std::string data, response, estimator;
    std::optional<double> lambda, lambda1, lambda2, k, d;
    bool allow_nonconverged = false;
    OutputOptions output;
};

double required(const std::optional<double>& v, const char* flag, const std::string& estimator)
{
    if (!v) throw InputError(std::string("estimator '") + estimator + "' requires " + flag);
    return *v;
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err)
{
    const auto family = family_from_string(a.estimator);
    PenaltySpec spec;
    switch (family) {
    case Family::Ols: spec = PenaltySpec::ols(); break;
    case Family::Ridge: spec = PenaltySpec::ridge(required(a.k, "--k", a.estimator)); break;
    case Family::Liu: spec = PenaltySpec::liu(required(a.d, "--d", a.estimator)); break;
    case Family::Lasso: spec = PenaltySpec::lasso(required(a.lambda, "--lambda", a.estimator)); break;
    case Family::LLasso:
        spec = PenaltySpec::llasso(required(a.lambda, "--lambda", a.estimator), required(a.d, "--d", a.estimator));
        break;
    case Family::ENet:
        spec = PenaltySpec::enet(a.lambda1 ? *a.lambda1 : required(a.lambda, "--lambda1", a.estimator),
                                 required(a.lambda2, "--lambda2", a.estimator));
        break;
    }

    const auto ds = standardize(load_csv(a.data, a.response));
    const auto result = fit(ds, spec);
    if (!result.converged && !a.allow_nonconverged) {
        err << "error: coordinate descent did not converge after " << result.iterations
            << " sweeps (use --allow-nonconverged to print the result anyway)\n";
        return kNumericalError;
    }
    const VectorXd original = to_original_scale(ds, result.beta);

    std::string text;
    if (a.output.format == "csv") {
        text = "term,standardized,original\n";
        text += fmt::format("(intercept),{},{}\n", num(result.intercept), num(original_intercept(ds, result.beta)));
        for (Index j = 0; j < ds.p(); ++j) {
            text += fmt::format("{},{},{}\n", ds.column_names[static_cast<std::size_t>(j)], num(result.beta(j)),
                                num(original(j)));
        }
    } else {
        text = fmt::format("{:<14} {:>14} {:>14}\n", "term", "standardized", "original");
        text += fmt::format("{:<14} {:>14.6f} {:>14.6f}\n", "(intercept)", result.intercept,
                            original_intercept(ds, result.beta));
        for (Index j = 0; j < ds.p(); ++j) {
            text += fmt::format("{:<14} {:>14.6f} {:>14.6f}\n", ds.column_names[static_cast<std::size_t>(j)],
                                result.beta(j), original(j));
        }
        text += fmt::format("\nestimator: {}\nn: {}  p: {}\nsweeps: {}  converged: {}\nobjective: {:.10g}\n",
                            spec.describe(), ds.n(), ds.p(), result.iterations, result.converged ? "yes" : "no",
                            result.objective);
    }
    emit(a.output, text, out);
    return kOk;
}

struct CvArgs {
    std::string data, response;
    std::string estimators = "ols,ridge,liu,lasso,llasso,enet";
    int folds = 10;
    int reps = 250;
    unsigned long long seed = kDefaultSeed;
    int threads = 0;
    OutputOptions output;
};

int cmd_cv(const CvArgs& a, std::ostream& out)
{
    const auto families = parse_families(a.estimators);
    const auto raw = load_csv(a.data, a.response);
    std::string text = a.output.format == "csv"
                           ? "estimator,median_mse_y,se_mse_y,lambda,lambda2,k,d,folds,reps,seed\n"
                           : fmt::format("{:<8} {:>14} {:>10}  {}\n", "method", "median MSE_y", "se", "chosen");
    for (auto f : families) {
        const auto rep = kfold_cv(raw, f, {}, a.folds, a.reps, a.seed, a.threads);
        const auto& c = rep.selection.chosen;
        if (a.output.format == "csv") {
            text += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(f), num(rep.median_mse), num(rep.se_median),
                                num(c.lambda()), num(c.lambda2()), num(c.k()), num(c.d()), a.folds, a.reps, a.seed);
        } else {
            text += fmt::format("{:<8} {:>14.5f} {:>10.5f}  {}\n", to_string(f), rep.median_mse, rep.se_median,
                                c.describe());
        }
    }
    if (a.output.format != "csv") {
        text += fmt::format("{}-fold CV, {} repeats, seed {} (se: bootstrap standard error of the median)\n", a.folds,
                            a.reps, a.seed);
    }
    emit(a.output, text, out);
    return kOk;
}

struct SimulateArgs {
    std::string examples = "1-5";
    std::string estimators = "ols,ridge,liu,lasso,llasso,enet";
    int reps = 250;
    unsigned long long seed = kDefaultSeed;
    int threads = 0;
    std::string raw_out;
    OutputOptions output;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out)
{
    std::vector<SimDesign> designs;
    for (int k : parse_examples(a.examples)) designs.push_back(design_example(k));
    std::vector<BenchEstimator> estimators;
    for (auto f : parse_families(a.estimators)) estimators.push_back(BenchEstimator{f, {}, to_string(f)});
    if (a.reps < 1) throw InputError("--reps must be at least 1");

    const auto report = run_benchmark(designs, estimators, a.reps, a.seed, a.threads);
    emit(a.output, a.output.format == "csv" ? format_report_csv(report) : format_report_table(report), out);
    if (!a.raw_out.empty()) emit(OutputOptions{"csv", a.raw_out}, format_report_raw_csv(report), out);
    return kOk;
}

struct RiskArgs {
    std::string delta = "0,1,2";
    std::string lambda_o = "0,1,2";
    std::string d = "0.5,1";
    std::string delta_bound = "0.1";
    double sigma = 1.0;
    long long draws = 100000;
    unsigned long long seed = kDefaultSeed;
    int threads = 0;
    OutputOptions output;
};

int cmd_risk(const RiskArgs& a, std::ostream& out)
{
    const auto deltas = parse_number_list(a.delta);
    const auto lambdas = parse_number_list(a.lambda_o);
    const auto ds = parse_number_list(a.d);
    const auto bounds = parse_number_list(a.delta_bound);
    for (double b : bounds) {
        if (!(b > 0.0 && b <= 0.5)) throw InputError("--delta-bound values must lie in (0, 1/2]");
    }

    const bool csv = a.output.format == "csv";
    std::string text = csv ? "delta,lambda_o,d,delta_bound,risk_closed_form,classical_risk,mc_risk,mc_se,"
                             "mse_bound,mse_bound_mc,mse_bound_mc_se\n"
                           : fmt::format("{:>6} {:>8} {:>5} {:>7} {:>10} {:>10} {:>18} {:>10} {:>18}\n", "Delta",
                                         "lambda_o", "d", "delta", "risk", "risk(d=1)", "MC risk (se)", "bound",
                                         "MC bound-MSE (se)");
    std::uint64_t row = 0;
    for (double delta : deltas) {
        for (double l : lambdas) {
            for (double d : ds) {
                for (double b : bounds) {
                    const VectorXd dv = VectorXd::Constant(1, delta);
                    const OrthoConfig cfg(dv, l, d, a.sigma, b);
                    const OrthoConfig classical(dv, l, 1.0, a.sigma, b);
                    const SeedPlan plan(a.seed);
                    const auto mc = mc_risk(cfg, a.draws, plan.stream(row, "risk"), a.threads);
                    const auto pmc = mc_bound_mse(cfg, a.draws, plan.stream(row, "bound-mc"), a.threads);
                    const double risk = risk_closed_form(cfg);
                    const double risk1 = risk_closed_form(classical);
                    const double bound = mse_bound(cfg)(0);
                    if (csv) {
                        text += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", num(delta), num(l), num(d), num(b),
                                            num(risk), num(risk1), num(mc.estimate), num(mc.mc_se), num(bound),
                                            num(pmc.estimate(0)), num(pmc.mc_se(0)));
                    } else {
                        text += fmt::format("{:>6.3g} {:>8.3g} {:>5.3g} {:>7.3g} {:>10.5f} {:>10.5f} {:>18} {:>10.5f} "
                                            "{:>18}\n",
                                            delta, l, d, b, risk, risk1,
                                            fmt::format("{:.5f} ({:.5f})", mc.estimate, mc.mc_se), bound,
                                            fmt::format("{:.5f} ({:.5f})", pmc.estimate(0), pmc.mc_se(0)));
                    }
                    ++row;
                }
            }
        }
    }
    emit(a.output, text, out);
    return kOk;
}

struct ChooseDArgs {
    std::string data, response;
    std::string method = "closed-form";
    std::string target = "enet";
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    OutputOptions output;
};

int cmd_choose_d(const ChooseDArgs& a, std::ostream& out)
{
    const auto ds = standardize(load_csv(a.data, a.response));
    const auto ols = fit_ols(ds);
    const auto target = a.target == "lasso" ? fit_lasso(ds, a.lambda1) : fit_enet(ds, a.lambda1, a.lambda2);
    DChoice choice;
    if (a.method == "closed-form") {
        if (a.target != "enet") throw InputError("the closed form uses the elastic-net fit (--target enet)");
        // The fits use per-observation penalties; the closed form works with
        // the unnormalized loss, so the penalties are scaled by n.
        const double n = static_cast<double>(ds.n());
        choice = choose_d_closed_form(ols.beta, target.beta, ds, n * a.lambda1, n * a.lambda2);
    } else {
        choice.d = choose_d_l1(ols.beta, target.beta);
    }
    std::string text;
    if (a.output.format == "csv") {
        text = "method,target,lambda1,lambda2,d,fallback\n";
        text += fmt::format("{},{},{},{},{},{}\n", a.method, a.target, num(a.lambda1), num(a.lambda2), num(choice.d),
                            choice.used_fallback ? 1 : 0);
    } else {
        text = fmt::format("d = {:.6f}  ({}, target {}{})\n", choice.d, a.method, target.spec.describe(),
                           choice.used_fallback ? "; negative discriminant, used the l1 criterion" : "");
    }
    emit(a.output, text, out);
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Liu-type rescaled LASSO (LLASSO) and baseline penalized regression estimators", "llasso"};
    app.require_subcommand(1);
    app.footer(
        "Exit codes: 0 success, 2 input or validation error, 3 numerical failure.\n"
        "CSV schemas (--format csv):\n"
        "  fit:      term,standardized,original\n"
        "  cv:       estimator,median_mse_y,se_mse_y,lambda,lambda2,k,d,folds,reps,seed\n"
        "  simulate: design,estimator,median_mse_y,se_mse_y,median_mse_beta,se_mse_beta,reps,seed\n"
        "            (--raw-out: design,estimator,rep,mse_y,mse_beta)\n"
        "  risk:     delta,lambda_o,d,delta_bound,risk_closed_form,classical_risk,mc_risk,mc_se,\n"
        "            mse_bound,mse_bound_mc,mse_bound_mc_se\n"
        "  choose-d: method,target,lambda1,lambda2,d,fallback\n"
        "Standard errors of medians are bootstrap estimates (1000 resamples).");

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "Fit one estimator on a CSV data set");
    fit_cmd->add_option("--data", fit_args.data, "Input CSV (header row, numeric cells)")->required();
    fit_cmd->add_option("--response", fit_args.response, "Response column name")->required();
    fit_cmd->add_option("--estimator", fit_args.estimator, "ols, ridge, liu, lasso, enet or llasso")->required();
    fit_cmd->add_option("--lambda", fit_args.lambda, "l1 penalty (lasso, llasso)");
    fit_cmd->add_option("--lambda1", fit_args.lambda1, "l1 penalty (enet)");
    fit_cmd->add_option("--lambda2", fit_args.lambda2, "l2 penalty (enet)");
    fit_cmd->add_option("--k", fit_args.k, "ridge parameter");
    fit_cmd->add_option("--d", fit_args.d, "biasing parameter in [0, 1] (liu, llasso)");
    fit_cmd->add_flag("--allow-nonconverged", fit_args.allow_nonconverged,
                      "Print the result even if coordinate descent hit the sweep limit");
    add_output_options(fit_cmd, fit_args.output);

    CvArgs cv_args;
    auto* cv_cmd = app.add_subcommand("cv", "Repeated K-fold cross-validation of the estimators");
    cv_cmd->add_option("--data", cv_args.data, "Input CSV")->required();
    cv_cmd->add_option("--response", cv_args.response, "Response column name")->required();
    cv_cmd->add_option("--estimators", cv_args.estimators, "Comma-separated estimator list")->capture_default_str();
    cv_cmd->add_option("--folds", cv_args.folds, "Number of folds K")->capture_default_str();
    cv_cmd->add_option("--reps", cv_args.reps, "Number of repeated partitions")->capture_default_str();
    cv_cmd->add_option("--seed", cv_args.seed, "Master seed")->capture_default_str();
    cv_cmd->add_option("--threads", cv_args.threads, "Worker threads (0: hardware concurrency)")->capture_default_str();
    add_output_options(cv_cmd, cv_args.output);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo benchmark on the simulation examples");
    sim_cmd->add_option("--examples", sim_args.examples, "Examples, e.g. 1-5 or 1,3")->capture_default_str();
    sim_cmd->add_option("--estimators", sim_args.estimators, "Comma-separated estimator list")->capture_default_str();
    sim_cmd->add_option("--reps", sim_args.reps, "Replications per example")->capture_default_str();
    sim_cmd->add_option("--seed", sim_args.seed, "Master seed")->capture_default_str();
    sim_cmd->add_option("--threads", sim_args.threads, "Worker threads (0: hardware concurrency)")->capture_default_str();
    sim_cmd->add_option("--raw-out", sim_args.raw_out, "Also write per-replication errors to this CSV");
    add_output_options(sim_cmd, sim_args.output);

    RiskArgs risk_args;
    auto* risk_cmd = app.add_subcommand("risk", "Orthonormal-design risk: closed form, Monte Carlo and bound");
    risk_cmd->add_option("--delta", risk_args.delta, "Comma-separated standardized means")->capture_default_str();
    risk_cmd->add_option("--lambda-o", risk_args.lambda_o, "Comma-separated thresholds")->capture_default_str();
    risk_cmd->add_option("--d", risk_args.d, "Comma-separated biasing parameters")->capture_default_str();
    risk_cmd->add_option("--delta-bound", risk_args.delta_bound, "Comma-separated bound parameters in (0, 1/2]")
        ->capture_default_str();
    risk_cmd->add_option("--sigma", risk_args.sigma, "Noise scale used by the bound")->capture_default_str();
    risk_cmd->add_option("--draws", risk_args.draws, "Monte Carlo draws per row")->capture_default_str()->check(CLI::Range(10000LL, 1LL << 40));
    risk_cmd->add_option("--seed", risk_args.seed, "Master seed")->capture_default_str();
    risk_cmd->add_option("--threads", risk_args.threads, "Worker threads (0: hardware concurrency)")->capture_default_str();
    add_output_options(risk_cmd, risk_args.output);

    ChooseDArgs cd_args;
    auto* cd_cmd = app.add_subcommand("choose-d", "Select the biasing parameter d");
    cd_cmd->add_option("--data", cd_args.data, "Input CSV")->required();
    cd_cmd->add_option("--response", cd_args.response, "Response column name")->required();
    cd_cmd->add_option("--method", cd_args.method, "closed-form or l1")->capture_default_str()
        ->check(CLI::IsMember({"closed-form", "l1"}));
    cd_cmd->add_option("--target", cd_args.target, "Fit compared against d * OLS: enet or lasso")->capture_default_str()
        ->check(CLI::IsMember({"enet", "lasso"}));
    cd_cmd->add_option("--lambda1", cd_args.lambda1, "l1 penalty of the target fit")->capture_default_str();
    cd_cmd->add_option("--lambda2", cd_args.lambda2, "l2 penalty of the target fit")->capture_default_str();
    add_output_options(cd_cmd, cd_args.output);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        // Subcommand help requests arrive here as well.
        if (e.get_exit_code() == 0) {
            for (auto* sub : app.get_subcommands()) out << sub->help();
            if (app.get_subcommands().empty()) out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit_args, out, err);
        if (*cv_cmd) return cmd_cv(cv_args, out);
        if (*sim_cmd) return cmd_simulate(sim_args, out);
        if (*risk_cmd) return cmd_risk(risk_args, out);
        if (*cd_cmd) return cmd_choose_d(cd_args, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kInputError;
}

} // namespace llasso::cli
