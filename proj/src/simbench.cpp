#include <llasso/simbench.hpp>

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "parallel.hpp"

namespace llasso {

void SimDesign::validate() const
{
    if (p() < 1) throw InputError(name + ": beta_true is empty");
    if (n_train < 2 || n_valid < 2 || n_test < 2) throw InputError(name + ": every split needs at least 2 rows");
    if (!(sigma > 0.0)) throw InputError(name + ": sigma must be > 0");
    if (const auto* ar = std::get_if<Ar1Covariance>(&covariance)) {
        if (!(ar->rho > -1.0 && ar->rho < 1.0)) throw InputError(name + ": AR1 rho must lie in (-1, 1)");
    } else {
        const auto& gf = std::get<GroupedFactors>(covariance);
        int total = 0;
        for (int s : gf.group_sizes) {
            if (s < 1) throw InputError(name + ": empty factor group");
            total += s;
        }
        if (total > p()) throw InputError(name + ": factor groups exceed the number of predictors");
        if (!(gf.idiosyncratic_variance >= 0.0)) throw InputError(name + ": negative idiosyncratic variance");
    }
}

SimDesign design_example(int k)
{
    SimDesign d;
    d.name = "example" + std::to_string(k);
    switch (k) {
    case 1:
        d.n_train = 20, d.n_valid = 20, d.n_test = 200;
        d.beta_true = (VectorXd(8) << 3, 1.5, 0, 0, 2, 0, 0, 0).finished();
        d.sigma = 3.0;
        d.covariance = Ar1Covariance{0.5};
        break;
    case 2:
        d.n_train = 100, d.n_valid = 100, d.n_test = 300;
        d.beta_true = VectorXd::Zero(40);
        d.beta_true.segment(10, 10).setConstant(3.0);
        d.beta_true.segment(30, 10).setConstant(3.0);
        d.sigma = 3.0;
        d.covariance = Ar1Covariance{0.5};
        break;
    case 3:
        d.n_train = 50, d.n_valid = 50, d.n_test = 200;
        d.beta_true = VectorXd::Zero(30);
        d.beta_true.segment(0, 5).setConstant(3.0);
        d.beta_true.segment(5, 5).setConstant(4.0);
        d.sigma = 3.0;
        d.covariance = GroupedFactors{{5, 5}, 0.01};
        break;
    case 4:
        d.n_train = 20, d.n_valid = 20, d.n_test = 200;
        d.beta_true = (VectorXd(8) << 3, 1.5, 0, 0, 0, 0, -1, -1).finished();
        d.sigma = 3.0;
        d.covariance = Ar1Covariance{0.5};
        break;
    case 5:
        d.n_train = 50, d.n_valid = 50, d.n_test = 200;
        d.beta_true = VectorXd::Zero(30);
        d.beta_true.head(8).setConstant(2.0);
        d.sigma = 6.0;
        d.covariance = Ar1Covariance{0.9};
        break;
    default:
        throw InputError("unknown simulation example " + std::to_string(k) + " (expected 1-5)");
    }
    return d;
}

MatrixXd draw_covariates(const SimDesign& design, Index rows, std::mt19937_64& rng)
{
    const Index p = design.p();
    NormalSampler normal;
    MatrixXd X(rows, p);
    if (const auto* ar = std::get_if<Ar1Covariance>(&design.covariance)) {
        MatrixXd sigma(p, p);
        for (Index i = 0; i < p; ++i) {
            for (Index j = 0; j < p; ++j) sigma(i, j) = std::pow(ar->rho, static_cast<double>(std::abs(i - j)));
        }
        const MatrixXd L = Cholesky(sigma).lower();
        VectorXd z(p);
        for (Index r = 0; r < rows; ++r) {
            for (Index j = 0; j < p; ++j) z(j) = normal(rng);
            X.row(r) = (L * z).transpose();
        }
    } else {
        const auto& gf = std::get<GroupedFactors>(design.covariance);
        const double noise_sd = std::sqrt(gf.idiosyncratic_variance);
        for (Index r = 0; r < rows; ++r) {
            Index j = 0;
            for (int size : gf.group_sizes) {
                const double factor = normal(rng);
                for (int m = 0; m < size; ++m, ++j) X(r, j) = factor + noise_sd * normal(rng);
            }
            for (; j < p; ++j) X(r, j) = normal(rng);
        }
    }
    return X;
}

SplitData generate(const SimDesign& design, std::uint64_t seed)
{
    design.validate();
    std::mt19937_64 rng(seed);
    const Index total = design.n_train + design.n_valid + design.n_test;
    const MatrixXd X = draw_covariates(design, total, rng);
    const VectorXd signal = X * design.beta_true;
    NormalSampler normal;
    VectorXd y(total);
    for (Index i = 0; i < total; ++i) y(i) = signal(i) + design.sigma * normal(rng);

    const Index nt = design.n_train;
    const Index nv = design.n_valid;
    const Index ns = design.n_test;
    SplitData out;
    out.train = standardize(Dataset::from_arrays(X.topRows(nt), y.head(nt)));
    out.valid = standardize_like(Dataset::from_arrays(X.middleRows(nt, nv), y.segment(nt, nv)), out.train);
    out.test = standardize_like(Dataset::from_arrays(X.bottomRows(ns), y.tail(ns)), out.train);
    out.x_test_raw = X.bottomRows(ns);
    out.signal_test = signal.tail(ns);
    return out;
}

double mse_y(const MatrixXd& x_test_raw, const VectorXd& signal_test, const VectorXd& beta_hat,
             const VectorXd& x_mean_train, double y_mean_train)
{
    if (x_test_raw.rows() != signal_test.size() || x_test_raw.cols() != beta_hat.size() ||
        x_mean_train.size() != beta_hat.size()) {
        throw InputError("mse_y: shape mismatch");
    }
    const VectorXd pred = ((x_test_raw.rowwise() - x_mean_train.transpose()) * beta_hat).array() + y_mean_train;
    return (signal_test - pred).squaredNorm() / static_cast<double>(signal_test.size());
}

double mse_beta(const VectorXd& beta_hat, const VectorXd& beta_true)
{
    if (beta_hat.size() != beta_true.size()) throw InputError("mse_beta: length mismatch");
    return (beta_hat - beta_true).squaredNorm();
}

std::vector<BenchEstimator> default_estimators()
{
    std::vector<BenchEstimator> out;
    for (auto f : all_families()) out.push_back(BenchEstimator{f, {}, to_string(f)});
    return out;
}

const BenchRow* BenchReport::find(const std::string& design, const std::string& estimator) const
{
    for (const auto& r : rows) {
        if (r.design == design && r.estimator == estimator) return &r;
    }
    return nullptr;
}

BenchReport run_benchmark(const std::vector<SimDesign>& designs, const std::vector<BenchEstimator>& estimators,
                          int reps, std::uint64_t seed, int threads)
{
    if (reps < 1) throw InputError("reps must be at least 1");
    if (designs.empty() || estimators.empty()) throw InputError("nothing to benchmark");
    for (const auto& d : designs) d.validate();

    const SeedPlan plan(seed);
    const std::size_t n_est = estimators.size();
    const auto n_reps = static_cast<std::size_t>(reps);

    struct Cell {
        double mse_y = 0.0;
        double mse_beta = 0.0;
        bool applicable = true;
    };
    // cells[design][rep][estimator]
    std::vector<std::vector<std::vector<Cell>>> cells(
        designs.size(), std::vector<std::vector<Cell>>(n_reps, std::vector<Cell>(n_est)));

    detail::parallel_for(designs.size() * n_reps, threads, [&](std::size_t item) {
        const std::size_t di = item / n_reps;
        const std::size_t r = item % n_reps;
        const auto& design = designs[di];
        const auto split = generate(design, plan.stream(r, "generate/" + design.name));
        for (std::size_t e = 0; e < n_est; ++e) {
            auto& cell = cells[di][r][e];
            const auto family = estimators[e].family;
            const bool needs_full_rank = family == Family::Ols || family == Family::Liu;
            if (needs_full_rank && design.p() >= design.n_train) {
                cell.applicable = false;
                continue;
            }
            const auto sel = select_by_validation(split.train, split.valid, family, estimators[e].grids);
            const VectorXd beta = to_original_scale(split.train, sel.chosen_beta);
            cell.mse_y = mse_y(split.x_test_raw, split.signal_test, beta, split.train.x_means, split.train.y_mean);
            cell.mse_beta = mse_beta(beta, design.beta_true);
        }
    });

    BenchReport report;
    report.seed = seed;
    report.reps = reps;
    for (std::size_t di = 0; di < designs.size(); ++di) {
        for (std::size_t e = 0; e < n_est; ++e) {
            BenchRow row;
            row.design = designs[di].name;
            row.estimator = estimators[e].label.empty() ? to_string(estimators[e].family) : estimators[e].label;
            for (std::size_t r = 0; r < n_reps; ++r) {
                const auto& cell = cells[di][r][e];
                row.applicable = row.applicable && cell.applicable;
                row.mse_y.push_back(cell.mse_y);
                row.mse_beta.push_back(cell.mse_beta);
            }
            if (row.applicable) {
                const std::string tag = "bootstrap/" + row.design + "/" + row.estimator;
                row.median_mse_y = median(row.mse_y);
                row.median_mse_beta = median(row.mse_beta);
                row.se_mse_y = bootstrap_median_se(row.mse_y, 1000, plan.stream(0, tag + "/mse_y"));
                row.se_mse_beta = bootstrap_median_se(row.mse_beta, 1000, plan.stream(0, tag + "/mse_beta"));
            } else {
                row.mse_y.clear();
                row.mse_beta.clear();
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

std::string format_report_table(const BenchReport& report)
{
    std::string out = fmt::format("{:<10} {:<8} {:>18} {:>18}\n", "design", "method", "median MSE_y (se)",
                                  "median MSE_b (se)");
    for (const auto& r : report.rows) {
        if (!r.applicable) {
            out += fmt::format("{:<10} {:<8} {:>18} {:>18}\n", r.design, r.estimator, "n/a", "n/a");
            continue;
        }
        out += fmt::format("{:<10} {:<8} {:>18} {:>18}\n", r.design, r.estimator,
                           fmt::format("{:.3f} ({:.3f})", r.median_mse_y, r.se_mse_y),
                           fmt::format("{:.3f} ({:.3f})", r.median_mse_beta, r.se_mse_beta));
    }
    out += fmt::format("reps={} seed={} (se: bootstrap standard error of the median)\n", report.reps, report.seed);
    return out;
}

std::string format_report_csv(const BenchReport& report)
{
    std::string out = "design,estimator,median_mse_y,se_mse_y,median_mse_beta,se_mse_beta,reps,seed\n";
    for (const auto& r : report.rows) {
        if (!r.applicable) {
            out += fmt::format("{},{},NA,NA,NA,NA,{},{}\n", r.design, r.estimator, report.reps, report.seed);
            continue;
        }
        out += fmt::format("{},{},{:.10g},{:.10g},{:.10g},{:.10g},{},{}\n", r.design, r.estimator, r.median_mse_y,
                           r.se_mse_y, r.median_mse_beta, r.se_mse_beta, report.reps, report.seed);
    }
    return out;
}

std::string format_report_raw_csv(const BenchReport& report)
{
    std::string out = "design,estimator,rep,mse_y,mse_beta\n";
    for (const auto& r : report.rows) {
        for (std::size_t i = 0; i < r.mse_y.size(); ++i) {
            out += fmt::format("{},{},{},{:.10g},{:.10g}\n", r.design, r.estimator, i, r.mse_y[i], r.mse_beta[i]);
        }
    }
    return out;
}

std::vector<ConsistencyRow> consistency_harness(const SimDesign& design, const std::vector<int>& n_list, int reps,
                                                std::uint64_t seed, double lambda_scale, double d, int threads)
{
    if (n_list.empty()) throw InputError("n_list is empty");
    if (!std::is_sorted(n_list.begin(), n_list.end()) ||
        std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end()) {
        throw InputError("n_list must be strictly increasing");
    }
    if (n_list.front() <= design.p()) throw InputError("every n must exceed the number of predictors");
    if (reps < 1) throw InputError("reps must be at least 1");
    if (!(lambda_scale >= 0.0)) throw InputError("lambda_scale must be >= 0");

    const SeedPlan plan(seed);
    std::vector<ConsistencyRow> out;
    for (int n : n_list) {
        const double lambda = lambda_scale / n;
        std::vector<double> stats(static_cast<std::size_t>(reps));
        detail::parallel_for(stats.size(), threads, [&](std::size_t r) {
            auto rng = plan.engine(r, "consistency/n=" + std::to_string(n));
            const MatrixXd X = draw_covariates(design, n, rng);
            NormalSampler normal;
            VectorXd y = X * design.beta_true;
            for (Index i = 0; i < n; ++i) y(i) += design.sigma * normal(rng);
            const auto ds = standardize(Dataset::from_arrays(X, y));
            const auto fit = fit_llasso(ds, lambda, d);
            const VectorXd beta = to_original_scale(ds, fit.beta);
            stats[r] = std::sqrt(static_cast<double>(n)) * (beta - design.beta_true).norm();
        });
        out.push_back(ConsistencyRow{n, median(stats), lambda});
    }
    return out;
}

} // namespace llasso
