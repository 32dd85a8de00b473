#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <llasso/core.hpp>
#include <llasso/tuning.hpp>

namespace llasso {

// Sigma_ij = rho^|i-j|.
struct Ar1Covariance {
    double rho = 0.0;
};

// Each listed group shares one N(0,1) factor: x_i = Z_g + e_i with
// Var(e_i) = idiosyncratic_variance. Remaining predictors are i.i.d. N(0,1).
struct GroupedFactors {
    std::vector<int> group_sizes;
    double idiosyncratic_variance = 0.01;
};

struct SimDesign {
    std::string name;
    int n_train = 0;
    int n_valid = 0;
    int n_test = 0;
    VectorXd beta_true;
    double sigma = 1.0;
    std::variant<Ar1Covariance, GroupedFactors> covariance;

    Index p() const { return beta_true.size(); }
    // Throws InputError if dimensions or parameters are inconsistent.
    void validate() const;
};

// The five simulation designs, k in 1..5.
SimDesign design_example(int k);

struct SplitData {
    Dataset train; // standardized with its own statistics
    Dataset valid; // standardized with training statistics
    Dataset test;  // standardized with training statistics
    MatrixXd x_test_raw;
    VectorXd signal_test; // x_i' beta_true for each test row
};

// Draws `rows` covariate vectors from the design's covariance.
MatrixXd draw_covariates(const SimDesign& design, Index rows, std::mt19937_64& rng);

// One data set: training, validation and test blocks drawn in that order from
// a single stream seeded by `seed`.
SplitData generate(const SimDesign& design, std::uint64_t seed);

// (1/n_test) sum_i (x_i'beta - (ybar_train + (x_i - xbar_train)' beta_hat))^2
// with beta_hat on the original covariate scale.
double mse_y(const MatrixXd& x_test_raw, const VectorXd& signal_test, const VectorXd& beta_hat,
             const VectorXd& x_mean_train, double y_mean_train);

double mse_beta(const VectorXd& beta_hat, const VectorXd& beta_true);

struct BenchEstimator {
    Family family;
    TuningGrids grids;     // unset entries use the tuning defaults
    std::string label;     // defaults to the family name
};

std::vector<BenchEstimator> default_estimators();

struct BenchRow {
    std::string design;
    std::string estimator;
    bool applicable = true; // false when e.g. OLS meets p >= n_train
    std::vector<double> mse_y;    // one per replication, in replication order
    std::vector<double> mse_beta;
    double median_mse_y = 0.0;
    double se_mse_y = 0.0;
    double median_mse_beta = 0.0;
    double se_mse_beta = 0.0;
};

struct BenchReport {
    std::uint64_t seed = 0;
    int reps = 0;
    std::vector<BenchRow> rows; // design-major, estimator order as requested

    const BenchRow* find(const std::string& design, const std::string& estimator) const;
};

/**
 * Per replication: generate a data set, pick tuning parameters on the
 * validation block, evaluate the selected fit on the test block. Replication r
 * of design `name` draws from SeedPlan(seed).stream(r, "generate/" + name).
 * Output is identical for every thread count.
 */
BenchReport run_benchmark(const std::vector<SimDesign>& designs, const std::vector<BenchEstimator>& estimators,
                          int reps, std::uint64_t seed, int threads = 1);

// Aligned text table (for people) and the stable CSV schema:
// design,estimator,median_mse_y,se_mse_y,median_mse_beta,se_mse_beta,reps,seed
std::string format_report_table(const BenchReport& report);
std::string format_report_csv(const BenchReport& report);
// Long format with every replication: design,estimator,rep,mse_y,mse_beta
std::string format_report_raw_csv(const BenchReport& report);

struct ConsistencyRow {
    int n = 0;
    double median_scaled_error = 0.0; // median sqrt(n) ||beta_hat - beta||_2
    double lambda = 0.0;
};

/**
 * Empirical root-n check: for each training size n, fits LLASSO with
 * lambda = lambda_scale / n and fixed d on `reps` fresh data sets and reports
 * the median of sqrt(n) ||beta_hat - beta||_2 (original covariate scale).
 */
std::vector<ConsistencyRow> consistency_harness(const SimDesign& design, const std::vector<int>& n_list, int reps,
                                                std::uint64_t seed, double lambda_scale = 10.0, double d = 0.5,
                                                int threads = 1);

} // namespace llasso
