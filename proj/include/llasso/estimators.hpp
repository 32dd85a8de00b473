#pragma once

#include <string>
#include <variant>
#include <vector>

#include <llasso/core.hpp>

namespace llasso {

enum class EstimatorKind { Ols, Ridge, Liu, Lasso, ENet, LLasso, GenLLasso };

std::string to_string(EstimatorKind kind);

/**
 * Estimator identity plus its tuning parameters. Construct through the named
 * factories, which reject out-of-range values:
 *   k >= 0, lambda >= 0, lambda1 >= 0, lambda2 >= 0, d in [0,1], D_j in [0,1].
 * Boundary values are accepted; d = 1 and k = 0 are the reduction cases.
 */
class PenaltySpec {
public:
    static PenaltySpec ols();
    static PenaltySpec ridge(double k);
    static PenaltySpec liu(double d);
    static PenaltySpec lasso(double lambda);
    static PenaltySpec enet(double lambda1, double lambda2);
    static PenaltySpec llasso(double lambda, double d);
    static PenaltySpec gen_llasso(double lambda, VectorXd D);

    EstimatorKind kind() const { return kind_; }
    // lambda for Lasso/LLasso/GenLLasso, lambda1 for ENet.
    double lambda() const { return lambda_; }
    double lambda2() const { return lambda2_; }
    double k() const { return k_; }
    double d() const { return d_; }
    const VectorXd& D() const { return D_; }

    std::string describe() const;

private:
    EstimatorKind kind_ = EstimatorKind::Ols;
    double lambda_ = 0.0;
    double lambda2_ = 0.0;
    double k_ = 0.0;
    double d_ = 1.0;
    VectorXd D_;
};

struct FitResult {
    VectorXd beta;          // standardized scale
    double intercept = 0.0; // y_mean of the training data
    PenaltySpec spec;
    int iterations = 0;     // coordinate sweeps; 0 for closed-form estimators
    bool converged = true;
    // Objective on the 1/n scale, (1/n)||y - X beta||^2 + penalty of the
    // estimator's own criterion, evaluated at `beta`.
    double objective = 0.0;
    // Objective after each coordinate sweep (descent-based fits only).
    std::vector<double> objective_trace;
};

struct CdOptions {
    double tol = 1e-8;
    int max_sweeps = 10000;
};

/**
 * Cyclic coordinate descent for
 *     f(x) = 0.5 x'Ax - b'x + sum_j t_j |x_j|,
 * A symmetric PSD with positive diagonal. Every penalized least-squares fit in
 * this library reduces to this form. Stops when no coordinate moved by more
 * than `tol` in a sweep.
 */
struct CdResult {
    VectorXd x;
    int sweeps = 0;
    bool converged = false;
    std::vector<double> trace; // f after each sweep
};

CdResult minimize_quadratic_l1(const MatrixXd& A, const VectorXd& b, const VectorXd& thresholds,
                               const VectorXd& warm_start, const CdOptions& opts = {});

// Unpenalized OLS and the linear shrinkers. Require a standardized dataset.
FitResult fit_ols(const Dataset& ds);
FitResult fit_ridge(const Dataset& ds, double k);
FitResult fit_liu(const Dataset& ds, double d);
FitResult fit_lasso(const Dataset& ds, double lambda, const CdOptions& opts = {});

struct ENetOptions {
    // Zou-Hastie (1 + lambda2) post-multiplication. Off: naive elastic net.
    bool rescale = false;
    CdOptions cd;
};
FitResult fit_enet(const Dataset& ds, double lambda1, double lambda2, const ENetOptions& opts = {});
FitResult fit_llasso(const Dataset& ds, double lambda, double d, const CdOptions& opts = {});
FitResult fit_gen_llasso(const Dataset& ds, double lambda, const VectorXd& D, const CdOptions& opts = {});

// Dispatches on spec.kind().
FitResult fit(const Dataset& ds, const PenaltySpec& spec, const CdOptions& opts = {});

// Gram-level entry points used by the tuning and simulation code, which reuse
// one GramCache across many parameter values. `y_mean` fills FitResult::intercept.
namespace gram_fit {
FitResult ols(const GramCache& g, double y_mean = 0.0);
FitResult ridge(const GramCache& g, double k, double y_mean = 0.0);
FitResult liu(const GramCache& g, double d, double y_mean = 0.0);
FitResult lasso(const GramCache& g, double lambda, const VectorXd* warm = nullptr,
                const CdOptions& opts = {}, double y_mean = 0.0);
FitResult enet(const GramCache& g, double lambda1, double lambda2, const VectorXd* warm = nullptr,
               const ENetOptions& opts = {}, double y_mean = 0.0);
// Applies F_D = (C + I)^{-1}(C + D) to a LASSO fit. A scalar d is the
// constant-D special case and takes the same arithmetic path.
FitResult llasso_from_lasso(const GramCache& g, const FitResult& lasso_fit, double d);
FitResult gen_llasso_from_lasso(const GramCache& g, const FitResult& lasso_fit, const VectorXd& D);

// (1/n)||y - X beta||^2 + lambda ||beta||_1 from Gram data.
double lasso_objective(const GramCache& g, const VectorXd& beta, double lambda);
// (1/n)||y - X beta||^2 + lambda2 ||beta||^2 + lambda1 ||beta||_1.
double enet_objective(const GramCache& g, const VectorXd& beta, double lambda1, double lambda2);
} // namespace gram_fit

// Largest lambda with a nonzero LASSO solution: (2/n) ||X'y||_inf.
double lambda_max(const GramCache& g);

/**
 * F(d) = (C + I)^{-1}(C + D) for a scalar or per-coordinate biasing parameter.
 * `matrix` is formed explicitly; estimators apply the factor through
 * I - (C + I)^{-1}(I - D) instead.
 */
struct BiasingFactor {
    MatrixXd matrix;
    std::variant<double, VectorXd> d;
};

BiasingFactor liu_factor(const GramCache& g, double d);
BiasingFactor liu_factor(const GramCache& g, const VectorXd& D);
// R(k) = (I + k C^{-1})^{-1} = (C + kI)^{-1} C.
MatrixXd ridge_factor(const GramCache& g, double k);

// Largest singular value by power iteration on M'M.
double spectral_norm(const MatrixXd& M, int max_iter = 1000, double tol = 1e-14);

/**
 * Ridge-type approximation to the penalized problem
 *     ||y - X b||^2 + lambda2 ||d beta_anchor - b||^2 + lambda1 ||b||_1,
 * replacing ||b||_1 by sum_j b_j^2 / |beta_ref_j|:
 *     (C + lambda2 I + lambda1 W^-)^{-1} (X'y + d lambda2 beta_anchor),
 * W = diag(|beta_ref|). Coordinates with |beta_ref_j| <= 1e-10 are removed
 * from the system and returned as 0. The single-anchor overload uses
 * beta_ref for both roles.
 */
VectorXd approx_penalized_closed_form(const Dataset& ds, double lambda1, double lambda2, double d,
                                      const VectorXd& beta_ref, const VectorXd& beta_anchor);
VectorXd approx_penalized_closed_form(const Dataset& ds, double lambda1, double lambda2, double d,
                                      const VectorXd& beta_ref);

inline constexpr double kPseudoInverseThreshold = 1e-10;

// Augmented design for the lambda2 ridge term written as extra rows.
struct AugmentedData {
    VectorXd y_star; // (y', 0')'
    MatrixXd x_star; // (1 + lambda2)^{-1/2} (X', sqrt(lambda2) I)'
};
AugmentedData augment_ridge_rows(const Dataset& ds, double lambda2);

// ||y - X beta||^2 + lambda2 ||d beta_ols - beta||^2 + lambda1 ||beta||_1, no 1/n.
double naive_loss(const Dataset& ds, const VectorXd& beta, double lambda1, double lambda2, double d,
                  const VectorXd& beta_ols);

// ||y - X beta||^2 + lambda1 ||beta||_1 + lambda2 ||beta||^2, no 1/n.
double enet_loss_unnormalized(const Dataset& ds, const VectorXd& beta, double lambda1, double lambda2);

// beta' ((X'X + lambda2 I) / (1 + lambda2)) beta - 2 y'X beta + lambda1 ||d beta_ols - beta||_1
double shifted_l1_objective(const Dataset& ds, const VectorXd& beta, double lambda1, double lambda2, double d,
                       const VectorXd& beta_ols);

/**
 * Sandwich covariance for the augmented LASSO solution `b`:
 *     (C* + W*)^{-1} C* (C* + W*)^{-1} sigma2 / (1 + lambda2),
 *     C* + W* = X*'(I + e e' / (beta_norm1 ||X*'e||_inf)) X*,
 * with e = y* - X* b. Throws NumericalError when X*'e vanishes.
 */
MatrixXd osborne_covariance(const Dataset& ds, double lambda2, const VectorXd& b, double beta_norm1,
                            double sigma2);

} // namespace llasso
