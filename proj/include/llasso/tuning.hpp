#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <llasso/core.hpp>
#include <llasso/estimators.hpp>

namespace llasso {

enum class GridScale { Log, Linear };

// Sorted, strictly increasing, nonempty list of candidate values.
class Grid {
public:
    // Sorts and de-duplicates; throws on empty or non-finite input.
    static Grid from_values(std::vector<double> values, GridScale scale = GridScale::Linear);
    static Grid log_spaced(double lo, double hi, int count);
    static Grid linear(double lo, double hi, double step);

    const std::vector<double>& values() const { return values_; }
    GridScale scale() const { return scale_; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
    GridScale scale_ = GridScale::Linear;
};

// Estimators that are tuned by grid search. GenLLASSO has no default search.
enum class Family { Ols, Ridge, Liu, Lasso, LLasso, ENet };

std::string to_string(Family f);
Family family_from_string(const std::string& name);
std::vector<Family> all_families();

/**
 * Candidate grids for a family. Unset grids take the defaults:
 *   lambda, lambda1: 50 log points from lambda_max down to 1e-4 lambda_max
 *   k:               25 log points in [1e-4, 1e2]
 *   d:               0, 0.01, ..., 1
 *   lambda2:         15 log points in [1e-4, 10]
 * lambda_max is taken from the data the search runs on.
 */
struct TuningGrids {
    std::optional<Grid> lambda;
    std::optional<Grid> lambda2;
    std::optional<Grid> k;
    std::optional<Grid> d;
};

Grid default_lambda_grid(double lambda_max);
Grid default_k_grid();
Grid default_d_grid();
Grid default_lambda2_grid();

// Fills unset grids with defaults computed from `g`.
TuningGrids resolve_grids(const TuningGrids& grids, const GramCache& g);

enum class Criterion { ValidationMse, KFoldCvMse };

struct GridEvaluation {
    PenaltySpec spec;
    double value = 0.0;
};

/**
 * Outcome of a grid search. `chosen` attains the minimum of the recorded
 * criterion values; exact ties go to the stronger regularization (larger
 * lambda, lambda2, k; smaller d).
 */
struct SelectionReport {
    PenaltySpec chosen;
    std::vector<GridEvaluation> criterion_values; // in search order
    Criterion criterion = Criterion::ValidationMse;
    // Training-set coefficients of `chosen` (validation search only).
    VectorXd chosen_beta;
};

/**
 * Fits every candidate of `family` on the training Gram data and reports each
 * coefficient vector through `visit(spec, beta)`. LASSO-type paths run from
 * the largest lambda down with warm starts. Candidates are visited in a fixed
 * order that does not depend on how the grids were supplied.
 */
template <class Visitor>
void for_each_candidate(const GramCache& g, Family family, const TuningGrids& resolved, Visitor&& visit);

// Sorts evaluations strongest-first and returns the first minimum.
std::size_t pick_strongest_minimum(const std::vector<GridEvaluation>& evals);

SelectionReport select_by_validation(const Dataset& train, const Dataset& valid, Family family,
                                     const TuningGrids& grids = {});

struct CvReport {
    SelectionReport selection;
    std::vector<double> per_repeat_mse; // best CV error of each repeat
    double median_mse = 0.0;
    double se_median = 0.0;             // bootstrap SE of the median
};

/**
 * Repeated K-fold cross-validation on raw (unstandardized) data. Each fold is
 * standardized with the statistics of its K-1 training folds; prediction
 * errors are measured on the original response scale. A repeat's MSE is the
 * smallest fold-averaged error over the grid; the reported selection minimizes
 * the error averaged over repeats. Deterministic for a given seed and
 * independent of `threads`.
 */
CvReport kfold_cv(const Dataset& raw, Family family, const TuningGrids& grids, int folds, int repeats,
                  std::uint64_t seed, int threads = 1);

// Nonparametric bootstrap standard error of the median.
double bootstrap_median_se(const std::vector<double>& values, int resamples, std::uint64_t seed);
double median(std::vector<double> values);

struct DChoice {
    double d = 1.0;
    bool used_fallback = false; // closed form had a negative discriminant
};

/**
 * Closed-form biasing parameter:
 *   Q = lambda2^2 (b'b)^2 - lambda2 (b'b) L(beta_enet; lambda1, lambda2),
 *   d = max(0, 1 - sqrt(Q) / (lambda2 b'b)),  b = beta_ols,
 * with L the unnormalized elastic-net loss. Falls back to choose_d_l1(beta_ols,
 * beta_enet) when Q < 0.
 */
DChoice choose_d_closed_form(const VectorXd& beta_ols, const VectorXd& beta_enet, const Dataset& ds,
                             double lambda1, double lambda2);

// argmin over d in [0,1] of ||d * anchor - target||_1 (weighted median of the
// ratios target_j / anchor_j with weights |anchor_j|, lower median on ties).
double choose_d_l1(const VectorXd& beta_anchor, const VectorXd& beta_target);

} // namespace llasso

#include <llasso/detail/candidates.hpp>
