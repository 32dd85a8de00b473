#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <llasso/error.hpp>

namespace llasso {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/**
 * Regression data: covariates, response, and the statistics needed to map a
 * fit on the standardized scale back to the original units.
 *
 * When `standardized` is set, X columns have mean 0 and sample standard
 * deviation 1 (divisor n-1) and y is centered. `x_means`, `x_scales` and
 * `y_mean` then hold the statistics that were removed. For raw data they are
 * zeros / ones / zero.
 */
struct Dataset {
    MatrixXd X;
    VectorXd y;
    std::vector<std::string> column_names;
    bool standardized = false;
    VectorXd x_means;
    VectorXd x_scales;
    double y_mean = 0.0;

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }

    // Builds a raw (unstandardized) dataset after checking shapes and
    // finiteness. Empty `names` yields x1..xp.
    static Dataset from_arrays(MatrixXd X, VectorXd y, std::vector<std::string> names = {});
};

// X'X and X'y of a standardized dataset, plus the pieces needed to evaluate
// least-squares objectives without touching X again.
struct GramCache {
    MatrixXd C;
    VectorXd Xty;
    double yty = 0.0;
    Index n = 0;

    Index p() const { return C.rows(); }
};

/**
 * Reads a header-first, comma-separated numeric file. No quoting, '.' as the
 * decimal point. The response column is removed from X; the remaining column
 * order is preserved.
 */
Dataset load_csv(const std::filesystem::path& path, std::string_view response_column);

// Same parser, reading from an in-memory string. `source` is used in messages.
Dataset parse_csv(std::string_view text, std::string_view response_column,
                  std::string_view source = "<string>");

Dataset standardize(const Dataset& ds);

// Centers and scales `raw` with the statistics recorded in `reference`
// (typically the training split).
Dataset standardize_like(const Dataset& raw, const Dataset& reference);

GramCache gram(const Dataset& ds);

// Coefficients on the original covariate scale: beta_j / x_scales_j.
VectorXd to_original_scale(const Dataset& ds, const VectorXd& beta);

// Intercept for original-scale coefficients: y_mean - x_means' beta_orig.
double original_intercept(const Dataset& ds, const VectorXd& beta);

// y_mean + ((x - x_means) / x_scales) beta for each row of raw covariates.
VectorXd predict(const Dataset& ds, const MatrixXd& X_raw, const VectorXd& beta);

/**
 * Cholesky factorization of a symmetric positive-definite matrix.
 *
 * Throws NumericalError naming the first pivot that is not above
 * `pivot_floor`. The factor is computed from the lower triangle of A.
 */
class Cholesky {
public:
    explicit Cholesky(const MatrixXd& A, double pivot_floor = 0.0);

    VectorXd solve(const VectorXd& b) const;
    MatrixXd solve(const MatrixXd& B) const;
    const MatrixXd& lower() const { return L_; }

private:
    MatrixXd L_;
};

VectorXd solve_spd(const MatrixXd& A, const VectorXd& b);

/**
 * Derives independent child seeds from one master seed. Pure function of its
 * inputs, so workers can share a SeedPlan without synchronization.
 */
class SeedPlan {
public:
    explicit SeedPlan(std::uint64_t master_seed) : master_(master_seed) {}

    std::uint64_t master_seed() const { return master_; }
    std::uint64_t stream(std::uint64_t rep_index, std::string_view purpose_tag) const;
    std::mt19937_64 engine(std::uint64_t rep_index, std::string_view purpose_tag) const {
        return std::mt19937_64(stream(rep_index, purpose_tag));
    }

private:
    std::uint64_t master_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Standard normal draws from a 64-bit engine. Marsaglia polar method so the
// sequence depends only on the engine, not on the standard library vendor.
class NormalSampler {
public:
    double operator()(std::mt19937_64& rng);

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace llasso
