#pragma once

#include <cstdint>

#include <llasso/core.hpp>

namespace llasso {

// Standard normal cdf / density. The cdf goes through erfc so both tails keep
// full relative accuracy.
double normal_cdf(double x);
double normal_pdf(double x);

/**
 * Orthonormal-design setting: standardized means Delta_j = beta_j / sigma,
 * threshold lambda_o (half the LASSO lambda), biasing parameter d and the
 * derived scale c_d = (1 + d) / 2. `delta_bound` parameterizes the risk bound
 * with lambda = 2 sigma sqrt(2 log(1/delta_bound)).
 */
class OrthoConfig {
public:
    OrthoConfig(VectorXd delta, double lambda_o, double d, double sigma = 1.0, double delta_bound = 0.5);

    const VectorXd& delta() const { return delta_; }
    double lambda_o() const { return lambda_o_; }
    double d() const { return d_; }
    double c_d() const { return c_d_; }
    double sigma() const { return sigma_; }
    double delta_bound() const { return delta_bound_; }
    Index p() const { return delta_.size(); }

private:
    VectorXd delta_;
    double lambda_o_;
    double d_;
    double c_d_;
    double sigma_;
    double delta_bound_;
};

// c_d * sgn(z_j) (|z_j| - threshold)^+, c_d = (1 + d) / 2.
VectorXd normalized_lasso(const VectorXd& z, double threshold, double d);

// Closed-form risk summed over coordinates:
//   c_d^2 sum_j { 1 + l^2 + (D^2 - 1 - l^2)[Phi(l - D) - Phi(-l - D)]
//                 - (l - D) phi(l + D) - (l + D) phi(l - D) },  l = lambda_o.
double risk_closed_form(const OrthoConfig& cfg);

struct McEstimate {
    double estimate = 0.0;
    double mc_se = 0.0;
};

/**
 * Monte Carlo risk: Z_j ~ N(Delta_j, 1), estimator normalized_lasso(Z,
 * lambda_o, d), loss sum_j (est_j - Delta_j)^2. Draws are split into fixed
 * chunks with their own child seeds, so results do not depend on `threads`.
 */
McEstimate mc_risk(const OrthoConfig& cfg, std::int64_t n_draws, std::uint64_t seed, int threads = 1);

// Threshold lambda = 2 sigma sqrt(2 log(1/delta_bound)) used by the bound.
double bound_lambda(const OrthoConfig& cfg);

// Per-coordinate upper bound on E[(beta_hat_j(d) - Delta_j)^2]:
//   s^2 c^2 (1 + 2 log(1/delta)) [delta + min(D^2, 1)] + (s c - 1)^2 D^2
//   - 2 s c (s c - 1) D t [Phi(t - D) - Phi(t + D)],   t = lambda / (2 s).
VectorXd mse_bound(const OrthoConfig& cfg);

struct McVector {
    VectorXd estimate;
    VectorXd mc_se;
};

// Per-coordinate Monte Carlo MSE of sigma c_d sgn(Z)(|Z| - lambda/(2 sigma))^+
// around Delta_j, Z ~ N(Delta_j, 1), at the bound's lambda.
McVector mc_bound_mse(const OrthoConfig& cfg, std::int64_t n_draws, std::uint64_t seed, int threads = 1);

} // namespace llasso
