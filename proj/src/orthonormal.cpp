#include <llasso/orthonormal.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "parallel.hpp"

namespace llasso {
namespace {

constexpr int kMcChunks = 64;

double soft(double z, double t)
{
    const double a = std::abs(z) - t;
    return a > 0.0 ? std::copysign(a, z) : 0.0;
}

// Welford accumulator; merged in chunk order so the result is schedule-free.
struct Moments {
    std::int64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x)
    {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& o)
    {
        if (o.count == 0) return;
        const auto total = count + o.count;
        const double delta = o.mean - mean;
        mean += delta * static_cast<double>(o.count) / static_cast<double>(total);
        m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) /
                         static_cast<double>(total);
        count = total;
    }

    double se() const
    {
        return count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
    }
};

// Simulates `n_draws` loss vectors. `loss(z_row, out)` fills one value per
// output column from one draw of Z ~ N(Delta, I).
template <class Loss>
std::vector<Moments> simulate(const VectorXd& delta, std::size_t outputs, std::int64_t n_draws, std::uint64_t seed,
                              int threads, Loss&& loss)
{
    const SeedPlan plan(seed);
    std::vector<std::vector<Moments>> chunks(kMcChunks, std::vector<Moments>(outputs));
    detail::parallel_for(kMcChunks, threads, [&](std::size_t c) {
        auto rng = plan.engine(c, "mc-chunk");
        NormalSampler normal;
        const std::int64_t begin = n_draws * static_cast<std::int64_t>(c) / kMcChunks;
        const std::int64_t end = n_draws * static_cast<std::int64_t>(c + 1) / kMcChunks;
        VectorXd z(delta.size());
        std::vector<double> values(outputs);
        for (std::int64_t i = begin; i < end; ++i) {
            for (Index j = 0; j < delta.size(); ++j) z(j) = delta(j) + normal(rng);
            loss(z, values);
            for (std::size_t k = 0; k < outputs; ++k) chunks[c][k].add(values[k]);
        }
    });
    std::vector<Moments> total(outputs);
    for (const auto& chunk : chunks) {
        for (std::size_t k = 0; k < outputs; ++k) total[k].merge(chunk[k]);
    }
    return total;
}

} // namespace

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_pdf(double x)
{
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

OrthoConfig::OrthoConfig(VectorXd delta, double lambda_o, double d, double sigma, double delta_bound)
    : delta_(std::move(delta)), lambda_o_(lambda_o), d_(d), c_d_((1.0 + d) / 2.0), sigma_(sigma),
      delta_bound_(delta_bound)
{
    if (delta_.size() == 0 || !delta_.allFinite()) throw InputError("Delta must be a nonempty finite vector");
    if (!(lambda_o >= 0.0) || !std::isfinite(lambda_o)) throw InputError("lambda_o must be >= 0");
    if (!(d >= 0.0 && d <= 1.0)) throw InputError("biasing parameter d must lie in [0, 1]");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be > 0");
    if (!(delta_bound > 0.0 && delta_bound <= 0.5)) throw InputError("delta must lie in (0, 1/2]");
}

VectorXd normalized_lasso(const VectorXd& z, double threshold, double d)
{
    if (!(threshold >= 0.0)) throw InputError("threshold must be >= 0");
    if (!(d >= 0.0 && d <= 1.0)) throw InputError("biasing parameter d must lie in [0, 1]");
    const double c = (1.0 + d) / 2.0;
    return z.unaryExpr([&](double v) { return c * soft(v, threshold); });
}

double risk_closed_form(const OrthoConfig& cfg)
{
    const double l = cfg.lambda_o();
    double sum = 0.0;
    for (Index j = 0; j < cfg.p(); ++j) {
        const double D = cfg.delta()(j);
        sum += 1.0 + l * l + (D * D - 1.0 - l * l) * (normal_cdf(l - D) - normal_cdf(-l - D)) -
               (l - D) * normal_pdf(l + D) - (l + D) * normal_pdf(l - D);
    }
    return cfg.c_d() * cfg.c_d() * sum;
}

McEstimate mc_risk(const OrthoConfig& cfg, std::int64_t n_draws, std::uint64_t seed, int threads)
{
    if (n_draws < 10000) throw InputError("mc_risk needs at least 1e4 draws");
    const double c = cfg.c_d();
    const double t = cfg.lambda_o();
    const auto& delta = cfg.delta();
    auto m = simulate(delta, 1, n_draws, seed, threads, [&](const VectorXd& z, std::vector<double>& out) {
        double loss = 0.0;
        for (Index j = 0; j < z.size(); ++j) {
            const double e = c * soft(z(j), t) - delta(j);
            loss += e * e;
        }
        out[0] = loss;
    });
    return McEstimate{m[0].mean, m[0].se()};
}

double bound_lambda(const OrthoConfig& cfg)
{
    return 2.0 * cfg.sigma() * std::sqrt(2.0 * std::log(1.0 / cfg.delta_bound()));
}

VectorXd mse_bound(const OrthoConfig& cfg)
{
    const double s = cfg.sigma();
    const double c = cfg.c_d();
    const double db = cfg.delta_bound();
    const double t = bound_lambda(cfg) / (2.0 * s);
    const double log_term = 1.0 + 2.0 * std::log(1.0 / db);
    VectorXd out(cfg.p());
    for (Index j = 0; j < cfg.p(); ++j) {
        const double D = cfg.delta()(j);
        out(j) = s * s * c * c * log_term * (db + std::min(D * D, 1.0)) + (s * c - 1.0) * (s * c - 1.0) * D * D -
                 2.0 * s * c * (s * c - 1.0) * D * t * (normal_cdf(t - D) - normal_cdf(t + D));
    }
    return out;
}

McVector mc_bound_mse(const OrthoConfig& cfg, std::int64_t n_draws, std::uint64_t seed, int threads)
{
    if (n_draws < 10000) throw InputError("mc_bound_mse needs at least 1e4 draws");
    const double scale = cfg.sigma() * cfg.c_d();
    const double t = bound_lambda(cfg) / (2.0 * cfg.sigma());
    const auto& delta = cfg.delta();
    auto m = simulate(delta, static_cast<std::size_t>(delta.size()), n_draws, seed, threads,
                      [&](const VectorXd& z, std::vector<double>& out) {
                          for (Index j = 0; j < z.size(); ++j) {
                              const double e = scale * soft(z(j), t) - delta(j);
                              out[static_cast<std::size_t>(j)] = e * e;
                          }
                      });
    McVector r{VectorXd(delta.size()), VectorXd(delta.size())};
    for (Index j = 0; j < delta.size(); ++j) {
        r.estimate(j) = m[static_cast<std::size_t>(j)].mean;
        r.mc_se(j) = m[static_cast<std::size_t>(j)].se();
    }
    return r;
}

} // namespace llasso
