#include <llasso/estimators.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace llasso {
namespace {

void require_range(bool ok, const std::string& what)
{
    if (!ok) throw InputError(what);
}

void require_standardized(const Dataset& ds)
{
    if (!ds.standardized) throw InputError("estimator requires a standardized dataset");
}

double soft_threshold(double z, double t)
{
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

// Rejects C when a Cholesky pivot drops below 1e-12 * trace(C) / p.
Cholesky factor_gram(const GramCache& g)
{
    const double floor = 1e-12 * g.C.trace() / static_cast<double>(g.p());
    try {
        return Cholesky(g.C, floor);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("X'X is singular or nearly singular (") + e.what() + ")");
    }
}

MatrixXd plus_identity(const MatrixXd& C, double s)
{
    MatrixXd A = C;
    A.diagonal().array() += s;
    return A;
}

FitResult closed_form_result(VectorXd beta, const PenaltySpec& spec, double objective, double y_mean)
{
    FitResult r;
    r.beta = std::move(beta);
    r.intercept = y_mean;
    r.spec = spec;
    r.objective = objective;
    return r;
}

double sse(const GramCache& g, const VectorXd& beta)
{
    return g.yty - 2.0 * g.Xty.dot(beta) + beta.dot(g.C * beta);
}

} // namespace

std::string to_string(EstimatorKind kind)
{
    switch (kind) {
    case EstimatorKind::Ols: return "OLS";
    case EstimatorKind::Ridge: return "Ridge";
    case EstimatorKind::Liu: return "Liu";
    case EstimatorKind::Lasso: return "LASSO";
    case EstimatorKind::ENet: return "E-net";
    case EstimatorKind::LLasso: return "LLASSO";
    case EstimatorKind::GenLLasso: return "GenLLASSO";
    }
    return "?";
}

PenaltySpec PenaltySpec::ols()
{
    return PenaltySpec{};
}

PenaltySpec PenaltySpec::ridge(double k)
{
    require_range(std::isfinite(k) && k >= 0.0, "ridge parameter k must be >= 0");
    PenaltySpec s;
    s.kind_ = EstimatorKind::Ridge;
    s.k_ = k;
    return s;
}

PenaltySpec PenaltySpec::liu(double d)
{
    require_range(d >= 0.0 && d <= 1.0, "biasing parameter d must lie in [0, 1]");
    PenaltySpec s;
    s.kind_ = EstimatorKind::Liu;
    s.d_ = d;
    return s;
}

PenaltySpec PenaltySpec::lasso(double lambda)
{
    require_range(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    PenaltySpec s;
    s.kind_ = EstimatorKind::Lasso;
    s.lambda_ = lambda;
    return s;
}

PenaltySpec PenaltySpec::enet(double lambda1, double lambda2)
{
    require_range(std::isfinite(lambda1) && lambda1 >= 0.0, "lambda1 must be >= 0");
    require_range(std::isfinite(lambda2) && lambda2 >= 0.0, "lambda2 must be >= 0");
    PenaltySpec s;
    s.kind_ = EstimatorKind::ENet;
    s.lambda_ = lambda1;
    s.lambda2_ = lambda2;
    return s;
}

PenaltySpec PenaltySpec::llasso(double lambda, double d)
{
    require_range(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    require_range(d >= 0.0 && d <= 1.0, "biasing parameter d must lie in [0, 1]");
    PenaltySpec s;
    s.kind_ = EstimatorKind::LLasso;
    s.lambda_ = lambda;
    s.d_ = d;
    return s;
}

PenaltySpec PenaltySpec::gen_llasso(double lambda, VectorXd D)
{
    require_range(std::isfinite(lambda) && lambda >= 0.0, "lambda must be >= 0");
    require_range(D.size() > 0 && (D.array() >= 0.0).all() && (D.array() <= 1.0).all(),
                  "every biasing parameter D_j must lie in [0, 1]");
    PenaltySpec s;
    s.kind_ = EstimatorKind::GenLLasso;
    s.lambda_ = lambda;
    s.D_ = std::move(D);
    return s;
}

std::string PenaltySpec::describe() const
{
    std::ostringstream os;
    os.precision(6);
    os << to_string(kind_);
    switch (kind_) {
    case EstimatorKind::Ols: break;
    case EstimatorKind::Ridge: os << "(k=" << k_ << ")"; break;
    case EstimatorKind::Liu: os << "(d=" << d_ << ")"; break;
    case EstimatorKind::Lasso: os << "(lambda=" << lambda_ << ")"; break;
    case EstimatorKind::ENet: os << "(lambda1=" << lambda_ << ", lambda2=" << lambda2_ << ")"; break;
    case EstimatorKind::LLasso: os << "(lambda=" << lambda_ << ", d=" << d_ << ")"; break;
    case EstimatorKind::GenLLasso: os << "(lambda=" << lambda_ << ", D[" << D_.size() << "])"; break;
    }
    return os.str();
}

CdResult minimize_quadratic_l1(const MatrixXd& A, const VectorXd& b, const VectorXd& thresholds,
                               const VectorXd& warm_start, const CdOptions& opts)
{
    const Index p = A.rows();
    if (A.cols() != p || b.size() != p || thresholds.size() != p || warm_start.size() != p) {
        throw InputError("coordinate descent: inconsistent problem dimensions");
    }
    if ((A.diagonal().array() <= 0.0).any()) {
        throw NumericalError("coordinate descent: non-positive diagonal entry");
    }

    CdResult res;
    res.x = warm_start;
    VectorXd r = b - A * res.x; // r = b - A x, the negative gradient of the smooth part

    auto objective = [&] {
        return -0.5 * res.x.dot(b + r) + thresholds.dot(res.x.cwiseAbs());
    };

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double ajj = A(j, j);
            const double old = res.x(j);
            const double z = r(j) + ajj * old;
            const double updated = soft_threshold(z, thresholds(j)) / ajj;
            const double delta = updated - old;
            if (delta != 0.0) {
                res.x(j) = updated;
                r.noalias() -= A.col(j) * delta;
                max_change = std::max(max_change, std::abs(delta));
            }
        }
        res.sweeps = sweep + 1;
        res.trace.push_back(objective());
        if (max_change < opts.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

namespace gram_fit {

double lasso_objective(const GramCache& g, const VectorXd& beta, double lambda)
{
    return sse(g, beta) / static_cast<double>(g.n) + lambda * beta.lpNorm<1>();
}

double enet_objective(const GramCache& g, const VectorXd& beta, double lambda1, double lambda2)
{
    return sse(g, beta) / static_cast<double>(g.n) + lambda2 * beta.squaredNorm() +
           lambda1 * beta.lpNorm<1>();
}

FitResult ols(const GramCache& g, double y_mean)
{
    VectorXd beta = factor_gram(g).solve(g.Xty);
    const double obj = sse(g, beta) / static_cast<double>(g.n);
    return closed_form_result(std::move(beta), PenaltySpec::ols(), obj, y_mean);
}

FitResult ridge(const GramCache& g, double k, double y_mean)
{
    auto spec = PenaltySpec::ridge(k);
    if (k == 0.0) {
        auto r = ols(g, y_mean);
        r.spec = spec;
        return r;
    }
    VectorXd beta = Cholesky(plus_identity(g.C, k)).solve(g.Xty);
    const double obj = sse(g, beta) / static_cast<double>(g.n) + k * beta.squaredNorm() / static_cast<double>(g.n);
    return closed_form_result(std::move(beta), spec, obj, y_mean);
}

FitResult liu(const GramCache& g, double d, double y_mean)
{
    auto spec = PenaltySpec::liu(d);
    VectorXd beta = factor_gram(g).solve(g.Xty);
    // F(d) b = b - (C + I)^{-1} (1 - d) b
    VectorXd shrink = Cholesky(plus_identity(g.C, 1.0)).solve(VectorXd((1.0 - d) * beta));
    beta -= shrink;
    const double obj = sse(g, beta) / static_cast<double>(g.n);
    return closed_form_result(std::move(beta), spec, obj, y_mean);
}

FitResult lasso(const GramCache& g, double lambda, const VectorXd* warm, const CdOptions& opts, double y_mean)
{
    auto spec = PenaltySpec::lasso(lambda);
    const Index p = g.p();
    const double n = static_cast<double>(g.n);
    VectorXd thresholds = VectorXd::Constant(p, 0.5 * n * lambda);
    auto cd = minimize_quadratic_l1(g.C, g.Xty, thresholds, warm ? *warm : VectorXd::Zero(p), opts);

    FitResult r;
    r.spec = spec;
    r.intercept = y_mean;
    r.iterations = cd.sweeps;
    r.converged = cd.converged;
    r.objective_trace.reserve(cd.trace.size());
    for (double f : cd.trace) r.objective_trace.push_back((2.0 * f + g.yty) / n);
    r.beta = std::move(cd.x);
    r.objective = lasso_objective(g, r.beta, lambda);
    return r;
}

FitResult enet(const GramCache& g, double lambda1, double lambda2, const VectorXd* warm,
               const ENetOptions& opts, double y_mean)
{
    auto spec = PenaltySpec::enet(lambda1, lambda2);
    const Index p = g.p();
    const double n = static_cast<double>(g.n);
    VectorXd thresholds = VectorXd::Constant(p, 0.5 * n * lambda1);
    auto cd = minimize_quadratic_l1(plus_identity(g.C, n * lambda2), g.Xty, thresholds,
                                    warm ? *warm : VectorXd::Zero(p), opts.cd);

    FitResult r;
    r.spec = spec;
    r.intercept = y_mean;
    r.iterations = cd.sweeps;
    r.converged = cd.converged;
    for (double f : cd.trace) r.objective_trace.push_back((2.0 * f + g.yty) / n);
    r.beta = std::move(cd.x);
    r.objective = enet_objective(g, r.beta, lambda1, lambda2);
    if (opts.rescale) r.beta *= 1.0 + lambda2;
    return r;
}

FitResult gen_llasso_from_lasso(const GramCache& g, const FitResult& lasso_fit, const VectorXd& D)
{
    if (D.size() != g.p()) throw InputError("biasing vector D has wrong length");
    auto spec = PenaltySpec::gen_llasso(lasso_fit.spec.lambda(), D);
    FitResult r = lasso_fit;
    // F_D b = (C + I)^{-1}(C + D) b = b - (C + I)^{-1} (I - D) b
    VectorXd shrink = Cholesky(plus_identity(g.C, 1.0))
                          .solve(VectorXd((1.0 - D.array()).matrix().cwiseProduct(lasso_fit.beta)));
    r.beta = lasso_fit.beta - shrink;
    r.spec = spec;
    r.objective = lasso_objective(g, r.beta, spec.lambda());
    return r;
}

FitResult llasso_from_lasso(const GramCache& g, const FitResult& lasso_fit, double d)
{
    auto spec = PenaltySpec::llasso(lasso_fit.spec.lambda(), d);
    FitResult r = gen_llasso_from_lasso(g, lasso_fit, VectorXd::Constant(g.p(), d));
    r.spec = spec;
    return r;
}

} // namespace gram_fit

double lambda_max(const GramCache& g)
{
    return 2.0 / static_cast<double>(g.n) * g.Xty.lpNorm<Eigen::Infinity>();
}

FitResult fit_ols(const Dataset& ds)
{
    require_standardized(ds);
    return gram_fit::ols(gram(ds), ds.y_mean);
}

FitResult fit_ridge(const Dataset& ds, double k)
{
    require_standardized(ds);
    return gram_fit::ridge(gram(ds), k, ds.y_mean);
}

FitResult fit_liu(const Dataset& ds, double d)
{
    require_standardized(ds);
    return gram_fit::liu(gram(ds), d, ds.y_mean);
}

FitResult fit_lasso(const Dataset& ds, double lambda, const CdOptions& opts)
{
    require_standardized(ds);
    return gram_fit::lasso(gram(ds), lambda, nullptr, opts, ds.y_mean);
}

FitResult fit_enet(const Dataset& ds, double lambda1, double lambda2, const ENetOptions& opts)
{
    require_standardized(ds);
    return gram_fit::enet(gram(ds), lambda1, lambda2, nullptr, opts, ds.y_mean);
}

FitResult fit_llasso(const Dataset& ds, double lambda, double d, const CdOptions& opts)
{
    require_standardized(ds);
    PenaltySpec::llasso(lambda, d);
    const auto g = gram(ds);
    return gram_fit::llasso_from_lasso(g, gram_fit::lasso(g, lambda, nullptr, opts, ds.y_mean), d);
}

FitResult fit_gen_llasso(const Dataset& ds, double lambda, const VectorXd& D, const CdOptions& opts)
{
    require_standardized(ds);
    PenaltySpec::gen_llasso(lambda, D);
    const auto g = gram(ds);
    return gram_fit::gen_llasso_from_lasso(g, gram_fit::lasso(g, lambda, nullptr, opts, ds.y_mean), D);
}

FitResult fit(const Dataset& ds, const PenaltySpec& spec, const CdOptions& opts)
{
    switch (spec.kind()) {
    case EstimatorKind::Ols: return fit_ols(ds);
    case EstimatorKind::Ridge: return fit_ridge(ds, spec.k());
    case EstimatorKind::Liu: return fit_liu(ds, spec.d());
    case EstimatorKind::Lasso: return fit_lasso(ds, spec.lambda(), opts);
    case EstimatorKind::ENet: return fit_enet(ds, spec.lambda(), spec.lambda2(), ENetOptions{false, opts});
    case EstimatorKind::LLasso: return fit_llasso(ds, spec.lambda(), spec.d(), opts);
    case EstimatorKind::GenLLasso: return fit_gen_llasso(ds, spec.lambda(), spec.D(), opts);
    }
    throw InputError("unknown estimator");
}

BiasingFactor liu_factor(const GramCache& g, const VectorXd& D)
{
    if (D.size() != g.p()) throw InputError("biasing vector D has wrong length");
    MatrixXd rhs = g.C;
    rhs.diagonal() += D;
    return BiasingFactor{Cholesky(plus_identity(g.C, 1.0)).solve(rhs), D};
}

BiasingFactor liu_factor(const GramCache& g, double d)
{
    require_range(d >= 0.0 && d <= 1.0, "biasing parameter d must lie in [0, 1]");
    auto f = liu_factor(g, VectorXd::Constant(g.p(), d));
    f.d = d;
    return f;
}

MatrixXd ridge_factor(const GramCache& g, double k)
{
    require_range(k >= 0.0, "ridge parameter k must be >= 0");
    return Cholesky(plus_identity(g.C, k)).solve(g.C);
}

double spectral_norm(const MatrixXd& M, int max_iter, double tol)
{
    if (M.size() == 0) return 0.0;
    const MatrixXd MtM = M.transpose() * M;
    VectorXd v = VectorXd::Ones(M.cols()).normalized();
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        VectorXd w = MtM * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        if (std::abs(norm - estimate) <= tol * norm) {
            estimate = norm;
            break;
        }
        estimate = norm;
    }
    return std::sqrt(estimate);
}

VectorXd approx_penalized_closed_form(const Dataset& ds, double lambda1, double lambda2, double d,
                                      const VectorXd& beta_ref, const VectorXd& beta_anchor)
{
    require_standardized(ds);
    const Index p = ds.p();
    if (beta_ref.size() != p || beta_anchor.size() != p) throw InputError("reference vector has wrong length");
    if (!beta_ref.allFinite() || !beta_anchor.allFinite()) throw InputError("reference vector is not finite");
    require_range(lambda1 >= 0.0 && lambda2 >= 0.0, "lambda1 and lambda2 must be >= 0");

    const auto g = gram(ds);
    std::vector<Index> active;
    for (Index j = 0; j < p; ++j) {
        if (std::abs(beta_ref(j)) > kPseudoInverseThreshold) active.push_back(j);
    }
    VectorXd out = VectorXd::Zero(p);
    if (active.empty()) return out;

    const Index m = static_cast<Index>(active.size());
    MatrixXd A(m, m);
    VectorXd rhs(m);
    for (Index a = 0; a < m; ++a) {
        const Index j = active[static_cast<std::size_t>(a)];
        for (Index b = 0; b < m; ++b) A(a, b) = g.C(j, active[static_cast<std::size_t>(b)]);
        A(a, a) += lambda2 + lambda1 / std::abs(beta_ref(j));
        rhs(a) = g.Xty(j) + d * lambda2 * beta_anchor(j);
    }
    VectorXd x;
    try {
        x = Cholesky(A, 1e-12 * A.trace() / static_cast<double>(m)).solve(rhs);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("augmented system is singular (") + e.what() + ")");
    }
    for (Index a = 0; a < m; ++a) out(active[static_cast<std::size_t>(a)]) = x(a);
    return out;
}

VectorXd approx_penalized_closed_form(const Dataset& ds, double lambda1, double lambda2, double d,
                                      const VectorXd& beta_ref)
{
    return approx_penalized_closed_form(ds, lambda1, lambda2, d, beta_ref, beta_ref);
}

AugmentedData augment_ridge_rows(const Dataset& ds, double lambda2)
{
    require_range(std::isfinite(lambda2) && lambda2 >= 0.0, "lambda2 must be >= 0");
    const Index n = ds.n();
    const Index p = ds.p();
    const double scale = 1.0 / std::sqrt(1.0 + lambda2);
    AugmentedData out;
    out.y_star = VectorXd::Zero(n + p);
    out.y_star.head(n) = ds.y;
    out.x_star = MatrixXd::Zero(n + p, p);
    out.x_star.topRows(n) = scale * ds.X;
    out.x_star.bottomRows(p).diagonal().setConstant(scale * std::sqrt(lambda2));
    return out;
}

double naive_loss(const Dataset& ds, const VectorXd& beta, double lambda1, double lambda2, double d,
                  const VectorXd& beta_ols)
{
    return (ds.y - ds.X * beta).squaredNorm() + lambda2 * (d * beta_ols - beta).squaredNorm() +
           lambda1 * beta.lpNorm<1>();
}

double enet_loss_unnormalized(const Dataset& ds, const VectorXd& beta, double lambda1, double lambda2)
{
    return (ds.y - ds.X * beta).squaredNorm() + lambda1 * beta.lpNorm<1>() + lambda2 * beta.squaredNorm();
}

double shifted_l1_objective(const Dataset& ds, const VectorXd& beta, double lambda1, double lambda2, double d,
                       const VectorXd& beta_ols)
{
    const VectorXd Xb = ds.X * beta;
    const double quad = (Xb.squaredNorm() + lambda2 * beta.squaredNorm()) / (1.0 + lambda2);
    return quad - 2.0 * ds.y.dot(Xb) + lambda1 * (d * beta_ols - beta).lpNorm<1>();
}

MatrixXd osborne_covariance(const Dataset& ds, double lambda2, const VectorXd& b, double beta_norm1,
                            double sigma2)
{
    if (b.size() != ds.p()) throw InputError("coefficient vector has wrong length");
    require_range(beta_norm1 > 0.0, "beta_norm1 must be > 0");
    require_range(sigma2 >= 0.0, "sigma2 must be >= 0");
    const auto aug = augment_ridge_rows(ds, lambda2);
    const VectorXd e = aug.y_star - aug.x_star * b;
    const VectorXd xte = aug.x_star.transpose() * e;
    const double xte_inf = xte.lpNorm<Eigen::Infinity>();
    if (!(xte_inf > 1e-12)) throw NumericalError("covariance undefined at interpolating fit");

    const MatrixXd c_star = aug.x_star.transpose() * aug.x_star;
    MatrixXd m = c_star + xte * xte.transpose() / (beta_norm1 * xte_inf);
    const Cholesky chol(m);
    const MatrixXd left = chol.solve(c_star);               // M^{-1} C*
    MatrixXd cov = chol.solve(MatrixXd(left.transpose()));  // M^{-1} C* M^{-1}
    cov = 0.5 * (cov + cov.transpose()).eval();
    return cov * (sigma2 / (1.0 + lambda2));
}

} // namespace llasso
