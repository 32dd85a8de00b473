#include <llasso/tuning.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <numeric>
#include <tuple>

#include "parallel.hpp"

namespace llasso {

Grid Grid::from_values(std::vector<double> values, GridScale scale)
{
    if (values.empty()) throw InputError("grid is empty");
    for (double v : values) {
        if (!std::isfinite(v)) throw InputError("grid contains a non-finite value");
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    Grid g;
    g.values_ = std::move(values);
    g.scale_ = scale;
    return g;
}

Grid Grid::log_spaced(double lo, double hi, int count)
{
    if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw InputError("invalid log grid bounds");
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = hi;
    } else {
        const double a = std::log(lo);
        const double b = std::log(hi);
        for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
        v.front() = lo;
        v.back() = hi;
    }
    return from_values(std::move(v), GridScale::Log);
}

Grid Grid::linear(double lo, double hi, double step)
{
    if (!(step > 0.0) || !(hi >= lo)) throw InputError("invalid linear grid bounds");
    const double span = hi - lo;
    const double ratio = span / step;
    const auto intervals = static_cast<long>(std::floor(ratio + 1e-9));
    // When the step divides the span, compute lo + span * i / m so the last
    // point is exactly hi (0, 0.01, ..., 1 ends at 1.0).
    const bool divides = std::abs(ratio - std::round(ratio)) < 1e-9;
    std::vector<double> v;
    for (long i = 0; i <= intervals; ++i) {
        if (intervals == 0) {
            v.push_back(lo);
        } else if (divides) {
            v.push_back(lo + span * static_cast<double>(i) / static_cast<double>(intervals));
        } else {
            v.push_back(lo + static_cast<double>(i) * step);
        }
    }
    return from_values(std::move(v), GridScale::Linear);
}

std::string to_string(Family f)
{
    switch (f) {
    case Family::Ols: return "OLS";
    case Family::Ridge: return "Ridge";
    case Family::Liu: return "Liu";
    case Family::Lasso: return "LASSO";
    case Family::LLasso: return "LLASSO";
    case Family::ENet: return "E-net";
    }
    return "?";
}

Family family_from_string(const std::string& name)
{
    std::string s;
    for (char c : name) {
        if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (s == "ols") return Family::Ols;
    if (s == "ridge") return Family::Ridge;
    if (s == "liu") return Family::Liu;
    if (s == "lasso") return Family::Lasso;
    if (s == "llasso") return Family::LLasso;
    if (s == "enet") return Family::ENet;
    throw InputError("unknown estimator '" + name + "'");
}

std::vector<Family> all_families()
{
    return {Family::Ols, Family::Ridge, Family::Liu, Family::Lasso, Family::LLasso, Family::ENet};
}

Grid default_lambda_grid(double lmax)
{
    if (!(lmax > 0.0)) throw InputError("lambda_max is zero: response is orthogonal to all predictors");
    return Grid::log_spaced(1e-4 * lmax, lmax, 50);
}

Grid default_k_grid() { return Grid::log_spaced(1e-4, 1e2, 25); }
Grid default_d_grid() { return Grid::linear(0.0, 1.0, 0.01); }
Grid default_lambda2_grid() { return Grid::log_spaced(1e-4, 10.0, 15); }

TuningGrids resolve_grids(const TuningGrids& grids, const GramCache& g)
{
    TuningGrids out = grids;
    if (!out.lambda) out.lambda = default_lambda_grid(lambda_max(g));
    if (!out.lambda2) out.lambda2 = default_lambda2_grid();
    if (!out.k) out.k = default_k_grid();
    if (!out.d) out.d = default_d_grid();
    for (double v : out.lambda->values()) {
        if (v < 0.0) throw InputError("lambda grid has negative values");
    }
    for (double v : out.lambda2->values()) {
        if (v < 0.0) throw InputError("lambda2 grid has negative values");
    }
    for (double v : out.k->values()) {
        if (v < 0.0) throw InputError("k grid has negative values");
    }
    for (double v : out.d->values()) {
        if (v < 0.0 || v > 1.0) throw InputError("d grid values must lie in [0, 1]");
    }
    return out;
}

std::size_t pick_strongest_minimum(const std::vector<GridEvaluation>& evals)
{
    if (evals.empty()) throw InputError("no grid evaluations");
    std::vector<std::size_t> order(evals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto key = [&](std::size_t i) {
        const auto& s = evals[i].spec;
        return std::make_tuple(-s.lambda(), -s.lambda2(), -s.k(), s.d());
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    std::size_t best = order.front();
    for (std::size_t i : order) {
        if (evals[i].value < evals[best].value) best = i;
    }
    return best;
}

SelectionReport select_by_validation(const Dataset& train, const Dataset& valid, Family family,
                                     const TuningGrids& grids)
{
    if (!train.standardized || !valid.standardized) {
        throw InputError("select_by_validation expects standardized train and validation sets");
    }
    if (train.p() != valid.p()) throw InputError("train and validation sets have different column counts");
    const auto g = gram(train);
    const auto resolved = resolve_grids(grids, g);

    SelectionReport report;
    report.criterion = Criterion::ValidationMse;
    const double nv = static_cast<double>(valid.n());
    std::vector<VectorXd> betas;
    for_each_candidate(g, family, resolved, [&](const PenaltySpec& spec, const VectorXd& beta) {
        const double mse = (valid.y - valid.X * beta).squaredNorm() / nv;
        report.criterion_values.push_back({spec, mse});
        betas.push_back(beta);
    });
    const auto best = pick_strongest_minimum(report.criterion_values);
    report.chosen = report.criterion_values[best].spec;
    report.chosen_beta = std::move(betas[best]);
    return report;
}

double median(std::vector<double> values)
{
    if (values.empty()) throw InputError("median of empty sample");
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double bootstrap_median_se(const std::vector<double>& values, int resamples, std::uint64_t seed)
{
    if (values.empty()) throw InputError("bootstrap of empty sample");
    if (values.size() == 1 || resamples < 2) return 0.0;
    std::mt19937_64 rng(seed);
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(resamples));
    std::vector<double> sample(values.size());
    for (int b = 0; b < resamples; ++b) {
        for (auto& s : sample) s = values[detail::uniform_below(rng, values.size())];
        stats.push_back(median(sample));
    }
    const double mean = std::accumulate(stats.begin(), stats.end(), 0.0) / static_cast<double>(stats.size());
    double ss = 0.0;
    for (double s : stats) ss += (s - mean) * (s - mean);
    return std::sqrt(ss / static_cast<double>(stats.size() - 1));
}

CvReport kfold_cv(const Dataset& raw, Family family, const TuningGrids& grids, int folds, int repeats,
                  std::uint64_t seed, int threads)
{
    if (raw.standardized) throw InputError("kfold_cv expects raw (unstandardized) data");
    if (folds < 2) throw InputError("K must be at least 2");
    if (folds > raw.n()) {
        throw InputError("K = " + std::to_string(folds) + " exceeds the number of rows (" +
                         std::to_string(raw.n()) + ")");
    }
    if (repeats < 1) throw InputError("repeats must be at least 1");

    // Grids are fixed from the full data so every fold scores the same candidates.
    const auto resolved = resolve_grids(grids, gram(standardize(raw)));
    const SeedPlan plan(seed);
    const auto n = static_cast<std::size_t>(raw.n());

    std::vector<std::vector<double>> repeat_errors(static_cast<std::size_t>(repeats));
    std::vector<PenaltySpec> specs;
    std::once_flag specs_once;

    detail::parallel_for(static_cast<std::size_t>(repeats), threads, [&](std::size_t r) {
        auto rng = plan.engine(r, "kfold-partition");
        std::vector<Index> perm(n);
        std::iota(perm.begin(), perm.end(), Index{0});
        detail::shuffle(perm, rng);
        std::vector<int> fold_of(n);
        for (std::size_t i = 0; i < n; ++i) fold_of[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));

        std::vector<double> err_sum;
        std::vector<PenaltySpec> local_specs;
        for (int f = 0; f < folds; ++f) {
            std::vector<Index> tr, ho;
            for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? ho : tr).push_back(static_cast<Index>(i));
            auto train = standardize(Dataset::from_arrays(raw.X(tr, Eigen::all), raw.y(tr), raw.column_names));
            MatrixXd Z = raw.X(ho, Eigen::all).rowwise() - train.x_means.transpose();
            Z.array().rowwise() /= train.x_scales.transpose().array();
            const VectorXd y_ho = raw.y(ho).array() - train.y_mean;
            const auto g = gram(train);

            std::size_t c = 0;
            for_each_candidate(g, family, resolved, [&](const PenaltySpec& spec, const VectorXd& beta) {
                const double mse = (y_ho - Z * beta).squaredNorm() / static_cast<double>(ho.size());
                if (f == 0) {
                    err_sum.push_back(0.0);
                    local_specs.push_back(spec);
                }
                err_sum[c++] += mse;
            });
        }
        for (auto& e : err_sum) e /= folds;
        repeat_errors[r] = std::move(err_sum);
        std::call_once(specs_once, [&] { specs = std::move(local_specs); });
    });

    CvReport out;
    out.selection.criterion = Criterion::KFoldCvMse;
    const std::size_t candidates = specs.size();
    for (std::size_t c = 0; c < candidates; ++c) {
        double s = 0.0;
        for (const auto& errs : repeat_errors) s += errs[c];
        out.selection.criterion_values.push_back({specs[c], s / repeats});
    }
    out.selection.chosen = out.selection.criterion_values[pick_strongest_minimum(out.selection.criterion_values)].spec;
    for (const auto& errs : repeat_errors) {
        out.per_repeat_mse.push_back(*std::min_element(errs.begin(), errs.end()));
    }
    out.median_mse = median(out.per_repeat_mse);
    out.se_median = bootstrap_median_se(out.per_repeat_mse, 1000, plan.stream(0, "bootstrap-median"));
    return out;
}

double choose_d_l1(const VectorXd& beta_anchor, const VectorXd& beta_target)
{
    if (beta_anchor.size() != beta_target.size()) throw InputError("choose_d_l1: length mismatch");
    std::vector<std::pair<double, double>> pts; // (ratio, weight)
    for (Index j = 0; j < beta_anchor.size(); ++j) {
        const double a = beta_anchor(j);
        if (std::abs(a) > 1e-10) pts.emplace_back(beta_target(j) / a, std::abs(a));
    }
    if (pts.empty()) throw InputError("choose_d_l1: anchor vector is all zero");
    std::sort(pts.begin(), pts.end());
    double total = 0.0;
    for (const auto& pt : pts) total += pt.second;
    double cum = 0.0;
    double d = pts.back().first;
    for (const auto& [ratio, weight] : pts) {
        cum += weight;
        if (cum >= 0.5 * total) {
            d = ratio;
            break;
        }
    }
    return std::clamp(d, 0.0, 1.0);
}

DChoice choose_d_closed_form(const VectorXd& beta_ols, const VectorXd& beta_enet, const Dataset& ds,
                             double lambda1, double lambda2)
{
    if (!(lambda2 > 0.0)) throw InputError("closed-form d requires lambda2 > 0");
    if (beta_ols.size() != ds.p() || beta_enet.size() != ds.p()) throw InputError("coefficient length mismatch");
    if (!(beta_ols.norm() > 1e-10)) throw InputError("d undefined for null OLS fit");

    const double bb = beta_ols.squaredNorm();
    const double loss = enet_loss_unnormalized(ds, beta_enet, lambda1, lambda2);
    const double q = lambda2 * lambda2 * bb * bb - lambda2 * bb * loss;
    if (q < 0.0) return DChoice{choose_d_l1(beta_ols, beta_enet), true};
    const double d = std::max(0.0, 1.0 - std::sqrt(q) / (lambda2 * bb));
    return DChoice{std::min(d, 1.0), false};
}

} // namespace llasso
