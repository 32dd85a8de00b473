#include <gtest/gtest.h>

#include <algorithm>

#include <llasso/tuning.hpp>

#include "oracles.hpp"

namespace llasso {
namespace {

struct Split {
    Dataset train;
    Dataset valid;
};

Split make_split(std::mt19937_64& rng, Index n, Index p, double noise, bool pure_noise = false, Index n_valid = 0)
{
    NormalSampler normal;
    auto draw = [&](Index rows) {
        MatrixXd X(rows, p);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < p; ++j) X(i, j) = normal(rng);
        VectorXd y(rows);
        for (Index i = 0; i < rows; ++i) {
            y(i) = (pure_noise ? 0.0 : 2.0 * X(i, 0) - X(i, 1)) + noise * normal(rng);
        }
        return Dataset::from_arrays(X, y);
    };
    auto train = standardize(draw(n));
    auto valid = standardize_like(draw(n_valid > 0 ? n_valid : n), train);
    return {train, valid};
}

double validation_mse(const Dataset& valid, const VectorXd& beta)
{
    return (valid.y - valid.X * beta).squaredNorm() / static_cast<double>(valid.n());
}

TEST(Grid, Construction)
{
    auto g = Grid::from_values({3.0, 1.0, 2.0, 1.0});
    EXPECT_EQ(g.values(), (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_THROW(Grid::from_values({}), InputError);
    EXPECT_THROW(Grid::from_values({1.0, std::nan("")}), InputError);

    auto lg = Grid::log_spaced(1e-4, 1e2, 25);
    ASSERT_EQ(lg.size(), 25u);
    EXPECT_DOUBLE_EQ(lg.values().front(), 1e-4);
    EXPECT_DOUBLE_EQ(lg.values().back(), 1e2);
    EXPECT_TRUE(std::is_sorted(lg.values().begin(), lg.values().end()));
    EXPECT_EQ(lg.scale(), GridScale::Log);

    auto d = default_d_grid();
    ASSERT_EQ(d.size(), 101u);
    EXPECT_EQ(d.values().front(), 0.0);
    EXPECT_EQ(d.values().back(), 1.0);
    EXPECT_EQ(d.values()[50], 0.5);

    auto lam = default_lambda_grid(2.0);
    ASSERT_EQ(lam.size(), 50u);
    EXPECT_DOUBLE_EQ(lam.values().back(), 2.0);
    EXPECT_DOUBLE_EQ(lam.values().front(), 2e-4);
    EXPECT_EQ(default_k_grid().size(), 25u);
    EXPECT_EQ(default_lambda2_grid().size(), 15u);
}

TEST(Family, NamesRoundTrip)
{
    for (auto f : all_families()) EXPECT_EQ(family_from_string(to_string(f)), f);
    EXPECT_EQ(family_from_string("enet"), Family::ENet);
    EXPECT_EQ(family_from_string("LLASSO"), Family::LLasso);
    EXPECT_THROW(family_from_string("adaptive"), InputError);
}

TEST(SelectByValidation, SingletonGridIsChosen)
{
    std::mt19937_64 rng(1);
    auto s = make_split(rng, 30, 4, 1.0);
    TuningGrids grids;
    grids.lambda = Grid::from_values({0.123});
    grids.d = Grid::from_values({0.4});
    auto rep = select_by_validation(s.train, s.valid, Family::LLasso, grids);
    EXPECT_EQ(rep.chosen.kind(), EstimatorKind::LLasso);
    EXPECT_EQ(rep.chosen.lambda(), 0.123);
    EXPECT_EQ(rep.chosen.d(), 0.4);
    EXPECT_EQ(rep.criterion_values.size(), 1u);
}

TEST(SelectByValidation, ChosenAttainsRecordedMinimum)
{
    std::mt19937_64 rng(2);
    for (auto family : all_families()) {
        auto s = make_split(rng, 40, 5, 1.5);
        TuningGrids grids;
        grids.lambda = Grid::log_spaced(1e-3, 1.0, 8);
        grids.lambda2 = Grid::log_spaced(1e-3, 1.0, 4);
        grids.k = Grid::log_spaced(1e-2, 10.0, 6);
        grids.d = Grid::linear(0.0, 1.0, 0.25);
        auto rep = select_by_validation(s.train, s.valid, family, grids);
        ASSERT_FALSE(rep.criterion_values.empty());
        double best = rep.criterion_values.front().value;
        double chosen_value = -1.0;
        for (const auto& e : rep.criterion_values) {
            best = std::min(best, e.value);
            if (e.spec.describe() == rep.chosen.describe()) chosen_value = e.value;
        }
        EXPECT_EQ(chosen_value, best) << to_string(family);
        // The stored coefficients reproduce the recorded criterion.
        EXPECT_NEAR(validation_mse(s.valid, rep.chosen_beta), best, 1e-12) << to_string(family);
    }
}

TEST(SelectByValidation, PermutedGridGivesSameChoice)
{
    std::mt19937_64 rng(3);
    auto s = make_split(rng, 30, 5, 1.0);
    std::vector<double> lam{0.5, 0.01, 0.1, 0.02, 0.2};
    std::vector<double> dv{0.7, 0.0, 1.0, 0.3};
    TuningGrids a, b;
    a.lambda = Grid::from_values(lam);
    a.d = Grid::from_values(dv);
    std::reverse(lam.begin(), lam.end());
    std::rotate(dv.begin(), dv.begin() + 1, dv.end());
    b.lambda = Grid::from_values(lam);
    b.d = Grid::from_values(dv);
    auto ra = select_by_validation(s.train, s.valid, Family::LLasso, a);
    auto rb = select_by_validation(s.train, s.valid, Family::LLasso, b);
    EXPECT_EQ(ra.chosen.describe(), rb.chosen.describe());
}

TEST(SelectByValidation, TiesGoToStrongerRegularization)
{
    // Above lambda_max every LASSO fit is zero, so the largest lambda wins.
    std::mt19937_64 rng(4);
    auto s = make_split(rng, 30, 3, 1.0);
    const double lmax = lambda_max(gram(s.train));
    TuningGrids grids;
    grids.lambda = Grid::from_values({2.0 * lmax, 3.0 * lmax, 5.0 * lmax});
    auto rep = select_by_validation(s.train, s.valid, Family::Lasso, grids);
    EXPECT_EQ(rep.chosen.lambda(), 5.0 * lmax);

    std::vector<GridEvaluation> evals{{PenaltySpec::llasso(0.1, 0.2), 1.0},
                                      {PenaltySpec::llasso(0.1, 0.1), 1.0},
                                      {PenaltySpec::llasso(0.05, 0.0), 1.0}};
    EXPECT_EQ(pick_strongest_minimum(evals), 1u);
}

TEST(SelectByValidation, PureNoiseRidgePicksLargestK)
{
    std::mt19937_64 rng(5);
    TuningGrids grids;
    grids.k = default_k_grid();
    int at_max = 0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
        auto s = make_split(rng, 40, 5, 1.0, true, 2000);
        auto rep = select_by_validation(s.train, s.valid, Family::Ridge, grids);
        if (rep.chosen.k() == grids.k->values().back()) ++at_max;
    }
    // With no signal the validation error keeps falling as k grows. A large
    // validation block keeps chance correlation with the fitted noise small.
    EXPECT_GE(at_max, 90) << at_max << " of " << reps;
}

TEST(SelectByValidation, OracleLambdaInGridIsOptimal)
{
    std::mt19937_64 rng(6);
    auto s = make_split(rng, 12, 3, 0.5);
    const double lmax = lambda_max(gram(s.train));
    std::vector<double> lam{0.01 * lmax, 0.1 * lmax, 0.3 * lmax, 0.6 * lmax};
    TuningGrids grids;
    grids.lambda = Grid::from_values(lam);
    auto rep = select_by_validation(s.train, s.valid, Family::Lasso, grids);
    const double chosen_err =
        validation_mse(s.valid, oracle::lasso_by_sign_patterns(s.train.X, s.train.y, rep.chosen.lambda()));
    for (double l : lam) {
        EXPECT_LE(chosen_err, validation_mse(s.valid, oracle::lasso_by_sign_patterns(s.train.X, s.train.y, l)) + 1e-8);
    }
}

TEST(SelectByValidation, ShapeMismatchRejected)
{
    std::mt19937_64 rng(7);
    auto a = make_split(rng, 20, 3, 1.0);
    auto b = make_split(rng, 20, 4, 1.0);
    EXPECT_THROW(select_by_validation(a.train, b.valid, Family::Lasso), InputError);
}

TEST(KFoldCv, LeaveOneOutOnExactLine)
{
    auto raw = Dataset::from_arrays((MatrixXd(3, 1) << 1, 2, 4).finished(), (VectorXd(3) << 3, 5, 9).finished());
    auto rep = kfold_cv(raw, Family::Ols, {}, 3, 1, 7);
    ASSERT_EQ(rep.per_repeat_mse.size(), 1u);
    EXPECT_LT(rep.per_repeat_mse[0], 1e-20);
}

TEST(KFoldCv, DeterministicAndThreadIndependent)
{
    std::mt19937_64 rng(8);
    MatrixXd X = MatrixXd::NullaryExpr(40, 4, [&] { return std::normal_distribution<double>()(rng); });
    VectorXd y = X.col(0) * 2.0 + oracle::random_vector(rng, 40);
    auto raw = Dataset::from_arrays(X, y);
    TuningGrids grids;
    grids.lambda = Grid::log_spaced(1e-3, 1.0, 6);
    grids.d = Grid::linear(0.0, 1.0, 0.5);
    auto a = kfold_cv(raw, Family::LLasso, grids, 5, 4, 99, 1);
    auto b = kfold_cv(raw, Family::LLasso, grids, 5, 4, 99, 3);
    EXPECT_EQ(a.per_repeat_mse, b.per_repeat_mse);
    EXPECT_EQ(a.median_mse, b.median_mse);
    EXPECT_EQ(a.se_median, b.se_median);
    EXPECT_EQ(a.selection.chosen.describe(), b.selection.chosen.describe());
    auto c = kfold_cv(raw, Family::LLasso, grids, 5, 4, 100, 1);
    EXPECT_NE(a.per_repeat_mse, c.per_repeat_mse);
    EXPECT_EQ(a.selection.criterion, Criterion::KFoldCvMse);
}

TEST(KFoldCv, RejectsBadFoldCounts)
{
    auto raw = Dataset::from_arrays((MatrixXd(4, 1) << 1, 2, 4, 3).finished(), VectorXd::LinSpaced(4, 0, 3));
    EXPECT_THROW(kfold_cv(raw, Family::Ols, {}, 5, 1, 1), InputError);
    EXPECT_THROW(kfold_cv(raw, Family::Ols, {}, 1, 1, 1), InputError);
    EXPECT_THROW(kfold_cv(raw, Family::Ols, {}, 2, 0, 1), InputError);
}

// Medians from disjoint seeds agree within 4 combined standard errors in
// most trials.
TEST(KFoldCv, SeedSelfConsistency)
{
    std::mt19937_64 rng(9);
    int agree = 0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        MatrixXd X = MatrixXd::NullaryExpr(30, 3, [&] { return std::normal_distribution<double>()(rng); });
        VectorXd y = X.col(0) - X.col(2) + oracle::random_vector(rng, 30);
        auto raw = Dataset::from_arrays(X, y);
        TuningGrids grids;
        grids.k = Grid::log_spaced(1e-2, 10.0, 5);
        auto a = kfold_cv(raw, Family::Ridge, grids, 5, 20, 1000 + 2 * t);
        auto b = kfold_cv(raw, Family::Ridge, grids, 5, 20, 1001 + 2 * t);
        const double se = std::hypot(a.se_median, b.se_median);
        if (std::abs(a.median_mse - b.median_mse) < 4.0 * se + 1e-12) ++agree;
    }
    EXPECT_GE(agree, 19);
}

TEST(Median, AndBootstrap)
{
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
    EXPECT_THROW(median({}), InputError);
    EXPECT_EQ(bootstrap_median_se({5.0, 5.0, 5.0}, 1000, 1), 0.0);
    std::vector<double> v;
    for (int i = 0; i < 200; ++i) v.push_back(i);
    const double se = bootstrap_median_se(v, 1000, 3);
    EXPECT_EQ(se, bootstrap_median_se(v, 1000, 3));
    // Asymptotic SE of the median of a uniform sample: range / (2 sqrt(n)).
    EXPECT_NEAR(se, 200.0 / (2.0 * std::sqrt(200.0)), 3.0);
}

TEST(ChooseDL1, TrivialCases)
{
    const VectorXd a = (VectorXd(3) << 1.0, -2.0, 0.5).finished();
    EXPECT_EQ(choose_d_l1(a, a), 1.0);
    EXPECT_EQ(choose_d_l1(a, VectorXd::Zero(3)), 0.0);
    EXPECT_EQ(choose_d_l1(a, 0.3 * a), 0.3);
    EXPECT_EQ(choose_d_l1(a, 3.0 * a), 1.0);
    EXPECT_THROW(choose_d_l1(VectorXd::Zero(3), a), InputError);
}

double l1_gap(const VectorXd& a, const VectorXd& t, double d) { return (d * a - t).lpNorm<1>(); }

TEST(ChooseDL1, MatchesFineGridAndIsScaleInvariant)
{
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 200; ++rep) {
        const VectorXd a = oracle::random_vector(rng, 6);
        const VectorXd t = 0.6 * a + oracle::random_vector(rng, 6, 0.4);
        const double d = choose_d_l1(a, t);
        ASSERT_GE(d, 0.0);
        ASSERT_LE(d, 1.0);
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 10000; ++i) best = std::min(best, l1_gap(a, t, i / 10000.0));
        // The grid optimum can undercut the exact optimum by at most the slope
        // times half a grid step.
        EXPECT_LE(l1_gap(a, t, d), best + 1e-12);
        EXPECT_GE(l1_gap(a, t, d), best - a.lpNorm<1>() * 1e-4);
        EXPECT_DOUBLE_EQ(choose_d_l1(3.7 * a, 3.7 * t), d);
    }
}

TEST(ChooseDL1, TiesResolveToSmallerBreakpoint)
{
    // Equal weights on breakpoints 0.2 and 0.6: g is flat between them.
    const VectorXd a = (VectorXd(2) << 1.0, 1.0).finished();
    const VectorXd t = (VectorXd(2) << 0.2, 0.6).finished();
    EXPECT_DOUBLE_EQ(choose_d_l1(a, t), 0.2);
}

// Independent evaluation of the closed-form selector.
double closed_form_oracle(const Dataset& ds, const VectorXd& ols, const VectorXd& enet, double l1, double l2)
{
    const double bb = ols.squaredNorm();
    const double L = (ds.y - ds.X * enet).squaredNorm() + l1 * enet.lpNorm<1>() + l2 * enet.squaredNorm();
    const double Q = l2 * l2 * bb * bb - l2 * bb * L;
    return std::clamp(1.0 - std::sqrt(Q) / (l2 * bb), 0.0, 1.0);
}

TEST(ChooseDClosedForm, MatchesDirectEvaluation)
{
    std::mt19937_64 rng(11);
    int evaluated = 0;
    for (int rep = 0; rep < 40; ++rep) {
        auto ds = oracle::random_standardized(rng, 15, 3, 0.3, 0.3);
        const VectorXd ols = fit_ols(ds).beta;
        const double l1 = 0.05 * rep, l2 = 200.0 + 50.0 * rep;
        const VectorXd enet = fit_enet(ds, l1 / 15.0, l2 / 15.0).beta;
        auto choice = choose_d_closed_form(ols, enet, ds, l1, l2);
        EXPECT_GE(choice.d, 0.0);
        EXPECT_LE(choice.d, 1.0);
        if (choice.used_fallback) {
            EXPECT_EQ(choice.d, choose_d_l1(ols, enet));
        } else {
            EXPECT_NEAR(choice.d, closed_form_oracle(ds, ols, enet, l1, l2), 1e-12);
            ++evaluated;
        }
    }
    EXPECT_GT(evaluated, 0);
}

TEST(ChooseDClosedForm, BoundaryAndErrors)
{
    std::mt19937_64 rng(12);
    auto ds = oracle::random_standardized(rng, 15, 3);
    const VectorXd ols = fit_ols(ds).beta;
    const double l2 = 2.0, bb = ols.squaredNorm();
    // Target chosen so that L = lambda2 b'b, giving Q = 0 and d = 1: scale a
    // vector until its loss hits that value.
    const double target = l2 * bb;
    VectorXd dir = ols;
    double lo = 0.0, hi = 1.0;
    auto loss = [&](double s) { return enet_loss_unnormalized(ds, s * dir, 0.0, l2); };
    if (loss(0.0) > target && loss(1.0) < target) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (loss(mid) > target ? lo : hi) = mid;
        }
        auto c = choose_d_closed_form(ols, hi * dir, ds, 0.0, l2);
        EXPECT_NEAR(c.d, 1.0, 1e-6);
    }
    // Q >= (lambda2 b'b)^2 needs L <= 0: zero response and a null fit.
    Dataset silent = ds;
    silent.y.setZero();
    auto zero = choose_d_closed_form(ols, VectorXd::Zero(3), silent, 0.0, l2);
    EXPECT_FALSE(zero.used_fallback);
    EXPECT_EQ(zero.d, 0.0);

    EXPECT_THROW(choose_d_closed_form(VectorXd::Zero(3), ols, ds, 0.1, 1.0), InputError);
    EXPECT_THROW(choose_d_closed_form(ols, ols, ds, 0.1, 0.0), InputError);
}

TEST(ChooseDClosedForm, NegativeDiscriminantFallsBack)
{
    std::mt19937_64 rng(13);
    auto ds = oracle::random_standardized(rng, 20, 3, 0.0, 3.0);
    const VectorXd ols = fit_ols(ds).beta;
    // Tiny lambda2 makes the lambda2^2 term negligible next to the loss.
    auto c = choose_d_closed_form(ols, ols, ds, 0.0, 1e-6);
    EXPECT_TRUE(c.used_fallback);
    EXPECT_EQ(c.d, 1.0);
}

} // namespace
} // namespace llasso
