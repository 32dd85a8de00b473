#pragma once

// Implementation of llasso::for_each_candidate; included from tuning.hpp.

namespace llasso {

template <class Visitor>
void for_each_candidate(const GramCache& g, Family family, const TuningGrids& grids, Visitor&& visit)
{
    const auto descending = [](const Grid& grid) {
        return std::vector<double>(grid.values().rbegin(), grid.values().rend());
    };

    switch (family) {
    case Family::Ols: {
        auto fit = gram_fit::ols(g);
        visit(fit.spec, fit.beta);
        return;
    }
    case Family::Ridge:
        for (double k : descending(*grids.k)) {
            auto fit = gram_fit::ridge(g, k);
            visit(fit.spec, fit.beta);
        }
        return;
    case Family::Liu: {
        // One OLS solve shared across the d grid.
        const auto ols = gram_fit::ols(g);
        MatrixXd shifted = g.C;
        shifted.diagonal().array() += 1.0;
        const VectorXd shrink_dir = Cholesky(shifted).solve(ols.beta);
        for (double d : grids.d->values()) {
            VectorXd beta = ols.beta - (1.0 - d) * shrink_dir;
            if (d == 1.0) beta = ols.beta;
            visit(PenaltySpec::liu(d), beta);
        }
        return;
    }
    case Family::Lasso: {
        VectorXd warm = VectorXd::Zero(g.p());
        for (double lambda : descending(*grids.lambda)) {
            auto fit = gram_fit::lasso(g, lambda, &warm);
            warm = fit.beta;
            visit(fit.spec, fit.beta);
        }
        return;
    }
    case Family::LLasso: {
        MatrixXd shifted = g.C;
        shifted.diagonal().array() += 1.0;
        const Cholesky chol(shifted);
        VectorXd warm = VectorXd::Zero(g.p());
        for (double lambda : descending(*grids.lambda)) {
            auto fit = gram_fit::lasso(g, lambda, &warm);
            warm = fit.beta;
            const VectorXd shrink_dir = chol.solve(fit.beta);
            for (double d : grids.d->values()) {
                // Same arithmetic as gram_fit::llasso_from_lasso up to the
                // order of the scalar product; d = 1 returns the LASSO fit.
                VectorXd beta = fit.beta - (1.0 - d) * shrink_dir;
                if (d == 1.0) beta = fit.beta;
                visit(PenaltySpec::llasso(lambda, d), beta);
            }
        }
        return;
    }
    case Family::ENet:
        for (double lambda2 : descending(*grids.lambda2)) {
            VectorXd warm = VectorXd::Zero(g.p());
            for (double lambda1 : descending(*grids.lambda)) {
                auto fit = gram_fit::enet(g, lambda1, lambda2, &warm);
                warm = fit.beta;
                visit(fit.spec, fit.beta);
            }
        }
        return;
    }
}

} // namespace llasso
