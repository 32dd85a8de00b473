"""Liu-type LASSO regression, baselines and evaluation tools."""

from ._core import (
    InputError,
    NumericalError,
    choose_d_l1,
    fit_enet,
    fit_gen_llasso,
    fit_lasso,
    fit_liu,
    fit_llasso,
    fit_ols,
    fit_ridge,
    kfold_cv,
    mc_risk,
    risk_closed_form,
    simulate,
)

__all__ = [
    "InputError",
    "NumericalError",
    "choose_d_l1",
    "fit_enet",
    "fit_gen_llasso",
    "fit_lasso",
    "fit_liu",
    "fit_llasso",
    "fit_ols",
    "fit_ridge",
    "kfold_cv",
    "mc_risk",
    "risk_closed_form",
    "simulate",
]
