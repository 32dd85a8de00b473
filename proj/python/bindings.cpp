#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <llasso/estimators.hpp>
#include <llasso/orthonormal.hpp>
#include <llasso/simbench.hpp>
#include <llasso/tuning.hpp>

namespace py = pybind11;
using namespace llasso;

namespace {

Dataset standardized(const MatrixXd& X, const VectorXd& y) { return standardize(Dataset::from_arrays(X, y)); }

// Coefficients on the original covariate scale plus the intercept.
py::dict fit_summary(const Dataset& ds, const FitResult& r)
{
    py::dict out;
    out["coef"] = to_original_scale(ds, r.beta);
    out["intercept"] = original_intercept(ds, r.beta);
    out["beta_standardized"] = r.beta;
    out["iterations"] = r.iterations;
    out["converged"] = r.converged;
    out["objective"] = r.objective;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Liu-type LASSO estimators and evaluation tools";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("fit_ols", [](const MatrixXd& X, const VectorXd& y) {
        auto ds = standardized(X, y);
        return fit_summary(ds, fit_ols(ds));
    }, py::arg("X"), py::arg("y"));
    m.def("fit_ridge", [](const MatrixXd& X, const VectorXd& y, double k) {
        auto ds = standardized(X, y);
        return fit_summary(ds, fit_ridge(ds, k));
    }, py::arg("X"), py::arg("y"), py::arg("k"));
    m.def("fit_liu", [](const MatrixXd& X, const VectorXd& y, double d) {
        auto ds = standardized(X, y);
        return fit_summary(ds, fit_liu(ds, d));
    }, py::arg("X"), py::arg("y"), py::arg("d"));
    m.def("fit_lasso", [](const MatrixXd& X, const VectorXd& y, double lam) {
        auto ds = standardized(X, y);
        return fit_summary(ds, fit_lasso(ds, lam));
    }, py::arg("X"), py::arg("y"), py::arg("lam"));
    m.def("fit_enet", [](const MatrixXd& X, const VectorXd& y, double lambda1, double lambda2) {
        auto ds = standardized(X, y);
        return fit_summary(ds, fit_enet(ds, lambda1, lambda2));
    }, py::arg("X"), py::arg("y"), py::arg("lambda1"), py::arg("lambda2"));
    m.def("fit_llasso", [](const MatrixXd& X, const VectorXd& y, double lam, double d) {
        auto ds = standardized(X, y);
        return fit_summary(ds, fit_llasso(ds, lam, d));
    }, py::arg("X"), py::arg("y"), py::arg("lam"), py::arg("d"));
    m.def("fit_gen_llasso", [](const MatrixXd& X, const VectorXd& y, double lam, const VectorXd& D) {
        auto ds = standardized(X, y);
        return fit_summary(ds, fit_gen_llasso(ds, lam, D));
    }, py::arg("X"), py::arg("y"), py::arg("lam"), py::arg("D"));

    m.def("choose_d_l1", &choose_d_l1, py::arg("anchor"), py::arg("target"));

    m.def("kfold_cv", [](const MatrixXd& X, const VectorXd& y, const std::string& family, int folds, int repeats,
                         std::uint64_t seed, int threads) {
        const auto rep = kfold_cv(Dataset::from_arrays(X, y), family_from_string(family), {}, folds, repeats, seed,
                                  threads);
        py::dict out;
        out["median_mse"] = rep.median_mse;
        out["se_median"] = rep.se_median;
        out["per_repeat_mse"] = rep.per_repeat_mse;
        out["chosen"] = rep.selection.chosen.describe();
        return out;
    }, py::arg("X"), py::arg("y"), py::arg("family"), py::arg("folds") = 10, py::arg("repeats") = 1,
       py::arg("seed") = 12345, py::arg("threads") = 1);

    m.def("risk_closed_form", [](const VectorXd& delta, double lambda_o, double d) {
        return risk_closed_form(OrthoConfig(delta, lambda_o, d));
    }, py::arg("delta"), py::arg("lambda_o"), py::arg("d"));
    m.def("mc_risk", [](const VectorXd& delta, double lambda_o, double d, std::int64_t draws, std::uint64_t seed,
                        int threads) {
        const auto mc = mc_risk(OrthoConfig(delta, lambda_o, d), draws, seed, threads);
        return py::make_tuple(mc.estimate, mc.mc_se);
    }, py::arg("delta"), py::arg("lambda_o"), py::arg("d"), py::arg("draws") = 100000, py::arg("seed") = 12345,
       py::arg("threads") = 1);

    m.def("simulate", [](const std::vector<int>& examples, int reps, std::uint64_t seed, int threads) {
        std::vector<SimDesign> designs;
        for (int k : examples) designs.push_back(design_example(k));
        return format_report_csv(run_benchmark(designs, default_estimators(), reps, seed, threads));
    }, py::arg("examples"), py::arg("reps"), py::arg("seed") = 12345, py::arg("threads") = 1,
       "Runs the simulation benchmark and returns the summary CSV text.");
}
