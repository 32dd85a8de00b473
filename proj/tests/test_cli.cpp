#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <llasso/cli.hpp>
#include <llasso/core.hpp>
#include <llasso/estimators.hpp>

#include "oracles.hpp"

namespace llasso {
namespace {

namespace fs = std::filesystem;

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("llasso_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> normal;
        std::ofstream f(data());
        f << "x1,x2,x3,x4,x5,x6,x7,x8,resp\n";
        for (int i = 0; i < 50; ++i) {
            double x[8];
            for (double& v : x) v = normal(rng);
            const double y = 2.0 * x[0] - x[3] + 0.5 * x[6] + normal(rng) + 10.0;
            for (double v : x) f << v << ",";
            f << y << "\n";
        }
        std::ofstream g(collinear());
        g << "a,b,c,y\n";
        for (int i = 0; i < 10; ++i) {
            const int a = i % 4, b = (i * i) % 5;
            g << a << "," << b << "," << a + b << "," << normal(rng) << "\n";
        }
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string data() const { return (dir_ / "data.csv").string(); }
    std::string collinear() const { return (dir_ / "collinear.csv").string(); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

TEST_F(CliTest, HelpListsSchemasAndExitCodes)
{
    auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
    EXPECT_NE(r.out.find("design,estimator,median_mse_y"), std::string::npos);
    EXPECT_EQ(run({"fit", "--help"}).code, 0);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST_F(CliTest, FitPrintsCoefficientTable)
{
    auto r = run({"fit", "--data", data(), "--response", "resp", "--estimator", "llasso", "--lambda", "0.1", "--d",
                  "0.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (int j = 1; j <= 8; ++j) EXPECT_NE(r.out.find("x" + std::to_string(j) + " "), std::string::npos);
    EXPECT_NE(r.out.find("(intercept)"), std::string::npos);

    auto csv = run({"fit", "--data", data(), "--response", "resp", "--estimator", "ridge", "--k", "1", "--format",
                    "csv"});
    ASSERT_EQ(csv.code, 0) << csv.err;
    EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "term,standardized,original");
    EXPECT_EQ(count_lines(csv.out), 10);
}

TEST_F(CliTest, FitOriginalScaleMatchesLibrary)
{
    auto r = run({"fit", "--data", data(), "--response", "resp", "--estimator", "ols", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto ds = standardize(load_csv(data(), "resp"));
    const VectorXd orig = to_original_scale(ds, fit_ols(ds).beta);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line); // intercept
    for (Index j = 0; j < 8; ++j) {
        std::getline(lines, line);
        const double v = std::stod(line.substr(line.rfind(',') + 1));
        EXPECT_NEAR(v, orig(j), 1e-8 * std::max(1.0, std::abs(orig(j))));
    }
}

TEST_F(CliTest, HugeLambdaGivesInterceptOnly)
{
    auto r = run({"fit", "--data", data(), "--response", "resp", "--estimator", "lasso", "--lambda", "1e9",
                  "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto raw = load_csv(data(), "resp");
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    EXPECT_NEAR(std::stod(line.substr(line.rfind(',') + 1)), raw.y.mean(), 1e-8);
    while (std::getline(lines, line)) EXPECT_EQ(line.substr(line.find(',')), ",0,0") << line;
}

TEST_F(CliTest, ExitCodeMatrix)
{
    const std::string d = data();
    struct Case {
        std::vector<std::string> args;
        int code;
    };
    const std::vector<Case> cases{
        {{"fit", "--data", d, "--response", "resp", "--estimator", "llasso", "--lambda", "0.1", "--d", "1.5"}, 2},
        {{"fit", "--data", d, "--response", "resp", "--estimator", "ridge", "--k", "-1"}, 2},
        {{"fit", "--data", d, "--response", "resp", "--estimator", "lasso"}, 2},
        {{"fit", "--data", d, "--response", "missing", "--estimator", "ols"}, 2},
        {{"fit", "--data", path("nope.csv"), "--response", "resp", "--estimator", "ols"}, 2},
        {{"fit", "--data", d, "--response", "resp", "--estimator", "adaptive"}, 2},
        {{"fit", "--data", d, "--response", "resp", "--estimator", "ols", "--format", "json"}, 2},
        {{"fit", "--data", d, "--response", "resp", "--estimator", "lasso", "--lambda", "abc"}, 2},
        {{"fit", "--data", collinear(), "--response", "y", "--estimator", "ols"}, 3},
        {{"fit", "--data", collinear(), "--response", "y", "--estimator", "liu", "--d", "0.5"}, 3},
        {{"fit", "--data", collinear(), "--response", "y", "--estimator", "lasso", "--lambda", "0.1"}, 0},
        {{"fit", "--data", d, "--response", "resp", "--estimator", "enet", "--lambda1", "0.1", "--lambda2", "0.1"}, 0},
        {{"cv", "--data", d, "--response", "resp", "--folds", "200", "--reps", "1"}, 2},
        {{"cv", "--data", d, "--response", "resp", "--folds", "5", "--reps", "0"}, 2},
        {{"simulate", "--examples", "9", "--reps", "1"}, 2},
        {{"simulate", "--examples", "x", "--reps", "1"}, 2},
        {{"risk", "--delta-bound", "0.7", "--draws", "10000"}, 2},
        {{"risk", "--draws", "10"}, 2},
        {{"choose-d", "--data", d, "--response", "resp", "--lambda1", "0.1", "--lambda2", "0"}, 2},
        {{"choose-d", "--data", d, "--response", "resp", "--method", "l1", "--target", "lasso", "--lambda1", "0.1"},
         0},
    };
    for (const auto& c : cases) {
        auto r = run(c.args);
        std::string joined;
        for (const auto& a : c.args) joined += a + " ";
        EXPECT_EQ(r.code, c.code) << joined << "\n" << r.err;
        if (c.code != 0) {
            EXPECT_FALSE(r.err.empty()) << joined;
            EXPECT_EQ(count_lines(r.err), 1) << joined << "\n" << r.err;
        }
    }
}

TEST_F(CliTest, CvIsDeterministicAndWritesFiles)
{
    const std::vector<std::string> args{"cv", "--data", data(), "--response", "resp", "--folds", "5", "--reps", "2",
                                        "--estimators", "ols,ridge,llasso", "--format", "csv"};
    auto a = run(args);
    auto b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(count_lines(a.out), 4);
    EXPECT_EQ(a.out.substr(0, a.out.find('\n')), "estimator,median_mse_y,se_mse_y,lambda,lambda2,k,d,folds,reps,seed");

    auto args_out = args;
    args_out.push_back("--out");
    args_out.push_back(path("cv.csv"));
    auto c = run(args_out);
    ASSERT_EQ(c.code, 0);
    EXPECT_TRUE(c.out.empty());
    std::ifstream f(path("cv.csv"));
    std::stringstream buf;
    buf << f.rdbuf();
    EXPECT_EQ(buf.str(), a.out);
}

TEST_F(CliTest, SimulateOneExample)
{
    auto r = run({"simulate", "--examples", "1", "--reps", "10", "--seed", "7", "--format", "csv", "--raw-out",
                  path("raw.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_lines(r.out), 7);
    EXPECT_NE(r.out.find("example1,LLASSO,"), std::string::npos);
    std::ifstream f(path("raw.csv"));
    std::string header;
    std::getline(f, header);
    EXPECT_EQ(header, "design,estimator,rep,mse_y,mse_beta");
}

TEST_F(CliTest, RiskGridShape)
{
    auto r = run({"risk", "--draws", "10000", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_lines(r.out), 19);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        ASSERT_EQ(cells.size(), 11u);
        if (std::stod(cells[2]) == 1.0) EXPECT_EQ(cells[4], cells[5]) << line;
    }
}

TEST_F(CliTest, ChooseDReportsValue)
{
    auto r = run({"choose-d", "--data", data(), "--response", "resp", "--lambda1", "0.05", "--lambda2", "0.5",
                  "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "method,target,lambda1,lambda2,d,fallback");
    std::getline(lines, line);
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 6u);
    const double d = std::stod(cells[4]);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0);
}

} // namespace
} // namespace llasso
