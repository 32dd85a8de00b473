#include <llasso/core.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace llasso {
namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out)
{
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

void check_shapes(const MatrixXd& X, const VectorXd& y)
{
    if (X.rows() != y.size()) {
        throw InputError("X has " + std::to_string(X.rows()) + " rows but y has " +
                         std::to_string(y.size()) + " entries");
    }
    if (X.rows() < 2) throw InputError("fewer than 2 rows");
    if (X.cols() < 1) throw InputError("no predictor columns");
    if (!X.allFinite() || !y.allFinite()) throw InputError("non-finite value in data");
}

} // namespace

Dataset Dataset::from_arrays(MatrixXd X, VectorXd y, std::vector<std::string> names)
{
    check_shapes(X, y);
    if (names.empty()) {
        for (Index j = 0; j < X.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<Index>(names.size()) != X.cols()) {
        throw InputError("column_names size does not match number of columns");
    }
    Dataset ds;
    ds.x_means = VectorXd::Zero(X.cols());
    ds.x_scales = VectorXd::Ones(X.cols());
    ds.X = std::move(X);
    ds.y = std::move(y);
    ds.column_names = std::move(names);
    return ds;
}

Dataset parse_csv(std::string_view text, std::string_view response_column, std::string_view source)
{
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            auto pos = text.find('\n', start);
            auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
            if (!trim(line).empty()) lines.push_back(line);
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
    }
    const std::string where(source);
    if (lines.empty()) throw InputError(where + ": empty file");
    if (text.find('"') != std::string_view::npos) {
        throw InputError(where + ": quoted fields are not supported");
    }

    auto header = split_fields(lines.front());
    std::vector<std::string> names;
    Index response = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        auto name = trim(header[j]);
        if (name == response_column) {
            response = static_cast<Index>(j);
        } else {
            names.emplace_back(name);
        }
    }
    if (response < 0) {
        throw InputError(where + ": missing column '" + std::string(response_column) + "'");
    }

    const Index rows = static_cast<Index>(lines.size()) - 1;
    const Index cols = static_cast<Index>(header.size());
    if (rows < 2) throw InputError(where + ": fewer than 2 rows");
    if (cols < 2) throw InputError(where + ": no predictor columns");

    MatrixXd X(rows, cols - 1);
    VectorXd y(rows);
    for (Index i = 0; i < rows; ++i) {
        auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1]);
        if (static_cast<Index>(fields.size()) != cols) {
            throw InputError(where + ": row " + std::to_string(i + 1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(cols));
        }
        Index xj = 0;
        for (Index j = 0; j < cols; ++j) {
            double v = 0.0;
            if (!parse_double(fields[static_cast<std::size_t>(j)], v)) {
                throw InputError(where + ": non-numeric cell at row " + std::to_string(i + 1) +
                                 ", column '" + std::string(trim(header[static_cast<std::size_t>(j)])) +
                                 "'");
            }
            if (j == response) {
                y(i) = v;
            } else {
                X(i, xj++) = v;
            }
        }
    }
    for (Index j = 0; j < X.cols(); ++j) {
        if ((X.col(j).array() == X(0, j)).all()) {
            throw InputError(where + ": constant predictor column '" + names[static_cast<std::size_t>(j)] + "'");
        }
    }
    return Dataset::from_arrays(std::move(X), std::move(y), std::move(names));
}

Dataset load_csv(const std::filesystem::path& path, std::string_view response_column)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), response_column, path.string());
}

Dataset standardize(const Dataset& ds)
{
    if (ds.standardized) throw InputError("dataset is already standardized");
    check_shapes(ds.X, ds.y);
    const double n = static_cast<double>(ds.n());

    Dataset out = ds;
    out.x_means = ds.X.colwise().mean().transpose();
    out.x_scales.resize(ds.p());
    out.X.rowwise() -= out.x_means.transpose();
    for (Index j = 0; j < ds.p(); ++j) {
        const double sd = std::sqrt(out.X.col(j).squaredNorm() / (n - 1.0));
        if (!(sd > 0.0)) {
            throw InputError("zero-variance column '" + ds.column_names[static_cast<std::size_t>(j)] + "'");
        }
        out.x_scales(j) = sd;
        out.X.col(j) /= sd;
    }
    out.y_mean = ds.y.mean();
    out.y.array() -= out.y_mean;
    out.standardized = true;
    return out;
}

Dataset standardize_like(const Dataset& raw, const Dataset& reference)
{
    if (raw.standardized) throw InputError("dataset is already standardized");
    if (!reference.standardized) throw InputError("reference dataset is not standardized");
    if (raw.p() != reference.p()) throw InputError("column count differs from reference dataset");

    Dataset out = raw;
    out.X.rowwise() -= reference.x_means.transpose();
    out.X.array().rowwise() /= reference.x_scales.transpose().array();
    out.y.array() -= reference.y_mean;
    out.x_means = reference.x_means;
    out.x_scales = reference.x_scales;
    out.y_mean = reference.y_mean;
    out.standardized = true;
    return out;
}

GramCache gram(const Dataset& ds)
{
    if (!ds.standardized) throw InputError("gram requires a standardized dataset");
    GramCache g;
    const Index p = ds.p();
    g.C.resize(p, p);
    g.C.triangularView<Eigen::Upper>() = ds.X.transpose() * ds.X;
    for (Index j = 0; j < p; ++j) {
        for (Index i = j + 1; i < p; ++i) g.C(i, j) = g.C(j, i);
    }
    g.Xty = ds.X.transpose() * ds.y;
    g.yty = ds.y.squaredNorm();
    g.n = ds.n();
    return g;
}

VectorXd to_original_scale(const Dataset& ds, const VectorXd& beta)
{
    return beta.cwiseQuotient(ds.x_scales);
}

double original_intercept(const Dataset& ds, const VectorXd& beta)
{
    return ds.y_mean - ds.x_means.dot(to_original_scale(ds, beta));
}

VectorXd predict(const Dataset& ds, const MatrixXd& X_raw, const VectorXd& beta)
{
    if (X_raw.cols() != ds.p() || beta.size() != ds.p()) throw InputError("predict: shape mismatch");
    MatrixXd Z = X_raw.rowwise() - ds.x_means.transpose();
    Z.array().rowwise() /= ds.x_scales.transpose().array();
    return (Z * beta).array() + ds.y_mean;
}

Cholesky::Cholesky(const MatrixXd& A, double pivot_floor)
{
    if (A.rows() != A.cols()) throw InputError("Cholesky: matrix is not square");
    const Index p = A.rows();
    L_ = MatrixXd::Zero(p, p);
    for (Index j = 0; j < p; ++j) {
        double pivot = A(j, j) - L_.row(j).head(j).squaredNorm();
        if (!(pivot > pivot_floor)) {
            throw NumericalError("matrix is not positive definite: pivot " + std::to_string(j) +
                                 " is " + std::to_string(pivot));
        }
        const double ljj = std::sqrt(pivot);
        L_(j, j) = ljj;
        for (Index i = j + 1; i < p; ++i) {
            L_(i, j) = (A(i, j) - L_.row(i).head(j).dot(L_.row(j).head(j))) / ljj;
        }
    }
}

VectorXd Cholesky::solve(const VectorXd& b) const
{
    if (b.size() != L_.rows()) throw InputError("Cholesky::solve: size mismatch");
    VectorXd z = L_.triangularView<Eigen::Lower>().solve(b);
    return L_.transpose().triangularView<Eigen::Upper>().solve(z);
}

MatrixXd Cholesky::solve(const MatrixXd& B) const
{
    if (B.rows() != L_.rows()) throw InputError("Cholesky::solve: size mismatch");
    MatrixXd Z = L_.triangularView<Eigen::Lower>().solve(B);
    return L_.transpose().triangularView<Eigen::Upper>().solve(Z);
}

VectorXd solve_spd(const MatrixXd& A, const VectorXd& b)
{
    return Cholesky(A).solve(b);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t SeedPlan::stream(std::uint64_t rep_index, std::string_view purpose_tag) const
{
    // FNV-1a of the tag, then three rounds of splitmix64 mixing.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : purpose_tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = splitmix64(master_);
    s = splitmix64(s ^ rep_index);
    return splitmix64(s ^ h);
}

double NormalSampler::operator()(std::mt19937_64& rng)
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    constexpr double scale = 1.0 / 9007199254740992.0; // 2^-53
    double u, v, s;
    do {
        u = 2.0 * static_cast<double>(rng() >> 11) * scale - 1.0;
        v = 2.0 * static_cast<double>(rng() >> 11) * scale - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

} // namespace llasso
