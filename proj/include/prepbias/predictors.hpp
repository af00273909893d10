#pragma once

#include "prepbias/core.hpp"
#include "prepbias/preprocessors.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace prepbias {

/// Soft threshold: sign(x) * max(|x| - a, 0).
inline double shrink(double x, double a) noexcept {
    const double magnitude = std::abs(x) - a;
    if (magnitude <= 0.0) return 0.0;
    return std::copysign(magnitude, x);
}

/// Truncation to [-a, a]. clip(x, a) + shrink(x, a) == x.
inline double clip(double x, double a) noexcept { return std::max(std::min(x, a), -a); }

struct LinearCoefficients {
    Vector beta;
    bool converged = true;
    Index iterations = 0;

    template <class Row>
    double predict(const Row& x) const {
        double total = 0.0;
        for (Index j = 0; j < beta.size(); ++j) total += x[j] * beta[j];
        return total;
    }
};

namespace detail {

inline void require_finite(const Matrix& x, const Vector& y, const char* who) {
    if (!x.allFinite() || !y.allFinite()) throw NumericError(std::string(who) + ": non-finite input");
}

}  // namespace detail

/// Least squares without intercept. Rank-deficient systems get the minimum-norm minimizer
/// (complete orthogonal decomposition with column pivoting).
inline LinearCoefficients fit_ols_no_intercept(const Matrix& x, const Vector& y) {
    require(x.rows() >= 1 && x.cols() >= 1, "fit_ols_no_intercept: empty design");
    require(x.rows() == y.size(), "fit_ols_no_intercept: row count mismatch");
    detail::require_finite(x, y, "fit_ols_no_intercept");
    LinearCoefficients out;
    if (x.cols() == 1) {
        // Closed form; also keeps y = c * x fits exact to the last bit.
        const double xx = x.col(0).squaredNorm();
        out.beta = Vector::Zero(1);
        if (xx > 0.0) out.beta[0] = x.col(0).dot(y) / xx;
    } else {
        out.beta = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(x).solve(y);
    }
    if (!out.beta.allFinite()) throw NumericError("fit_ols_no_intercept: non-finite solution");
    return out;
}

/// Per-category training means; rare or unseen categories predict 0.
class CategoryMeansModel {
public:
    CategoryMeansModel(std::vector<Index> counts, std::vector<double> means)
        : counts_(std::move(counts)), means_(std::move(means)) {}

    /// `category` is a transformed symbol: a 1-based label or kRareCategory.
    double predict(int category) const noexcept {
        if (category == kRareCategory) return 0.0;
        const auto idx = static_cast<std::size_t>(category);
        if (idx >= counts_.size() || counts_[idx] == 0) return 0.0;
        return means_[idx];
    }

    Index count(int category) const noexcept {
        const auto idx = static_cast<std::size_t>(category);
        return idx < counts_.size() ? counts_[idx] : 0;
    }

private:
    std::vector<Index> counts_;
    std::vector<double> means_;
};

/// Fits on already-transformed category symbols.
inline CategoryMeansModel fit_category_means(std::span<const int> categories, std::span<const double> responses) {
    require(categories.size() == responses.size(), "fit_category_means: size mismatch");
    int max_label = 0;
    for (int k : categories) max_label = std::max(max_label, k);
    std::vector<Index> counts(static_cast<std::size_t>(max_label) + 1, 0);
    std::vector<double> sums(counts.size(), 0.0);
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const int k = categories[i];
        if (k == kRareCategory) continue;
        ++counts[static_cast<std::size_t>(k)];
        sums[static_cast<std::size_t>(k)] += responses[i];
    }
    for (std::size_t k = 0; k < sums.size(); ++k)
        if (counts[k] > 0) sums[k] /= static_cast<double>(counts[k]);
    return CategoryMeansModel(std::move(counts), std::move(sums));
}

/// Raw labels plus the learned grouping; labels in the rare set predict 0 even if seen in training.
inline CategoryMeansModel fit_category_means(std::span<const int> raw_categories, std::span<const double> responses,
                                             const RareGrouping& grouping) {
    std::vector<int> transformed(raw_categories.size());
    std::transform(raw_categories.begin(), raw_categories.end(), transformed.begin(),
                   [&](int k) { return grouping.apply(k); });
    return fit_category_means(transformed, responses);
}

/// p independent one-dimensional Lasso fits:
/// beta_j = shrink(X_j'y / |X_j|^2, lambda / |X_j|^2).
inline LinearCoefficients fit_simplified_lasso(const Matrix& x, const Vector& y, double lambda) {
    require(lambda >= 0.0, "fit_simplified_lasso: lambda must be >= 0");
    require(x.rows() == y.size(), "fit_simplified_lasso: row count mismatch");
    detail::require_finite(x, y, "fit_simplified_lasso");
    LinearCoefficients out;
    out.beta.resize(x.cols());
    for (Index j = 0; j < x.cols(); ++j) {
        const double norm_sq = x.col(j).squaredNorm();
        if (!(norm_sq > 0.0)) throw DegenerateColumnError("fit_simplified_lasso: zero-norm column", j);
        out.beta[j] = shrink(x.col(j).dot(y) / norm_sq, lambda / norm_sq);
    }
    return out;
}

/// 0.5 * |y - X beta|^2 + lambda * |beta|_1
inline double lasso_objective(const Matrix& x, const Vector& y, const Vector& beta, double lambda) {
    return 0.5 * (y - x * beta).squaredNorm() + lambda * beta.lpNorm<1>();
}

struct LassoOptions {
    double tol = 1e-8;       // on the largest coefficient change in a sweep
    Index max_iter = 10000;  // sweeps
};

/// Cyclic coordinate descent from zero on 0.5 * |y - X beta|^2 + lambda * |beta|_1.
/// Hitting max_iter returns the current iterate with converged = false.
inline LinearCoefficients fit_lasso_cd(const Matrix& x_rows, const Vector& y, double lambda,
                                       const LassoOptions& options = {}) {
    require(lambda >= 0.0, "fit_lasso_cd: lambda must be >= 0");
    require(x_rows.rows() == y.size(), "fit_lasso_cd: row count mismatch");
    detail::require_finite(x_rows, y, "fit_lasso_cd");
    const Eigen::MatrixXd x = x_rows;  // column-major for column sweeps
    const Index p = x.cols();
    Vector col_norm_sq(p);
    for (Index j = 0; j < p; ++j) col_norm_sq[j] = x.col(j).squaredNorm();

    LinearCoefficients out;
    out.beta = Vector::Zero(p);
    out.converged = false;
    Vector residual = y;
    auto update = [&](Index j) {
        if (col_norm_sq[j] == 0.0) return 0.0;
        const double old = out.beta[j];
        const double rho = x.col(j).dot(residual) + col_norm_sq[j] * old;
        const double delta = shrink(rho, lambda) / col_norm_sq[j] - old;
        if (delta == 0.0) return 0.0;
        residual.noalias() -= delta * x.col(j);
        out.beta[j] += delta;
        return std::abs(delta);
    };

    // A full sweep over all columns, then sweeps over the nonzero ones only until
    // they settle. Only a quiet full sweep counts as convergence; every sweep counts
    // toward max_iter.
    std::vector<Index> active;
    Index sweep = 0;
    while (sweep < options.max_iter) {
        double max_change = 0.0;
        for (Index j = 0; j < p; ++j) max_change = std::max(max_change, update(j));
        ++sweep;
        if (max_change < options.tol) {
            out.converged = true;
            break;
        }
        active.clear();
        for (Index j = 0; j < p; ++j)
            if (out.beta[j] != 0.0) active.push_back(j);
        if (static_cast<Index>(active.size()) == p) continue;
        while (sweep < options.max_iter) {
            double active_change = 0.0;
            for (Index j : active) active_change = std::max(active_change, update(j));
            ++sweep;
            if (active_change < options.tol) break;
        }
    }
    out.iterations = sweep;
    if (!out.beta.allFinite()) throw NumericError("fit_lasso_cd: non-finite solution");
    return out;
}

/// The constant-zero predictor.
struct NullPredictor {
    template <class Row>
    double predict(const Row&) const noexcept {
        return 0.0;
    }
};

inline NullPredictor null_predictor() noexcept { return {}; }

}  // namespace prepbias
