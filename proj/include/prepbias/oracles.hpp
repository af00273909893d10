#pragma once

// Reference quantities for the bias in each family, computed by routes that
// share no code with the replicate pipeline: closed forms, exact binomial
// enumeration, and direct Monte Carlo of the covariance-form expectations.

#include "prepbias/core.hpp"
#include "prepbias/mc_engine.hpp"
#include "prepbias/models.hpp"
#include "prepbias/predictors.hpp"
#include "prepbias/rng.hpp"
#include "prepbias/stats.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace prepbias {

struct McEstimate {
    double value = 0.0;
    double se = 0.0;
    std::int64_t count = 0;
};

// ---------------------------------------------------------------------------
// Feature selection with K = C = m = 1

struct VarSelDiagnostics {
    double rho_12 = 0.0;      // training-row correlation of the selected column and one other column
    double norm_ratio = 0.0;  // |X_2|^2 / |X_1|^2 over training rows
    double x_next_sq = 0.0;   // squared validation entry of the selected column
};

/// `x` holds n training rows followed by one validation row. Column "1" is the
/// maximizer of the sum of squares over all n + 1 rows (ties to the lower
/// index); column "2" is the lowest other index.
inline VarSelDiagnostics varsel_diagnostics(const Matrix& x) {
    require(x.cols() >= 2 && x.rows() >= 2, "varsel_diagnostics: need p >= 2 and n >= 1");
    const Index n = x.rows() - 1;
    Index best = 0;
    double best_ss = -1.0;
    for (Index j = 0; j < x.cols(); ++j) {
        const double ss = x.col(j).squaredNorm();
        if (ss > best_ss) {
            best_ss = ss;
            best = j;
        }
    }
    const Index other = best == 0 ? 1 : 0;
    const auto first = x.col(best).head(n);
    const auto second = x.col(other).head(n);
    const double n1 = first.squaredNorm();
    const double n2 = second.squaredNorm();
    VarSelDiagnostics d;
    d.rho_12 = first.dot(second) / std::sqrt(n1 * n2);
    d.norm_ratio = n2 / n1;
    d.x_next_sq = x(n, best) * x(n, best);
    return d;
}

/// Monte Carlo of E[((p - 1) rho^2 ratio - 1)(x_next^2 - 1)] with Gaussian columns.
inline McEstimate thm2_rhs_mc(Index n, Index p, std::int64_t n_reps, std::uint64_t seed,
                              unsigned threads = default_thread_count()) {
    require(n >= 1 && p >= 2, "thm2_rhs_mc: need n >= 1 and p >= 2");
    require(n_reps >= 2, "thm2_rhs_mc: n_reps must be >= 2");
    const auto stats = run_chunked<AggregateStats>(n_reps, seed, threads, [&](RngStream& rng, AggregateStats& acc) {
        const Matrix x = sample_standard_gaussian(rng, n + 1, p);
        const auto d = varsel_diagnostics(x);
        acc.push((static_cast<double>(p - 1) * d.rho_12 * d.rho_12 * d.norm_ratio - 1.0) * (d.x_next_sq - 1.0));
    });
    return {stats.mean, stats.standard_error(), stats.count};
}

// ---------------------------------------------------------------------------
// Rare-category grouping

struct CategoryProbabilities {
    double pr_rare = 0.0;
    std::vector<double> p;  // p[i] = Pr(#train = i | not rare), i = 0..n
    double a_value = 0.0;   // Pr(not rare) * sum_{i >= 1} p[i] / i
};

/// Binomial(trials, q) probability mass, exact recurrence.
inline std::vector<double> binomial_pmf(Index trials, double q) {
    std::vector<double> pmf(static_cast<std::size_t>(trials) + 1, 0.0);
    if (q >= 1.0) {
        pmf.back() = 1.0;
        return pmf;
    }
    if (q <= 0.0) {
        pmf.front() = 1.0;
        return pmf;
    }
    pmf[0] = std::pow(1.0 - q, static_cast<double>(trials));
    const double odds = q / (1.0 - q);
    for (Index k = 0; k < trials; ++k)
        pmf[static_cast<std::size_t>(k) + 1] =
            pmf[static_cast<std::size_t>(k)] * static_cast<double>(trials - k) / static_cast<double>(k + 1) * odds;
    return pmf;
}

/// Exact count probabilities for the category of a validation point
/// (`in_validation`, the point itself counted once) or of a fresh point.
/// A category is rare when it appears fewer than `cutoff` times among all n + m rows.
inline CategoryProbabilities categorical_probs(Index n, Index m, int num_categories, int cutoff, bool in_validation) {
    require(n >= 1 && m >= 1 && num_categories >= 1 && cutoff >= 1, "categorical_probs: parameters must be positive");
    const double q = 1.0 / static_cast<double>(num_categories);
    const auto train = binomial_pmf(n, q);
    const Index other_trials = in_validation ? m - 1 : m;
    const auto other = binomial_pmf(other_trials, q);
    const Index self = in_validation ? 1 : 0;

    CategoryProbabilities out;
    out.p.assign(train.size(), 0.0);
    double not_rare = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (std::size_t j = 0; j < other.size(); ++j) {
            const double prob = train[i] * other[j];
            if (static_cast<Index>(i + j) + self < cutoff) {
                out.pr_rare += prob;
            } else {
                out.p[i] += prob;
                not_rare += prob;
            }
        }
    }
    if (not_rare > 0.0)
        for (double& v : out.p) v /= not_rare;
    for (std::size_t i = 1; i < out.p.size(); ++i) out.a_value += out.p[i] / static_cast<double>(i);
    out.a_value *= not_rare;
    return out;
}

/// Expected squared loss for a point of category k with mean mu_k.
inline double thm3_mse(double mu, double sigma, const CategoryProbabilities& probs) {
    const double s2 = sigma * sigma;
    const double p0 = probs.p.empty() ? 0.0 : probs.p.front();
    return s2 + probs.pr_rare * mu * mu + (1.0 - probs.pr_rare) * p0 * mu * mu + s2 * probs.a_value;
}

/// Expected e_val - e_gen for the categorical family, averaging over mu ~ N(0, 1) (E mu^2 = 1).
inline double categorical_bias(Index n, Index m, int num_categories, int cutoff, double sigma) {
    return thm3_mse(1.0, sigma, categorical_probs(n, m, num_categories, cutoff, true)) -
           thm3_mse(1.0, sigma, categorical_probs(n, m, num_categories, cutoff, false));
}

/// Noiseless bias at cutoff 2 with one validation point: -(n/C)(1 - 1/C)^n.
inline double eq31_bias(Index n, int num_categories) {
    const double c = static_cast<double>(num_categories);
    return -(static_cast<double>(n) / c) * std::pow(1.0 - 1.0 / c, static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Rescaled simplified Lasso

namespace detail {

struct ClipDraw {
    double clipped_sq;
    double x_next_sq;
};

/// One draw of (clip^2_{lambda s/n}(beta_1), x_{n+1,1}^2) for the first coordinate.
inline ClipDraw draw_clip_pair(const LassoConfig& cfg, RngStream& rng) {
    const double beta = rng.normal();
    double train_ss = static_cast<double>(cfg.n);
    if (cfg.design == LassoDesign::gaussian) {
        train_ss = 0.0;
        for (Index i = 0; i < cfg.n; ++i) {
            const double v = rng.normal();
            train_ss += v * v;
        }
    }
    double val_ss = 0.0;
    double first_val = 0.0;
    for (Index i = 0; i < cfg.m; ++i) {
        const double v = rng.normal();
        if (i == 0) first_val = v;
        val_ss += v * v;
    }
    const double scale = std::sqrt((train_ss + val_ss) / static_cast<double>(cfg.n + cfg.m));
    const double c = clip(beta, cfg.lambda * scale / static_cast<double>(cfg.n));
    return {c * c, first_val * first_val};
}

struct PairMeans {
    AggregateStats clipped_sq;
    AggregateStats x_next_sq;
    void merge(const PairMeans& other) {
        clipped_sq.merge(other.clipped_sq);
        x_next_sq.merge(other.x_next_sq);
    }
};

}  // namespace detail

/// Monte Carlo of p * Cov(clip^2_{lambda s_1/n}(beta_1), x_{n+1,1}^2).
///
/// Two passes over the same streams: the first fixes the sample means, the
/// second averages centered products, so the standard error comes straight
/// from the per-draw influence terms. With design = orthogonal the training
/// sum of squares is exactly n, which is the setting where this equals the bias
/// of the simplified rescaled Lasso.
inline McEstimate thm4_cov_mc(const LassoConfig& cfg, std::int64_t n_reps, std::uint64_t seed,
                              unsigned threads = default_thread_count()) {
    cfg.validate();
    require(n_reps >= 2, "thm4_cov_mc: n_reps must be >= 2");
    const auto means = run_chunked<detail::PairMeans>(n_reps, seed, threads, [&](RngStream& rng, detail::PairMeans& acc) {
        const auto d = detail::draw_clip_pair(cfg, rng);
        acc.clipped_sq.push(d.clipped_sq);
        acc.x_next_sq.push(d.x_next_sq);
    });
    const double mean_c = means.clipped_sq.mean;
    const double mean_z = means.x_next_sq.mean;
    const auto products = run_chunked<AggregateStats>(n_reps, seed, threads, [&](RngStream& rng, AggregateStats& acc) {
        const auto d = detail::draw_clip_pair(cfg, rng);
        acc.push((d.clipped_sq - mean_c) * (d.x_next_sq - mean_z));
    });
    const double correction = static_cast<double>(n_reps) / static_cast<double>(n_reps - 1);
    const double p = static_cast<double>(cfg.p);
    return {p * products.mean * correction, p * products.standard_error() * correction, products.count};
}

}  // namespace prepbias
