#pragma once

// Generic transform-then-predict evaluation.
//
// A family bundles a sampling model with a transform learner, a predictor
// learner and an exact risk evaluator. The pipeline only decides which rows
// the transform learner sees (all n + m for the leaky protocol, the n training
// rows for the proper one), which rows train the predictor, and which rows are
// scored.

#include "prepbias/core.hpp"
#include "prepbias/models.hpp"
#include "prepbias/predictors.hpp"
#include "prepbias/rng.hpp"
#include "prepbias/stats.hpp"

#include <concepts>
#include <numeric>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace prepbias {

enum class EvalProtocol { leaky, proper };

struct ReplicateResult {
    double e_val = 0.0;
    double e_gen = 0.0;
    double null_gen = 0.0;  // generalization error of the zero predictor on the same draw
    bool converged = true;
};

template <class F>
concept ExperimentFamily = requires(const F& family, const SampleSet& data, RngStream& rng,
                                    const typename F::Transform& transform, const typename F::Predictor& predictor,
                                    Index count) {
    { family.train_size() } -> std::convertible_to<Index>;
    { family.validation_size() } -> std::convertible_to<Index>;
    { family.draw(rng, count, count) } -> std::same_as<SampleSet>;
    { family.draw_fresh(data, rng, count) } -> std::same_as<SampleSet>;
    { family.learn_transform(data) } -> std::same_as<typename F::Transform>;
    { family.fit(transform, data) } -> std::same_as<typename F::Predictor>;
    { family.predict(transform, predictor, data, count) } -> std::convertible_to<double>;
    { family.generalization_error(transform, predictor, data) } -> std::convertible_to<double>;
    { family.null_error(data) } -> std::convertible_to<double>;
};

inline bool is_converged(const LinearCoefficients& coeffs) noexcept { return coeffs.converged; }
template <class P>
bool is_converged(const P&) noexcept {
    return true;
}

inline std::vector<Index> index_range(Index first, Index count) {
    std::vector<Index> out(static_cast<std::size_t>(count));
    std::iota(out.begin(), out.end(), first);
    return out;
}

/// First n rows train, last m validate.
inline std::pair<SampleSet, SampleSet> split(const SampleSet& data, Index n, Index m) {
    require(n >= 1 && m >= 1, "split: n and m must be >= 1");
    require(n + m == data.rows(), "split: n + m must equal the row count");
    const auto train = index_range(0, n);
    const auto val = index_range(n, m);
    return {select_rows(data, train), select_rows(data, val)};
}

/// Mean squared loss of predictor(transform(x)) over every row of `rows`.
template <ExperimentFamily F>
double mean_loss(const F& family, const typename F::Transform& transform, const typename F::Predictor& predictor,
                 const SampleSet& rows) {
    double total = 0.0;
    for (Index i = 0; i < rows.rows(); ++i) {
        const double r = rows.responses[i] - family.predict(transform, predictor, rows, i);
        total += r * r;
    }
    return total / static_cast<double>(rows.rows());
}

/// Fresh-sample Monte Carlo estimate of the generalization error. Kept as an
/// independent cross-check on the analytic evaluators.
template <ExperimentFamily F>
AggregateStats holdout_error(const F& family, const typename F::Transform& transform,
                             const typename F::Predictor& predictor, const SampleSet& truth, RngStream& rng,
                             Index draws) {
    const SampleSet fresh = family.draw_fresh(truth, rng, draws);
    AggregateStats stats;
    for (Index i = 0; i < fresh.rows(); ++i) {
        const double r = fresh.responses[i] - family.predict(transform, predictor, fresh, i);
        stats.push(r * r);
    }
    return stats;
}

/// Scores one train/validation assignment of `data`'s rows.
template <ExperimentFamily F>
ReplicateResult evaluate_split(const F& family, EvalProtocol protocol, const SampleSet& data,
                               std::span<const Index> train_rows, std::span<const Index> validation_rows) {
    const SampleSet train = select_rows(data, train_rows);
    const SampleSet validation = select_rows(data, validation_rows);
    const auto transform = protocol == EvalProtocol::leaky ? family.learn_transform(data)
                                                           : family.learn_transform(train);
    const auto predictor = family.fit(transform, train);
    ReplicateResult out;
    out.e_val = mean_loss(family, transform, predictor, validation);
    out.e_gen = family.generalization_error(transform, predictor, data);
    out.null_gen = family.null_error(data);
    out.converged = is_converged(predictor);
    return out;
}

/// One train/validation replicate at the family's (n, m).
template <ExperimentFamily F>
ReplicateResult run_replicate(const F& family, EvalProtocol protocol, RngStream& rng) {
    const Index n = family.train_size();
    const Index m = family.validation_size();
    const SampleSet data = family.draw(rng, n, m);
    const auto train = index_range(0, n);
    const auto val = index_range(n, m);
    return evaluate_split(family, protocol, data, train, val);
}

/// One K-fold cross-validation replicate on folds * fold_size rows.
///
/// Leaky: the transform is learned once on every row. Proper: it is refit on
/// the training folds each time. e_val is the K-fold error (mean over folds of
/// the fold's validation loss); e_gen is the mean of the fold predictors' risks.
template <ExperimentFamily F>
ReplicateResult run_kfold_replicate(const F& family, EvalProtocol protocol, Index folds, Index fold_size,
                                    RngStream& rng) {
    require(folds >= 2, "kfold: folds must be >= 2");
    require(fold_size >= 1, "kfold: fold_size must be >= 1");
    const SampleSet data = family.draw(rng, (folds - 1) * fold_size, fold_size);
    std::optional<typename F::Transform> shared;
    if (protocol == EvalProtocol::leaky) shared.emplace(family.learn_transform(data));

    ReplicateResult out;
    out.null_gen = family.null_error(data);
    for (Index f = 0; f < folds; ++f) {
        std::vector<Index> train_rows;
        train_rows.reserve(static_cast<std::size_t>((folds - 1) * fold_size));
        for (Index i = 0; i < folds * fold_size; ++i)
            if (i / fold_size != f) train_rows.push_back(i);
        const auto validation_rows = index_range(f * fold_size, fold_size);
        const SampleSet train = select_rows(data, train_rows);
        const SampleSet validation = select_rows(data, validation_rows);
        const auto transform = shared ? *shared : family.learn_transform(train);
        const auto predictor = family.fit(transform, train);
        out.e_val += mean_loss(family, transform, predictor, validation);
        out.e_gen += family.generalization_error(transform, predictor, data);
        out.converged = out.converged && is_converged(predictor);
    }
    out.e_val /= static_cast<double>(folds);
    out.e_gen /= static_cast<double>(folds);
    return out;
}

}  // namespace prepbias
