#pragma once

// The four experiment families and their exact risk evaluators.

#include "prepbias/core.hpp"
#include "prepbias/models.hpp"
#include "prepbias/pipeline.hpp"
#include "prepbias/predictors.hpp"
#include "prepbias/preprocessors.hpp"

#include <string_view>
#include <variant>

namespace prepbias {

// ---------------------------------------------------------------------------
// Risk evaluators

/// sum_j delta_j^2 Var(x_j), delta_j = beta_j - beta_hat(j) on selected columns and beta_j elsewhere.
/// Exact for the noiseless model with independent zero-mean columns.
inline double varsel_risk(const SelectionDescriptor& selection, const LinearCoefficients& coeffs,
                          const Vector& true_beta, const VarSelConfig& cfg) {
    Vector delta = true_beta;
    for (std::size_t i = 0; i < selection.selected.size(); ++i)
        delta[selection.selected[i]] -= coeffs.beta[static_cast<Index>(i)];
    double risk = 0.0;
    for (Index j = 0; j < delta.size(); ++j) risk += delta[j] * delta[j] * cfg.column_variance(j);
    return risk;
}

/// sigma^2 + (1/C) sum_k (mu_k - f(T(k)))^2
inline double categorical_risk(const RareGrouping& grouping, const CategoryMeansModel& model,
                               const Vector& true_means, const CategoricalConfig& cfg) {
    double total = 0.0;
    for (int k = 1; k <= cfg.num_categories; ++k) {
        const double d = true_means[k - 1] - model.predict(grouping.apply(k));
        total += d * d;
    }
    return cfg.noise_sigma * cfg.noise_sigma + total / static_cast<double>(cfg.num_categories);
}

/// sum_j (beta_j - beta_hat_j / scale_j)^2 + sigma^2 for standard normal covariates.
inline double lasso_risk(const RescaleDescriptor& rescale, const LinearCoefficients& coeffs, const Vector& true_beta,
                         const LassoConfig& cfg) {
    const Vector delta = true_beta - coeffs.beta.cwiseQuotient(rescale.scales);
    return delta.squaredNorm() + cfg.noise_sigma * cfg.noise_sigma;
}

/// E[(y - f(x0))^2] = 1 + f(x0)^2 for y = x ~ N(0, 1): a fresh draw is never memorized.
template <class Predictor>
double pathological_risk(const Predictor& predictor, const Vector& x0) {
    const double at_x0 = predictor.predict(x0);
    return 1.0 + at_x0 * at_x0;
}

// ---------------------------------------------------------------------------
// Families

/// Variance- (or sum-of-squares-) based feature selection, then OLS without intercept.
class VarSelFamily {
public:
    using Transform = FeatureSelection;
    using Predictor = LinearCoefficients;

    VarSelFamily(VarSelConfig cfg, SelectionScore score) : cfg_(cfg), score_(score) { cfg_.validate(); }

    const VarSelConfig& config() const noexcept { return cfg_; }
    Index train_size() const noexcept { return cfg_.n; }
    Index validation_size() const noexcept { return cfg_.m; }

    SampleSet draw(RngStream& rng, Index n, Index m) const {
        VarSelConfig sized = cfg_;
        sized.n = n;
        sized.m = m;
        return gen_varsel_dataset(sized, rng);
    }
    SampleSet draw_fresh(const SampleSet& truth, RngStream& rng, Index rows) const {
        return draw_varsel_rows(cfg_, *truth.coefficients, rng, rows);
    }
    Transform learn_transform(const SampleSet& rows) const {
        return learn_selection(score_, rows.matrix(), cfg_.select_k);
    }
    Predictor fit(const Transform& t, const SampleSet& train) const {
        return fit_ols_no_intercept(t.apply_rows(train.matrix()), train.responses);
    }
    double predict(const Transform& t, const Predictor& f, const SampleSet& rows, Index i) const {
        const auto x = rows.matrix().row(i);
        double total = 0.0;
        for (std::size_t s = 0; s < t.descriptor().selected.size(); ++s)
            total += x[t.descriptor().selected[s]] * f.beta[static_cast<Index>(s)];
        return total;
    }
    double generalization_error(const Transform& t, const Predictor& f, const SampleSet& truth) const {
        return varsel_risk(t.descriptor(), f, *truth.coefficients, cfg_);
    }
    double null_error(const SampleSet& truth) const {
        return varsel_risk(SelectionDescriptor{}, LinearCoefficients{}, *truth.coefficients, cfg_);
    }

private:
    VarSelConfig cfg_;
    SelectionScore score_;
};

/// Rare-category grouping, then per-category training means.
class CategoricalFamily {
public:
    using Transform = RareGrouping;
    using Predictor = CategoryMeansModel;

    explicit CategoricalFamily(CategoricalConfig cfg) : cfg_(cfg) { cfg_.validate(); }

    const CategoricalConfig& config() const noexcept { return cfg_; }
    Index train_size() const noexcept { return cfg_.n; }
    Index validation_size() const noexcept { return cfg_.m; }

    SampleSet draw(RngStream& rng, Index n, Index m) const {
        CategoricalConfig sized = cfg_;
        sized.n = n;
        sized.m = m;
        return gen_categorical_dataset(sized, rng);
    }
    SampleSet draw_fresh(const SampleSet& truth, RngStream& rng, Index rows) const {
        return draw_categorical_rows(cfg_, *truth.category_means, rng, rows);
    }
    Transform learn_transform(const SampleSet& rows) const {
        return learn_rare_grouper(rows.categories(), cfg_.cutoff);
    }
    Predictor fit(const Transform& t, const SampleSet& train) const {
        return fit_category_means(train.categories(),
                                  std::span<const double>(train.responses.data(),
                                                          static_cast<std::size_t>(train.responses.size())),
                                  t);
    }
    double predict(const Transform& t, const Predictor& f, const SampleSet& rows, Index i) const {
        return f.predict(t.apply(rows.categories()[static_cast<std::size_t>(i)]));
    }
    double generalization_error(const Transform& t, const Predictor& f, const SampleSet& truth) const {
        return categorical_risk(t, f, *truth.category_means, cfg_);
    }
    double null_error(const SampleSet& truth) const {
        return cfg_.noise_sigma * cfg_.noise_sigma +
               truth.category_means->squaredNorm() / static_cast<double>(cfg_.num_categories);
    }

private:
    CategoricalConfig cfg_;
};

/// Root-mean-square rescaling, then Lasso (coordinate descent or the per-column simplification).
class LassoFamily {
public:
    using Transform = Rescaling;
    using Predictor = LinearCoefficients;

    explicit LassoFamily(LassoConfig cfg, LassoOptions options = {}) : cfg_(cfg), options_(options) {
        cfg_.validate();
    }

    const LassoConfig& config() const noexcept { return cfg_; }
    Index train_size() const noexcept { return cfg_.n; }
    Index validation_size() const noexcept { return cfg_.m; }

    SampleSet draw(RngStream& rng, Index n, Index m) const {
        LassoConfig sized = cfg_;
        sized.n = n;
        sized.m = m;
        return gen_lasso_dataset(sized, rng);
    }
    SampleSet draw_fresh(const SampleSet& truth, RngStream& rng, Index rows) const {
        return draw_lasso_rows(cfg_, *truth.coefficients, rng, rows);
    }
    Transform learn_transform(const SampleSet& rows) const { return learn_rescaler(rows.matrix()); }
    Predictor fit(const Transform& t, const SampleSet& train) const {
        const Matrix x = t.apply_rows(train.matrix());
        return cfg_.variant == LassoVariant::simplified ? fit_simplified_lasso(x, train.responses, cfg_.lambda)
                                                        : fit_lasso_cd(x, train.responses, cfg_.lambda, options_);
    }
    double predict(const Transform& t, const Predictor& f, const SampleSet& rows, Index i) const {
        const auto x = rows.matrix().row(i);
        double total = 0.0;
        for (Index j = 0; j < x.size(); ++j) total += x[j] / t.scales()[j] * f.beta[j];
        return total;
    }
    double generalization_error(const Transform& t, const Predictor& f, const SampleSet& truth) const {
        return lasso_risk(t.descriptor(), f, *truth.coefficients, cfg_);
    }
    double null_error(const SampleSet& truth) const {
        return truth.coefficients->squaredNorm() + cfg_.noise_sigma * cfg_.noise_sigma;
    }

private:
    LassoConfig cfg_;
    LassoOptions options_;
};

/// Memorize-or-collapse transform on y = x, then OLS without intercept.
class PathologicalFamily {
public:
    using Transform = Memorizer;
    using Predictor = LinearCoefficients;

    explicit PathologicalFamily(PathologicalConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        x0_ = Eigen::Map<const Vector>(cfg_.x0.data(), static_cast<Index>(cfg_.x0.size()));
    }

    const PathologicalConfig& config() const noexcept { return cfg_; }
    Index train_size() const noexcept { return cfg_.n; }
    Index validation_size() const noexcept { return cfg_.m; }

    SampleSet draw(RngStream& rng, Index n, Index m) const { return draw_pathological_rows(rng, n + m); }
    SampleSet draw_fresh(const SampleSet&, RngStream& rng, Index rows) const {
        return draw_pathological_rows(rng, rows);
    }
    Transform learn_transform(const SampleSet& rows) const { return pathological_transform(rows.matrix(), x0_); }
    Predictor fit(const Transform& t, const SampleSet& train) const {
        const Matrix& x = train.matrix();
        Matrix transformed(x.rows(), x.cols());
        for (Index i = 0; i < x.rows(); ++i) transformed.row(i) = t.apply(x.row(i)).transpose();
        return fit_ols_no_intercept(transformed, train.responses);
    }
    double predict(const Transform& t, const Predictor& f, const SampleSet& rows, Index i) const {
        return f.predict(t.apply(rows.matrix().row(i)));
    }
    double generalization_error(const Transform&, const Predictor& f, const SampleSet&) const {
        return pathological_risk(f, x0_);
    }
    double null_error(const SampleSet&) const { return 1.0; }

private:
    PathologicalConfig cfg_;
    Vector x0_;
};

static_assert(ExperimentFamily<VarSelFamily>);
static_assert(ExperimentFamily<CategoricalFamily>);
static_assert(ExperimentFamily<LassoFamily>);
static_assert(ExperimentFamily<PathologicalFamily>);

// ---------------------------------------------------------------------------
// Experiment configuration

enum class FamilyKind { varsel_linreg, categorical_grouping, rescaled_lasso, pathological };

using FamilyParams = std::variant<VarSelConfig, CategoricalConfig, LassoConfig, PathologicalConfig>;

struct ExperimentConfig {
    FamilyParams params;
    EvalProtocol protocol = EvalProtocol::leaky;
    SelectionScore selection_score = SelectionScore::variance;  // varsel only
    LassoOptions lasso_options{};                               // rescaled_lasso only

    FamilyKind family() const noexcept { return static_cast<FamilyKind>(params.index()); }

    Index n() const {
        return std::visit([](const auto& p) { return p.n; }, params);
    }
    Index m() const {
        return std::visit([](const auto& p) { return p.m; }, params);
    }
    void set_sizes(Index n, Index m) {
        std::visit(
            [&](auto& p) {
                p.n = n;
                p.m = m;
            },
            params);
    }
};

inline std::string_view family_name(FamilyKind kind) noexcept {
    switch (kind) {
        case FamilyKind::varsel_linreg: return "varsel_linreg";
        case FamilyKind::categorical_grouping: return "categorical_grouping";
        case FamilyKind::rescaled_lasso: return "rescaled_lasso";
        case FamilyKind::pathological: return "pathological";
    }
    return "unknown";
}

inline std::string_view protocol_name(EvalProtocol protocol) noexcept {
    return protocol == EvalProtocol::leaky ? "leaky" : "proper";
}

/// Builds the family object for `cfg` and hands it to `visitor`.
template <class Visitor>
decltype(auto) with_family(const ExperimentConfig& cfg, Visitor&& visitor) {
    switch (cfg.family()) {
        case FamilyKind::varsel_linreg:
            return visitor(VarSelFamily(std::get<VarSelConfig>(cfg.params), cfg.selection_score));
        case FamilyKind::categorical_grouping:
            return visitor(CategoricalFamily(std::get<CategoricalConfig>(cfg.params)));
        case FamilyKind::rescaled_lasso:
            return visitor(LassoFamily(std::get<LassoConfig>(cfg.params), cfg.lasso_options));
        case FamilyKind::pathological:
        default:
            return visitor(PathologicalFamily(std::get<PathologicalConfig>(cfg.params)));
    }
}

/// One train/validation replicate of `cfg`.
inline ReplicateResult run_replicate(const ExperimentConfig& cfg, RngStream& rng) {
    return with_family(cfg, [&](const auto& family) { return run_replicate(family, cfg.protocol, rng); });
}

}  // namespace prepbias
