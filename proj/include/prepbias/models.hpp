#pragma once

// Sampling models for the three experiment families plus the one-dimensional
// y = x model used with the memorizing transform.

#include "prepbias/core.hpp"
#include "prepbias/rng.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace prepbias {

enum class BaseDist { gaussian, student_t4 };

/// Variance of one raw draw from the base distribution (t(4) is left unstandardized).
inline constexpr double base_variance(BaseDist dist) noexcept {
    return dist == BaseDist::gaussian ? 1.0 : 2.0;
}

struct VarSelConfig {
    Index p = 100;
    Index big_m = 4;        // leading columns multiplied by scale_c
    double scale_c = 4.0;
    Index select_k = 8;
    BaseDist base_dist = BaseDist::gaussian;
    Index n = 20;
    Index m = 20;

    void validate() const {
        require(p >= 1, "varsel: p must be >= 1");
        require(big_m >= 1 && big_m <= p, "varsel: big_m must lie in [1, p]");
        require(select_k >= 1 && select_k <= p, "varsel: select_k must lie in [1, p]");
        require(scale_c >= 1.0, "varsel: scale_c must be >= 1");
        require(n >= 1 && m >= 1, "varsel: n and m must be >= 1");
    }

    /// Population variance of column j (0-based).
    double column_variance(Index j) const noexcept {
        const double v = base_variance(base_dist);
        return j < big_m ? scale_c * scale_c * v : v;
    }
};

struct CategoricalConfig {
    int num_categories = 20;
    int cutoff = 2;
    double noise_sigma = 0.0;
    Index n = 20;
    Index m = 1;

    void validate() const {
        require(num_categories >= 1, "categorical: num_categories must be >= 1");
        require(cutoff >= 1, "categorical: cutoff must be >= 1");
        require(noise_sigma >= 0.0, "categorical: noise_sigma must be >= 0");
        require(n >= 1 && m >= 1, "categorical: n and m must be >= 1");
    }
};

enum class LassoVariant { full_cd, simplified };

// orthogonal: the n training rows form sqrt(n) times a random orthonormal frame,
// so X^T X = n I on the training set; validation and fresh rows stay Gaussian.
enum class LassoDesign { gaussian, orthogonal };

struct LassoConfig {
    Index p = 5;
    double lambda = 0.5;
    double noise_sigma = 0.1;
    Index n = 20;
    Index m = 1;
    LassoVariant variant = LassoVariant::full_cd;
    LassoDesign design = LassoDesign::gaussian;

    void validate() const {
        require(p >= 1, "lasso: p must be >= 1");
        require(lambda >= 0.0, "lasso: lambda must be >= 0");
        require(noise_sigma >= 0.0, "lasso: noise_sigma must be >= 0");
        require(n >= 1 && m >= 1, "lasso: n and m must be >= 1");
        require(design == LassoDesign::gaussian || n >= p,
                "lasso: orthogonal design needs n >= p");
    }
};

/// y = x with x ~ N(0, 1), transformed by the memorize-or-collapse map with fallback point x0.
struct PathologicalConfig {
    std::vector<double> x0{0.0};
    Index n = 10;
    Index m = 1;

    void validate() const {
        require(x0.size() == 1, "pathological: x0 must have exactly one coordinate");
        require(n >= 1 && m >= 1, "pathological: n and m must be >= 1");
    }
};

/// Category labels are 1-based.
using Categories = std::vector<int>;

struct SampleSet {
    std::variant<Matrix, Categories> features;
    Vector responses;
    std::optional<Vector> coefficients;
    std::optional<Vector> category_means;

    Index rows() const noexcept { return responses.size(); }
    bool is_categorical() const noexcept { return std::holds_alternative<Categories>(features); }
    const Matrix& matrix() const { return std::get<Matrix>(features); }
    const Categories& categories() const { return std::get<Categories>(features); }
};

/// Copy of the listed rows, in the listed order. True parameters are carried along.
inline SampleSet select_rows(const SampleSet& data, std::span<const Index> rows) {
    SampleSet out;
    out.coefficients = data.coefficients;
    out.category_means = data.category_means;
    out.responses.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out.responses[static_cast<Index>(i)] = data.responses[rows[i]];
    if (data.is_categorical()) {
        const auto& source = data.categories();
        Categories cats(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) cats[i] = source[static_cast<std::size_t>(rows[i])];
        out.features = std::move(cats);
    } else {
        const auto& source = data.matrix();
        Matrix x(static_cast<Index>(rows.size()), source.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Index>(i)) = source.row(rows[i]);
        out.features = std::move(x);
    }
    return out;
}

inline Matrix sample_standard_gaussian(RngStream& rng, Index rows, Index cols) {
    require(rows >= 1 && cols >= 1, "sample_standard_gaussian: rows and cols must be >= 1");
    Matrix x(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) x(i, j) = rng.normal();
    return x;
}

inline Matrix sample_t4(RngStream& rng, Index rows, Index cols) {
    require(rows >= 1 && cols >= 1, "sample_t4: rows and cols must be >= 1");
    Matrix x(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) x(i, j) = rng.student_t4();
    return x;
}

inline Vector sample_gaussian_vector(RngStream& rng, Index size) {
    Vector v(size);
    for (Index i = 0; i < size; ++i) v[i] = rng.normal();
    return v;
}

// ---------------------------------------------------------------------------
// Row samplers given fixed true parameters. The dataset generators draw the
// parameters first and then call these; holdout evaluation reuses them.

inline SampleSet draw_varsel_rows(const VarSelConfig& cfg, const Vector& beta, RngStream& rng, Index rows) {
    Matrix x = cfg.base_dist == BaseDist::gaussian ? sample_standard_gaussian(rng, rows, cfg.p)
                                                   : sample_t4(rng, rows, cfg.p);
    x.leftCols(cfg.big_m) *= cfg.scale_c;
    SampleSet out;
    out.responses = x * beta;
    out.features = std::move(x);
    out.coefficients = beta;
    return out;
}

inline SampleSet draw_categorical_rows(const CategoricalConfig& cfg, const Vector& means, RngStream& rng,
                                       Index rows) {
    Categories cats(static_cast<std::size_t>(rows));
    Vector y(rows);
    for (Index i = 0; i < rows; ++i) {
        const int k = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cfg.num_categories)));
        cats[static_cast<std::size_t>(i)] = k;
        y[i] = means[k - 1] + cfg.noise_sigma * rng.normal();
    }
    SampleSet out;
    out.features = std::move(cats);
    out.responses = std::move(y);
    out.category_means = means;
    return out;
}

inline SampleSet draw_lasso_rows(const LassoConfig& cfg, const Vector& beta, RngStream& rng, Index rows,
                                 Index orthogonal_rows = 0) {
    Matrix x(rows, cfg.p);
    Index first_gaussian = 0;
    if (orthogonal_rows > 0) {
        Eigen::MatrixXd g(orthogonal_rows, cfg.p);
        for (Index i = 0; i < orthogonal_rows; ++i)
            for (Index j = 0; j < cfg.p; ++j) g(i, j) = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(orthogonal_rows, cfg.p);
        x.topRows(orthogonal_rows) = std::sqrt(static_cast<double>(orthogonal_rows)) * q;
        first_gaussian = orthogonal_rows;
    }
    for (Index i = first_gaussian; i < rows; ++i)
        for (Index j = 0; j < cfg.p; ++j) x(i, j) = rng.normal();
    SampleSet out;
    out.responses = x * beta;
    for (Index i = 0; i < rows; ++i) out.responses[i] += cfg.noise_sigma * rng.normal();
    out.features = std::move(x);
    out.coefficients = beta;
    return out;
}

inline SampleSet draw_pathological_rows(RngStream& rng, Index rows) {
    Matrix x = sample_standard_gaussian(rng, rows, 1);
    SampleSet out;
    out.responses = x.col(0);
    out.features = std::move(x);
    out.coefficients = Vector::Ones(1);
    return out;
}

// ---------------------------------------------------------------------------
// Full datasets of n + m rows.

inline SampleSet gen_varsel_dataset(const VarSelConfig& cfg, RngStream& rng) {
    cfg.validate();
    const Vector beta = sample_gaussian_vector(rng, cfg.p);
    return draw_varsel_rows(cfg, beta, rng, cfg.n + cfg.m);
}

inline SampleSet gen_categorical_dataset(const CategoricalConfig& cfg, RngStream& rng) {
    cfg.validate();
    const Vector means = sample_gaussian_vector(rng, cfg.num_categories);
    return draw_categorical_rows(cfg, means, rng, cfg.n + cfg.m);
}

inline SampleSet gen_lasso_dataset(const LassoConfig& cfg, RngStream& rng) {
    cfg.validate();
    const Vector beta = sample_gaussian_vector(rng, cfg.p);
    return draw_lasso_rows(cfg, beta, rng, cfg.n + cfg.m,
                           cfg.design == LassoDesign::orthogonal ? cfg.n : 0);
}

inline SampleSet gen_pathological_dataset(const PathologicalConfig& cfg, RngStream& rng) {
    cfg.validate();
    return draw_pathological_rows(rng, cfg.n + cfg.m);
}

}  // namespace prepbias
