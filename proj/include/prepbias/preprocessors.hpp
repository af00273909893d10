#pragma once

// Unsupervised transform learners. Each learner sees feature vectors only and
// returns an immutable fitted transform.
//
// Every learner is symmetric in its input rows, bit for bit: per-column sums
// are taken over values sorted ascending, so the learned descriptor does not
// depend on row order. Score ties are broken by ascending column index.

#include "prepbias/core.hpp"
#include "prepbias/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace prepbias {

namespace detail {

/// Sum after sorting ascending; independent of the input order.
inline double canonical_sum(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    double total = 0.0;
    for (double v : values) total += v;
    return total;
}

inline std::vector<double> column_values(const Matrix& x, Index j) {
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = x(i, j);
    return out;
}

inline double column_mean(const Matrix& x, Index j) {
    auto values = column_values(x, j);
    return canonical_sum(values) / static_cast<double>(x.rows());
}

inline double column_sum_squares(const Matrix& x, Index j, double center = 0.0) {
    std::vector<double> values(static_cast<std::size_t>(x.rows()));
    for (Index i = 0; i < x.rows(); ++i) {
        const double d = x(i, j) - center;
        values[static_cast<std::size_t>(i)] = d * d;
    }
    return canonical_sum(values);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Feature selection

enum class SelectionScore { variance, sum_squares };

struct SelectionDescriptor {
    std::vector<Index> selected;  // ascending, 0-based
    Vector scores;                // one per input column

    bool operator==(const SelectionDescriptor& other) const {
        return selected == other.selected && scores.size() == other.scores.size() &&
               (scores.array() == other.scores.array()).all();
    }
};

/// Keeps the selected columns of a feature vector.
class FeatureSelection {
public:
    explicit FeatureSelection(SelectionDescriptor descriptor) : descriptor_(std::move(descriptor)) {}

    const SelectionDescriptor& descriptor() const noexcept { return descriptor_; }
    Index output_dim() const noexcept { return static_cast<Index>(descriptor_.selected.size()); }

    template <class Row>
    Vector apply(const Row& x) const {
        Vector out(output_dim());
        for (Index i = 0; i < output_dim(); ++i) out[i] = x[descriptor_.selected[static_cast<std::size_t>(i)]];
        return out;
    }

    Matrix apply_rows(const Matrix& x) const {
        Matrix out(x.rows(), output_dim());
        for (Index i = 0; i < output_dim(); ++i) out.col(i) = x.col(descriptor_.selected[static_cast<std::size_t>(i)]);
        return out;
    }

private:
    SelectionDescriptor descriptor_;
};

/// Indices of the k largest scores, ties to the lower index, returned ascending.
inline std::vector<Index> top_k_indices(const Vector& scores, Index k) {
    std::vector<Index> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    });
    order.resize(static_cast<std::size_t>(k));
    std::sort(order.begin(), order.end());
    return order;
}

/// Top-k columns by centered sample variance (divisor rows - 1; rows = 1 gives zero scores).
inline FeatureSelection learn_topk_variance(const Matrix& features, Index k) {
    require(k >= 1 && k <= features.cols(), "learn_topk_variance: k must lie in [1, p]");
    require(features.rows() >= 1, "learn_topk_variance: no rows");
    Vector scores(features.cols());
    const double divisor = features.rows() > 1 ? static_cast<double>(features.rows() - 1) : 1.0;
    for (Index j = 0; j < features.cols(); ++j)
        scores[j] = detail::column_sum_squares(features, j, detail::column_mean(features, j)) / divisor;
    auto selected = top_k_indices(scores, k);
    return FeatureSelection({std::move(selected), std::move(scores)});
}

/// Top-k columns by uncentered sum of squares.
inline FeatureSelection learn_topk_sumsq(const Matrix& features, Index k) {
    require(k >= 1 && k <= features.cols(), "learn_topk_sumsq: k must lie in [1, p]");
    Vector scores(features.cols());
    for (Index j = 0; j < features.cols(); ++j) scores[j] = detail::column_sum_squares(features, j);
    auto selected = top_k_indices(scores, k);
    return FeatureSelection({std::move(selected), std::move(scores)});
}

inline FeatureSelection learn_selection(SelectionScore score, const Matrix& features, Index k) {
    return score == SelectionScore::variance ? learn_topk_variance(features, k) : learn_topk_sumsq(features, k);
}

// ---------------------------------------------------------------------------
// Rescaling by root mean square

struct RescaleDescriptor {
    Vector scales;

    bool operator==(const RescaleDescriptor& other) const {
        return scales.size() == other.scales.size() && (scales.array() == other.scales.array()).all();
    }
};

class Rescaling {
public:
    explicit Rescaling(RescaleDescriptor descriptor) : descriptor_(std::move(descriptor)) {}

    const RescaleDescriptor& descriptor() const noexcept { return descriptor_; }
    const Vector& scales() const noexcept { return descriptor_.scales; }

    template <class Row>
    Vector apply(const Row& x) const {
        const Vector v = x;
        return v.cwiseQuotient(descriptor_.scales);
    }

    Matrix apply_rows(const Matrix& x) const {
        return x * descriptor_.scales.cwiseInverse().asDiagonal();
    }

private:
    RescaleDescriptor descriptor_;
};

/// scale_j = sqrt(mean_i x_ij^2) over all supplied rows.
inline Rescaling learn_rescaler(const Matrix& features) {
    require(features.rows() >= 1, "learn_rescaler: no rows");
    Vector scales(features.cols());
    for (Index j = 0; j < features.cols(); ++j) {
        scales[j] = std::sqrt(detail::column_sum_squares(features, j) / static_cast<double>(features.rows()));
        if (!(scales[j] > 0.0)) throw DegenerateColumnError("learn_rescaler: zero scale", j);
    }
    return Rescaling({std::move(scales)});
}

// ---------------------------------------------------------------------------
// Standardization (learned from training rows only; the proper-protocol reference)

class Standardization {
public:
    Standardization(Vector means, Vector stddevs) : means_(std::move(means)), stddevs_(std::move(stddevs)) {}

    const Vector& means() const noexcept { return means_; }
    const Vector& stddevs() const noexcept { return stddevs_; }

    template <class Row>
    Vector apply(const Row& x) const {
        const Vector v = x;
        return (v - means_).cwiseQuotient(stddevs_);
    }

    bool operator==(const Standardization& other) const {
        return (means_.array() == other.means_.array()).all() && (stddevs_.array() == other.stddevs_.array()).all();
    }

private:
    Vector means_;
    Vector stddevs_;
};

/// Per-column (x - mean) / sd with the sample standard deviation (divisor rows - 1).
inline Standardization learn_standardizer(const Matrix& train_features) {
    require(train_features.rows() >= 2, "learn_standardizer: need at least two training rows");
    const Index p = train_features.cols();
    Vector means(p), sds(p);
    for (Index j = 0; j < p; ++j) {
        means[j] = detail::column_mean(train_features, j);
        sds[j] = std::sqrt(detail::column_sum_squares(train_features, j, means[j]) /
                           static_cast<double>(train_features.rows() - 1));
        if (!(sds[j] > 0.0)) throw DegenerateColumnError("learn_standardizer: zero variance", j);
    }
    return Standardization(std::move(means), std::move(sds));
}

// ---------------------------------------------------------------------------
// Rare-category grouping

inline constexpr int kRareCategory = 0;

struct RareSetDescriptor {
    std::vector<int> rare;         // observed labels with count < cutoff, ascending
    std::vector<Index> counts;     // counts[label], label 0 unused
    int cutoff = 1;

    bool operator==(const RareSetDescriptor&) const = default;
};

/// Maps a label to kRareCategory when it appears fewer than cutoff times
/// in the learning rows (never-seen labels included).
class RareGrouping {
public:
    explicit RareGrouping(RareSetDescriptor descriptor) : descriptor_(std::move(descriptor)) {}

    const RareSetDescriptor& descriptor() const noexcept { return descriptor_; }

    Index count(int label) const noexcept {
        const auto idx = static_cast<std::size_t>(label);
        return idx < descriptor_.counts.size() ? descriptor_.counts[idx] : 0;
    }

    bool is_rare(int label) const noexcept { return count(label) < descriptor_.cutoff; }

    int apply(int label) const noexcept { return is_rare(label) ? kRareCategory : label; }

private:
    RareSetDescriptor descriptor_;
};

inline RareGrouping learn_rare_grouper(std::span<const int> categories, int cutoff) {
    require(cutoff >= 1, "learn_rare_grouper: cutoff must be >= 1");
    int max_label = 0;
    for (int k : categories) {
        require(k >= 1, "learn_rare_grouper: category labels are 1-based");
        max_label = std::max(max_label, k);
    }
    RareSetDescriptor d;
    d.cutoff = cutoff;
    d.counts.assign(static_cast<std::size_t>(max_label) + 1, 0);
    for (int k : categories) ++d.counts[static_cast<std::size_t>(k)];
    for (int k = 1; k <= max_label; ++k) {
        const Index c = d.counts[static_cast<std::size_t>(k)];
        if (c > 0 && c < cutoff) d.rare.push_back(k);
    }
    return RareGrouping(std::move(d));
}

// ---------------------------------------------------------------------------
// Memorize-or-collapse transform

/// Identity on the memorized rows (bit-exact match), the fixed point x0 elsewhere.
class Memorizer {
public:
    Memorizer(std::vector<std::vector<double>> rows, Vector x0) : rows_(std::move(rows)), x0_(std::move(x0)) {}

    const std::vector<std::vector<double>>& memorized() const noexcept { return rows_; }
    const Vector& fallback() const noexcept { return x0_; }

    template <class Row>
    bool contains(const Row& x) const {
        std::vector<double> key(static_cast<std::size_t>(x.size()));
        for (Index j = 0; j < x.size(); ++j) key[static_cast<std::size_t>(j)] = x[j];
        return std::binary_search(rows_.begin(), rows_.end(), key);
    }

    template <class Row>
    Vector apply(const Row& x) const {
        if (contains(x)) return Vector(x);
        return x0_;
    }

    bool operator==(const Memorizer& other) const {
        return rows_ == other.rows_ && (x0_.array() == other.x0_.array()).all();
    }

private:
    std::vector<std::vector<double>> rows_;  // lexicographically sorted
    Vector x0_;
};

inline Memorizer pathological_transform(const Matrix& features, const Vector& x0) {
    require(x0.size() == features.cols(), "pathological_transform: x0 dimension mismatch");
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(features.rows()));
    for (Index i = 0; i < features.rows(); ++i) {
        rows[static_cast<std::size_t>(i)].assign(features.row(i).data(), features.row(i).data() + features.cols());
    }
    std::sort(rows.begin(), rows.end());
    return Memorizer(std::move(rows), x0);
}

}  // namespace prepbias
