#pragma once

// Deterministic parallel replicate execution.
//
// Replicate r always uses RngStream(master_seed, r). Replicates are grouped
// into fixed chunks of kChunkSize consecutive indices; each chunk is reduced
// serially in index order, and chunk results are combined by a fixed binary
// merge tree over chunk indices. Scheduling and thread count therefore never
// change a single bit of the result.

#include "prepbias/core.hpp"
#include "prepbias/experiments.hpp"
#include "prepbias/pipeline.hpp"
#include "prepbias/rng.hpp"
#include "prepbias/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace prepbias {

inline constexpr std::int64_t kChunkSize = 1024;

inline unsigned default_thread_count() noexcept {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Runs `body(rng, accumulator)` for replicates 0..n_reps-1 and returns the merged accumulator.
/// Acc must be default-constructible with `void merge(const Acc&)`.
/// Exceptions are rethrown as ReplicateError naming the lowest failing replicate.
template <class Acc, class Body>
Acc run_chunked(std::int64_t n_reps, std::uint64_t master_seed, unsigned threads, Body&& body) {
    require(n_reps >= 1, "run_chunked: n_reps must be >= 1");
    const std::int64_t n_chunks = (n_reps + kChunkSize - 1) / kChunkSize;
    std::vector<Acc> partial(static_cast<std::size_t>(n_chunks));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chunks));
    std::atomic<std::int64_t> next{0};

    auto worker = [&] {
        for (std::int64_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
            const std::int64_t first = c * kChunkSize;
            const std::int64_t last = std::min(n_reps, first + kChunkSize);
            Acc acc;
            std::int64_t r = first;
            try {
                for (; r < last; ++r) {
                    RngStream rng(master_seed, static_cast<std::uint64_t>(r));
                    body(rng, acc);
                }
            } catch (const ReplicateError&) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(c)] =
                    std::make_exception_ptr(ReplicateError(static_cast<std::uint64_t>(r), e.what()));
            }
            partial[static_cast<std::size_t>(c)] = std::move(acc);
        }
    };

    const unsigned n_threads =
        static_cast<unsigned>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads == 0 ? 1 : threads, n_chunks)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& error : errors)
        if (error) std::rethrow_exception(error);

    // Fixed-shape pairwise reduction.
    for (std::size_t width = 1; width < partial.size(); width *= 2)
        for (std::size_t i = 0; i + width < partial.size(); i += 2 * width) partial[i].merge(partial[i + width]);
    return std::move(partial.front());
}

struct ReplicateAggregate {
    AggregateStats e_val;
    AggregateStats e_gen;
    AggregateStats diff;
    AggregateStats null_gen;
    std::int64_t nonconverged = 0;

    void push(const ReplicateResult& r) {
        e_val.push(r.e_val);
        e_gen.push(r.e_gen);
        diff.push(r.e_val - r.e_gen);
        null_gen.push(r.null_gen);
        if (!r.converged) ++nonconverged;
    }

    void merge(const ReplicateAggregate& other) {
        e_val.merge(other.e_val);
        e_gen.merge(other.e_gen);
        diff.merge(other.diff);
        null_gen.merge(other.null_gen);
        nonconverged += other.nonconverged;
    }
};

struct BiasEstimate {
    double bias_mean = 0.0;
    double bias_se = 0.0;
    double e_val_mean = 0.0;
    double e_val_se = 0.0;
    double e_gen_mean = 0.0;
    double e_gen_se = 0.0;
    double null_mean = 0.0;
    double null_se = 0.0;
    std::int64_t n_reps = 0;
    std::uint64_t master_seed = 0;
    std::int64_t nonconverged_count = 0;

    /// At most 1% of replicates ended with a non-converged solver.
    bool healthy() const noexcept { return nonconverged_count * 100 <= n_reps; }

    bool operator==(const BiasEstimate&) const = default;
};

inline BiasEstimate summarize(const ReplicateAggregate& agg, std::uint64_t master_seed) {
    BiasEstimate out;
    out.bias_mean = agg.diff.mean;
    out.bias_se = agg.diff.standard_error();
    out.e_val_mean = agg.e_val.mean;
    out.e_val_se = agg.e_val.standard_error();
    out.e_gen_mean = agg.e_gen.mean;
    out.e_gen_se = agg.e_gen.standard_error();
    out.null_mean = agg.null_gen.mean;
    out.null_se = agg.null_gen.standard_error();
    out.n_reps = agg.diff.count;
    out.master_seed = master_seed;
    out.nonconverged_count = agg.nonconverged;
    return out;
}

/// Paired estimate of E[e_val - e_gen] over n_reps replicates.
inline BiasEstimate run_replicates(const ExperimentConfig& cfg, std::int64_t n_reps, std::uint64_t master_seed,
                                   unsigned threads = default_thread_count()) {
    require(n_reps >= 2, "run_replicates: n_reps must be >= 2");
    return with_family(cfg, [&](const auto& family) {
        const auto agg = run_chunked<ReplicateAggregate>(n_reps, master_seed, threads,
                                                         [&](RngStream& rng, ReplicateAggregate& acc) {
                                                             acc.push(run_replicate(family, cfg.protocol, rng));
                                                         });
        return summarize(agg, master_seed);
    });
}

inline BiasEstimate estimate_bias(const ExperimentConfig& cfg, std::int64_t n_reps, std::uint64_t master_seed,
                                  unsigned threads = default_thread_count()) {
    return run_replicates(cfg, n_reps, master_seed, threads);
}

/// K-fold version: mean of (e_Kcv - e_gen) on folds * fold_size rows per replicate.
/// The config's own n and m are ignored.
inline BiasEstimate kfold_bias(const ExperimentConfig& cfg, std::int64_t folds, std::int64_t fold_size,
                               std::int64_t n_reps, std::uint64_t master_seed,
                               unsigned threads = default_thread_count()) {
    require(n_reps >= 2, "kfold_bias: n_reps must be >= 2");
    require(folds >= 2, "kfold_bias: folds must be >= 2");
    return with_family(cfg, [&](const auto& family) {
        const auto agg = run_chunked<ReplicateAggregate>(
            n_reps, master_seed, threads, [&](RngStream& rng, ReplicateAggregate& acc) {
                acc.push(run_kfold_replicate(family, cfg.protocol, folds, fold_size, rng));
            });
        return summarize(agg, master_seed);
    });
}

}  // namespace prepbias
