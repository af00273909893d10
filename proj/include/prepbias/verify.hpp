#pragma once

// Oracle verification suites behind `prepbias verify <suite>`.
//
// Each check compares a pipeline Monte Carlo estimate against an independent
// reference and passes when the gap is within 4 combined standard errors
// (or is exactly zero, for the pathological suite).

#include "prepbias/experiments.hpp"
#include "prepbias/mc_engine.hpp"
#include "prepbias/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace prepbias {

inline constexpr double kSeTolerance = 4.0;

struct Check {
    std::string name;
    double reference = 0.0;
    double estimate = 0.0;
    double se = 0.0;  // combined standard error of estimate - reference
    bool pass = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<Check> checks;
    bool passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return !checks.empty();
    }
};

struct VerifyOptions {
    std::int64_t reps = 0;  // 0 keeps each suite's default
    std::uint64_t seed = 1;
    unsigned threads = default_thread_count();

    std::int64_t reps_or(std::int64_t fallback) const { return reps > 0 ? reps : fallback; }
};

inline Check within_se(std::string name, double reference, double estimate, double se) {
    Check c{std::move(name), reference, estimate, se, false};
    c.pass = std::abs(estimate - reference) < kSeTolerance * se;
    return c;
}

inline double combined_se(double a, double b) { return std::sqrt(a * a + b * b); }

inline void print_check(std::ostream& out, const Check& c) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-48s ref=% .6g est=% .6g se=%.3g  %s", c.name.c_str(), c.reference,
                  c.estimate, c.se, c.pass ? "PASS" : "FAIL");
    out << line << '\n';
}

// ---------------------------------------------------------------------------
// Config shorthands

inline ExperimentConfig categorical_experiment(Index n, Index m, int num_categories, int cutoff, double sigma,
                                               EvalProtocol protocol = EvalProtocol::leaky) {
    CategoricalConfig c;
    c.num_categories = num_categories;
    c.cutoff = cutoff;
    c.noise_sigma = sigma;
    c.n = n;
    c.m = m;
    ExperimentConfig cfg;
    cfg.params = c;
    cfg.protocol = protocol;
    return cfg;
}

inline ExperimentConfig varsel_experiment(Index p, Index big_m, double scale_c, Index select_k, BaseDist base,
                                          SelectionScore score, Index n, Index m,
                                          EvalProtocol protocol = EvalProtocol::leaky) {
    VarSelConfig v;
    v.p = p;
    v.big_m = big_m;
    v.scale_c = scale_c;
    v.select_k = select_k;
    v.base_dist = base;
    v.n = n;
    v.m = m;
    ExperimentConfig cfg;
    cfg.params = v;
    cfg.protocol = protocol;
    cfg.selection_score = score;
    return cfg;
}

inline ExperimentConfig lasso_experiment(Index p, double lambda, double sigma, Index n, Index m, LassoVariant variant,
                                         LassoDesign design = LassoDesign::gaussian,
                                         EvalProtocol protocol = EvalProtocol::leaky) {
    LassoConfig l;
    l.p = p;
    l.lambda = lambda;
    l.noise_sigma = sigma;
    l.n = n;
    l.m = m;
    l.variant = variant;
    l.design = design;
    ExperimentConfig cfg;
    cfg.params = l;
    cfg.protocol = protocol;
    return cfg;
}

/// Feature-selection setting with K = C = m = 1 and sum-of-squares scores.
inline ExperimentConfig single_feature_experiment(Index p, Index n) {
    return varsel_experiment(p, 1, 1.0, 1, BaseDist::gaussian, SelectionScore::sum_squares, n, 1);
}

// ---------------------------------------------------------------------------
// Suites

inline SuiteReport verify_eq31(const VerifyOptions& opt) {
    SuiteReport report{"eq31", {}};
    const std::int64_t reps = opt.reps_or(1'000'000);
    for (Index n : {10, 20, 40}) {
        const auto est = estimate_bias(categorical_experiment(n, 1, 20, 2, 0.0), reps, opt.seed, opt.threads);
        report.checks.push_back(within_se("bias n=" + std::to_string(n) + " C=20", eq31_bias(n, 20), est.bias_mean,
                                          est.bias_se));
    }
    return report;
}

inline SuiteReport verify_thm2(const VerifyOptions& opt) {
    SuiteReport report{"thm2", {}};
    const std::int64_t reps = opt.reps_or(100'000);
    const Index p = 50;
    const Index n = 10;
    const auto lhs = estimate_bias(single_feature_experiment(p, n), reps, opt.seed, opt.threads);
    const auto rhs = thm2_rhs_mc(n, p, reps, opt.seed + 1, opt.threads);
    report.checks.push_back(within_se("bias vs covariance form p=50 n=10", rhs.value, lhs.bias_mean,
                                      combined_se(lhs.bias_se, rhs.se)));
    return report;
}

/// Analytic e_val, e_gen and bias against the pipeline at rare-category configs with C=20, M=4.
inline SuiteReport verify_thm3(const VerifyOptions& opt) {
    SuiteReport report{"thm3", {}};
    const std::int64_t reps = opt.reps_or(100'000);
    std::uint64_t seed = opt.seed;
    for (double sigma : {0.25, 1.5})
        for (Index n : {10, 40})
            for (bool m_equals_n : {true, false}) {
                const Index m = m_equals_n ? n : 1;
                const auto est = estimate_bias(categorical_experiment(n, m, 20, 4, sigma), reps, seed++, opt.threads);
                const double val = thm3_mse(1.0, sigma, categorical_probs(n, m, 20, 4, true));
                const double gen = thm3_mse(1.0, sigma, categorical_probs(n, m, 20, 4, false));
                char tag[64];
                std::snprintf(tag, sizeof tag, "sigma=%g n=%d m=%d", sigma, static_cast<int>(n), static_cast<int>(m));
                report.checks.push_back(within_se(std::string("e_val ") + tag, val, est.e_val_mean, est.e_val_se));
                report.checks.push_back(within_se(std::string("e_gen ") + tag, gen, est.e_gen_mean, est.e_gen_se));
                report.checks.push_back(within_se(std::string("bias ") + tag, val - gen, est.bias_mean, est.bias_se));
            }
    return report;
}

inline SuiteReport verify_thm4(const VerifyOptions& opt) {
    SuiteReport report{"thm4", {}};
    const std::int64_t reps = opt.reps_or(200'000);
    const auto cfg = lasso_experiment(5, 0.5, 0.0, 10, 1, LassoVariant::simplified, LassoDesign::orthogonal);
    const auto lhs = estimate_bias(cfg, reps, opt.seed, opt.threads);
    const auto cov = thm4_cov_mc(std::get<LassoConfig>(cfg.params), reps, opt.seed + 1, opt.threads);
    report.checks.push_back(
        within_se("bias vs p*Cov(clip^2, x^2)", cov.value, lhs.bias_mean, combined_se(lhs.bias_se, cov.se)));
    report.checks.push_back(
        {"bias positive", 0.0, lhs.bias_mean, lhs.bias_se, lhs.bias_mean > kSeTolerance * lhs.bias_se});
    report.checks.push_back({"covariance positive", 0.0, cov.value, cov.se, cov.value > kSeTolerance * cov.se});
    return report;
}

struct ExactnessCount {
    std::int64_t total = 0;
    std::int64_t val_mismatch = 0;
    std::int64_t gen_mismatch = 0;
    double worst_val = 0.0;
    double worst_gen = 0.0;
    void merge(const ExactnessCount& o) {
        total += o.total;
        val_mismatch += o.val_mismatch;
        gen_mismatch += o.gen_mismatch;
        worst_val = std::max(worst_val, o.worst_val);
        worst_gen = std::max(worst_gen, o.worst_gen);
    }
};

/// Every replicate of the memorizing transform must give e_val = 0 and e_gen = 1 exactly.
inline ExactnessCount pathological_exactness(std::int64_t reps, std::uint64_t seed, unsigned threads) {
    ExperimentConfig cfg;
    cfg.params = PathologicalConfig{{0.0}, 10, 1};
    cfg.protocol = EvalProtocol::leaky;
    return run_chunked<ExactnessCount>(reps, seed, threads, [&](RngStream& rng, ExactnessCount& acc) {
        const auto r = run_replicate(cfg, rng);
        ++acc.total;
        if (r.e_val != 0.0) ++acc.val_mismatch;
        if (r.e_gen != 1.0) ++acc.gen_mismatch;
        acc.worst_val = std::max(acc.worst_val, std::abs(r.e_val));
        acc.worst_gen = std::max(acc.worst_gen, std::abs(r.e_gen - 1.0));
    });
}

inline SuiteReport verify_pathological(const VerifyOptions& opt) {
    SuiteReport report{"pathological", {}};
    const auto counts = pathological_exactness(opt.reps_or(10'000), opt.seed, opt.threads);
    report.checks.push_back({"e_val == 0 in every replicate", 0.0, counts.worst_val, 0.0, counts.val_mismatch == 0});
    report.checks.push_back({"e_gen == 1 in every replicate", 1.0, 1.0 + counts.worst_gen, 0.0, counts.gen_mismatch == 0});
    return report;
}

/// Mid-grid configurations used for the held-out unbiasedness checks.
inline std::vector<std::pair<std::string, ExperimentConfig>> proper_protocol_configs() {
    return {
        {"varsel p=100 n=30 m=1",
         varsel_experiment(100, 4, 4.0, 8, BaseDist::gaussian, SelectionScore::variance, 30, 1, EvalProtocol::proper)},
        {"categorical C=20 M=4 sigma=0.25 n=20 m=20",
         categorical_experiment(20, 20, 20, 4, 0.25, EvalProtocol::proper)},
        {"lasso p=5 lambda=0.5 sigma=0.1 n=20 m=1",
         lasso_experiment(5, 0.5, 0.1, 20, 1, LassoVariant::full_cd, LassoDesign::gaussian, EvalProtocol::proper)},
    };
}

inline SuiteReport verify_proper_unbiased(const VerifyOptions& opt) {
    SuiteReport report{"proper_unbiased", {}};
    const std::int64_t reps = opt.reps_or(100'000);
    std::uint64_t seed = opt.seed;
    for (const auto& [name, cfg] : proper_protocol_configs()) {
        const auto est = estimate_bias(cfg, reps, seed++, opt.threads);
        report.checks.push_back(within_se("proper bias " + name, 0.0, est.bias_mean, est.bias_se));
    }
    return report;
}

inline SuiteReport verify_kfold(const VerifyOptions& opt) {
    SuiteReport report{"kfold", {}};
    const std::int64_t reps = opt.reps_or(100'000);
    const std::vector<std::pair<std::string, ExperimentConfig>> cases{
        {"categorical C=20 M=4 sigma=0.25 fold=10", categorical_experiment(10, 10, 20, 4, 0.25)},
        {"varsel p=100 fold=20",
         varsel_experiment(100, 4, 4.0, 8, BaseDist::gaussian, SelectionScore::variance, 20, 20)},
    };
    std::uint64_t seed = opt.seed;
    for (const auto& [name, cfg] : cases) {
        const Index fold = cfg.n();
        const auto cv = kfold_bias(cfg, 2, fold, reps, seed++, opt.threads);
        const auto single = estimate_bias(cfg, reps, seed++, opt.threads);
        report.checks.push_back(within_se("2-fold vs single split " + name, single.bias_mean, cv.bias_mean,
                                          combined_se(cv.bias_se, single.bias_se)));
    }
    return report;
}

inline const std::map<std::string, std::function<SuiteReport(const VerifyOptions&)>>& verify_suites() {
    static const std::map<std::string, std::function<SuiteReport(const VerifyOptions&)>> suites{
        {"eq31", verify_eq31},
        {"thm2", verify_thm2},
        {"thm3", verify_thm3},
        {"thm4", verify_thm4},
        {"pathological", verify_pathological},
        {"proper_unbiased", verify_proper_unbiased},
        {"kfold", verify_kfold},
    };
    return suites;
}

}  // namespace prepbias
