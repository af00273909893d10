#pragma once

// Result table written by `prepbias run` and read by the figure renderer.

#include "prepbias/config.hpp"
#include "prepbias/mc_engine.hpp"

#include <array>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>

namespace prepbias {

inline constexpr std::array<std::string_view, 16> kCsvColumns{
    "experiment", "protocol",  "n",          "m",         "p_or_C",    "extra_param", "n_reps",     "seed",
    "e_val_mean", "e_val_se",  "e_gen_mean", "e_gen_se",  "bias_mean", "bias_se",     "null_error", "nonconverged_count"};

inline std::string format_number(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.10g", value);
    return buffer;
}

inline void write_csv_header(std::ostream& out) {
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) out << (i ? "," : "") << kCsvColumns[i];
    out << '\n';
}

inline void write_csv_row(std::ostream& out, std::string_view experiment, const GridPoint& point,
                          const BiasEstimate& estimate) {
    const auto& cfg = point.config;
    out << experiment << ',' << protocol_name(cfg.protocol) << ',' << cfg.n() << ',' << cfg.m() << ','
        << format_number(point.p_or_c) << ',' << format_number(point.extra_param) << ',' << estimate.n_reps << ','
        << estimate.master_seed << ',' << format_number(estimate.e_val_mean) << ','
        << format_number(estimate.e_val_se) << ',' << format_number(estimate.e_gen_mean) << ','
        << format_number(estimate.e_gen_se) << ',' << format_number(estimate.bias_mean) << ','
        << format_number(estimate.bias_se) << ',' << format_number(estimate.null_mean) << ','
        << estimate.nonconverged_count << '\n';
}

}  // namespace prepbias
