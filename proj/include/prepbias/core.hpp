#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace prepbias {

using Index = Eigen::Index;
// Samples x features, one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Invalid parameters or mismatched sizes supplied by the caller.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite input or output in a numerical routine.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A column whose scale estimate is zero, so it cannot be rescaled or regressed on.
class DegenerateColumnError : public NumericError {
public:
    DegenerateColumnError(const std::string& what, Index column)
        : NumericError(what + " (column " + std::to_string(column) + ")"), column_(column) {}
    Index column() const noexcept { return column_; }

private:
    Index column_;
};

/// Failure inside a single Monte Carlo replicate, tagged with its stream index.
class ReplicateError : public std::runtime_error {
public:
    ReplicateError(std::uint64_t replicate, const std::string& what)
        : std::runtime_error("replicate " + std::to_string(replicate) + ": " + what),
          replicate_(replicate) {}
    std::uint64_t replicate() const noexcept { return replicate_; }

private:
    std::uint64_t replicate_;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ConfigError(message);
}

}  // namespace prepbias
