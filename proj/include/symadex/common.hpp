#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace symadex {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Raised when a region that must be nonempty turns out to be infeasible.
class InfeasibleRegion : public Error {
public:
    using Error::Error;
};

namespace tol {
inline constexpr double feasibility = 1e-7;
inline constexpr double optimality = 1e-9;
inline constexpr double membership = 1e-9;
// pre-activation bounds within this distance of 0 are snapped to 0
inline constexpr double bound_snap = 1e-9;
}  // namespace tol

/// Deterministic work meter.
///
/// Counts floating point work done by LP pivots and network evaluations on the
/// calling thread. Method selection compares these counts instead of wall
/// time so that a run is reproducible from its seed.
namespace effort {
std::uint64_t read() noexcept;
void add(std::uint64_t units) noexcept;
}  // namespace effort

}  // namespace symadex
