#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qst {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Every random draw in the library goes through an explicitly passed engine.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent stream seeds from one base seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

enum class LogBase { natural, two };

/// log(d) under the configured base. Natural log is the default everywhere.
double log_dim(double d, LogBase base = LogBase::natural);

// Error types. Every public operation reports precondition failures by throwing.

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Operation is undefined for the given object state (e.g. shots on a non-trace-one state).
struct InvalidState : std::logic_error {
  using std::logic_error::logic_error;
};

/// Raised when an internal consistency check fails; indicates a bug.
struct InternalInvariant : std::logic_error {
  using std::logic_error::logic_error;
};

struct UnsupportedSize : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateUpdate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qst
