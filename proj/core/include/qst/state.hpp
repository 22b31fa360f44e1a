#pragma once

#include <cstdint>
#include <string_view>

#include "qst/types.hpp"

namespace qst {

enum class Normalization : std::uint8_t { trace_one = 1, spectral_one = 2 };
enum class SpectrumShape : std::uint8_t { geometric, linear };

std::string_view to_string(Normalization n);
std::string_view to_string(SpectrumShape s);

/// The unknown low-rank state rho* = V diag(spectrum) V^dagger, kept in eigenform.
///
/// Invariants: V has orthonormal columns, spectrum is positive and
/// non-increasing, and the normalization tag matches the spectrum (trace one
/// means sum(spectrum) == 1, spectral one means spectrum[0] == 1).
class GroundTruth {
 public:
  GroundTruth(CMatrix eigvecs, RVector spectrum, Normalization normalization);

  const CMatrix& eigvecs() const { return eigvecs_; }
  const RVector& spectrum() const { return spectrum_; }
  Normalization normalization() const { return normalization_; }
  int num_qubits() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(eigvecs_.rows()); }
  int rank() const { return static_cast<int>(spectrum_.size()); }
  double kappa() const { return spectrum_(0) / spectrum_(spectrum_.size() - 1); }
  double sigma_min() const { return spectrum_(spectrum_.size() - 1); }

  /// V diag(sqrt(spectrum)): an exact factor of rho*.
  CMatrix factor() const;

 private:
  CMatrix eigvecs_;
  RVector spectrum_;
  Normalization normalization_;
  int n_;
};

/// The estimate's parameter matrix U (d x r); the estimate is U U^dagger.
class FactorState {
 public:
  explicit FactorState(CMatrix u);

  const CMatrix& matrix() const { return u_; }
  CMatrix& matrix() { return u_; }
  int num_qubits() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(u_.rows()); }
  int rank() const { return static_cast<int>(u_.cols()); }

 private:
  CMatrix u_;
  int n_;
};

/// Qubit count for a power-of-two dimension; throws otherwise.
int qubits_for_dim(std::size_t d);

/// Standard complex Gaussian entries: each real component has std `scale`.
CMatrix complex_gaussian(std::size_t rows, std::size_t cols, double scale, Rng& rng);

GroundTruth generate_ground_truth(int n, int r, double kappa, SpectrumShape shape,
                                  Normalization normalization, std::uint64_t seed);

/// U0 with i.i.d. complex Gaussian entries, per-component std `scale`.
FactorState random_init_factor(int n, int r, double scale, std::uint64_t seed);

/// ||U U^dagger - rho*||_F in O(d r^2) from a thin QR of [U, V* sqrt(spectrum)];
/// never forms a d x d matrix.
double frobenius_distance(const FactorState& est, const GroundTruth& truth);

/// ||A A^dagger - B B^dagger||_F, same method.
double factor_distance(const FactorState& a, const FactorState& b);

}  // namespace qst
