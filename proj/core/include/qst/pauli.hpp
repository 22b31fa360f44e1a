#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qst/types.hpp"

namespace qst {

enum class PauliCode : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// An n-qubit tensor product of single-qubit Paulis.
///
/// codes()[0] acts on the most significant bit of the basis-state index, so
/// the dense matrix is P_0 (x) P_1 (x) ... (x) P_{n-1}.
class PauliString {
 public:
  explicit PauliString(std::vector<PauliCode> codes);

  static PauliString identity(int n);
  /// Parses "XZIY"-style text (case sensitive, I/X/Y/Z only).
  static PauliString parse(std::string_view text);

  int num_qubits() const { return static_cast<int>(codes_.size()); }
  std::size_t dim() const { return std::size_t{1} << codes_.size(); }
  const std::vector<PauliCode>& codes() const { return codes_; }
  PauliCode operator[](int q) const { return codes_[static_cast<std::size_t>(q)]; }

  /// Number of non-identity factors.
  int weight() const;
  std::string str() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::vector<PauliCode> codes_;
};

/// Draws each factor uniformly from {I, X, Y, Z}, independently.
PauliString sample_uniform_pauli(int n, Rng& rng);

/// Base-4 codec over the 4^n Pauli strings; codes[0] is the most significant digit.
PauliString pauli_from_index(std::uint64_t index, int n);
std::uint64_t pauli_to_index(const PauliString& w);

/// Returns dense(W) * M without forming dense(W). O(n d r).
CMatrix apply_pauli(const PauliString& w, const CMatrix& m);

/// In-place variant used by the hot path. m must have 2^n rows.
void apply_pauli_inplace(const PauliString& w, Eigen::Ref<CMatrix> m);

/// Tr(dense(W) U U^dagger).
double pauli_expectation(const PauliString& w, const CMatrix& u);

/// Tr(dense(W) U U^dagger) given a precomputed WU = apply_pauli(W, U).
double pauli_expectation_from_product(const CMatrix& u, const CMatrix& wu);

}  // namespace qst
