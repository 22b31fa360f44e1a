#include "qst/pauli.hpp"

#include <cmath>

namespace qst {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double log_dim(double d, LogBase base) {
  return base == LogBase::natural ? std::log(d) : std::log2(d);
}

namespace {

constexpr int kMaxQubits = 30;

void check_qubits(int n) {
  if (n < 1) throw InvalidArgument("pauli string needs at least one qubit");
  if (n > kMaxQubits) throw InvalidArgument("pauli string too long: n=" + std::to_string(n));
}

}  // namespace

PauliString::PauliString(std::vector<PauliCode> codes) : codes_(std::move(codes)) {
  check_qubits(static_cast<int>(codes_.size()));
  for (auto c : codes_) {
    if (static_cast<unsigned>(c) > 3U) throw InvalidArgument("pauli code out of range");
  }
}

PauliString PauliString::identity(int n) {
  check_qubits(n);
  return PauliString(std::vector<PauliCode>(static_cast<std::size_t>(n), PauliCode::I));
}

PauliString PauliString::parse(std::string_view text) {
  std::vector<PauliCode> codes;
  codes.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case 'I': codes.push_back(PauliCode::I); break;
      case 'X': codes.push_back(PauliCode::X); break;
      case 'Y': codes.push_back(PauliCode::Y); break;
      case 'Z': codes.push_back(PauliCode::Z); break;
      default: throw InvalidArgument(std::string("bad pauli character '") + ch + "'");
    }
  }
  return PauliString(std::move(codes));
}

int PauliString::weight() const {
  int w = 0;
  for (auto c : codes_) w += c != PauliCode::I;
  return w;
}

std::string PauliString::str() const {
  static constexpr char kNames[] = {'I', 'X', 'Y', 'Z'};
  std::string s;
  s.reserve(codes_.size());
  for (auto c : codes_) s.push_back(kNames[static_cast<int>(c)]);
  return s;
}

PauliString sample_uniform_pauli(int n, Rng& rng) {
  check_qubits(n);
  std::vector<PauliCode> codes(static_cast<std::size_t>(n));
  std::uint64_t word = 0;
  for (int q = 0; q < n; ++q) {
    if (q % 32 == 0) word = rng();
    codes[static_cast<std::size_t>(q)] = static_cast<PauliCode>(word & 3U);
    word >>= 2;
  }
  return PauliString(std::move(codes));
}

PauliString pauli_from_index(std::uint64_t index, int n) {
  check_qubits(n);
  if (2 * n < 64 && index >= (std::uint64_t{1} << (2 * n))) {
    throw InvalidArgument("pauli index " + std::to_string(index) + " out of range for n=" +
                          std::to_string(n));
  }
  std::vector<PauliCode> codes(static_cast<std::size_t>(n));
  for (int q = n - 1; q >= 0; --q) {
    codes[static_cast<std::size_t>(q)] = static_cast<PauliCode>(index & 3U);
    index >>= 2;
  }
  return PauliString(std::move(codes));
}

std::uint64_t pauli_to_index(const PauliString& w) {
  std::uint64_t index = 0;
  for (auto c : w.codes()) index = (index << 2) | static_cast<std::uint64_t>(c);
  return index;
}

void apply_pauli_inplace(const PauliString& w, Eigen::Ref<CMatrix> m) {
  const int n = w.num_qubits();
  const auto d = static_cast<Eigen::Index>(w.dim());
  if (m.rows() != d) {
    throw InvalidArgument("apply_pauli: matrix has " + std::to_string(m.rows()) +
                          " rows, pauli string needs " + std::to_string(d));
  }
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    Complex* x = m.col(col).data();
    for (int q = 0; q < n; ++q) {
      const PauliCode code = w[q];
      if (code == PauliCode::I) continue;
      // Mode-q application: pairs (i, i + stride) differ only in qubit q.
      const Eigen::Index stride = Eigen::Index{1} << (n - 1 - q);
      for (Eigen::Index base = 0; base < d; base += 2 * stride) {
        Complex* lo = x + base;
        Complex* hi = lo + stride;
        switch (code) {
          case PauliCode::X:
            for (Eigen::Index k = 0; k < stride; ++k) std::swap(lo[k], hi[k]);
            break;
          case PauliCode::Y:
            // lo <- -i hi, hi <- i lo, spelled out to avoid a general complex product.
            for (Eigen::Index k = 0; k < stride; ++k) {
              const Complex a = lo[k];
              lo[k] = Complex(hi[k].imag(), -hi[k].real());
              hi[k] = Complex(-a.imag(), a.real());
            }
            break;
          case PauliCode::Z:
            for (Eigen::Index k = 0; k < stride; ++k) hi[k] = -hi[k];
            break;
          case PauliCode::I:
            break;
        }
      }
    }
  }
}

CMatrix apply_pauli(const PauliString& w, const CMatrix& m) {
  CMatrix out = m;
  apply_pauli_inplace(w, out);
  return out;
}

double pauli_expectation_from_product(const CMatrix& u, const CMatrix& wu) {
  const Complex tr = (u.conjugate().array() * wu.array()).sum();
  const double scale = std::max(1.0, u.squaredNorm());
  if (std::abs(tr.imag()) > 1e-10 * scale) {
    throw InternalInvariant("pauli_expectation: imaginary residual " +
                            std::to_string(tr.imag()));
  }
  return tr.real();
}

double pauli_expectation(const PauliString& w, const CMatrix& u) {
  return pauli_expectation_from_product(u, apply_pauli(w, u));
}

}  // namespace qst
