#include "qst/state.hpp"

#include <cmath>

namespace qst {

std::string_view to_string(Normalization n) {
  return n == Normalization::trace_one ? "trace_one" : "spectral_one";
}

std::string_view to_string(SpectrumShape s) {
  return s == SpectrumShape::geometric ? "geometric" : "linear";
}

int qubits_for_dim(std::size_t d) {
  if (d < 2 || (d & (d - 1)) != 0) {
    throw InvalidArgument("dimension " + std::to_string(d) + " is not a power of two >= 2");
  }
  int n = 0;
  while ((std::size_t{1} << n) < d) ++n;
  return n;
}

GroundTruth::GroundTruth(CMatrix eigvecs, RVector spectrum, Normalization normalization)
    : eigvecs_(std::move(eigvecs)),
      spectrum_(std::move(spectrum)),
      normalization_(normalization),
      n_(qubits_for_dim(static_cast<std::size_t>(eigvecs_.rows()))) {
  const auto r = spectrum_.size();
  if (r < 1 || eigvecs_.cols() != r) throw InvalidArgument("ground truth: rank mismatch");
  if (r > eigvecs_.rows()) throw InvalidArgument("ground truth: rank exceeds dimension");
  for (Eigen::Index j = 0; j < r; ++j) {
    if (!(spectrum_(j) > 0.0)) throw InvalidArgument("ground truth: spectrum must be positive");
    if (j > 0 && spectrum_(j) > spectrum_(j - 1)) {
      throw InvalidArgument("ground truth: spectrum must be non-increasing");
    }
  }
  const CMatrix gram = eigvecs_.adjoint() * eigvecs_;
  if ((gram - CMatrix::Identity(r, r)).norm() > 1e-10) {
    throw InvalidArgument("ground truth: eigenvectors are not orthonormal");
  }
  if (normalization_ == Normalization::trace_one && std::abs(spectrum_.sum() - 1.0) > 1e-10) {
    throw InvalidArgument("ground truth: trace_one state must have unit trace");
  }
  if (normalization_ == Normalization::spectral_one && std::abs(spectrum_(0) - 1.0) > 1e-10) {
    throw InvalidArgument("ground truth: spectral_one state must have unit top eigenvalue");
  }
}

CMatrix GroundTruth::factor() const {
  return eigvecs_ * spectrum_.cwiseSqrt().cast<Complex>().asDiagonal();
}

FactorState::FactorState(CMatrix u)
    : u_(std::move(u)), n_(qubits_for_dim(static_cast<std::size_t>(u_.rows()))) {
  if (u_.cols() < 1) throw InvalidArgument("factor state needs at least one column");
  if (!u_.allFinite()) throw InvalidArgument("factor state has non-finite entries");
}

CMatrix complex_gaussian(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  // Column-major fill order; fixed so that seeds reproduce across builds.
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(r, c) = Complex(re, im);
    }
  }
  return m;
}

GroundTruth generate_ground_truth(int n, int r, double kappa, SpectrumShape shape,
                                  Normalization normalization, std::uint64_t seed) {
  if (n < 1 || n > 30) throw InvalidArgument("generate_ground_truth: bad qubit count");
  const std::size_t d = std::size_t{1} << n;
  if (r < 1 || static_cast<std::size_t>(r) > d) {
    throw InvalidArgument("generate_ground_truth: need 1 <= r <= d");
  }
  if (!(kappa >= 1.0)) throw InvalidArgument("generate_ground_truth: kappa must be >= 1");
  if (r == 1 && kappa != 1.0) {
    throw InvalidArgument("generate_ground_truth: rank-1 state must have kappa = 1");
  }

  Rng rng(seed);
  const CMatrix g = complex_gaussian(d, static_cast<std::size_t>(r), 1.0, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix v = qr.householderQ() * CMatrix::Identity(static_cast<Eigen::Index>(d), r);

  RVector spectrum(r);
  for (int j = 0; j < r; ++j) {
    const double frac = r == 1 ? 0.0 : static_cast<double>(j) / (r - 1);
    spectrum(j) = shape == SpectrumShape::geometric ? std::pow(kappa, -frac)
                                                    : 1.0 - (1.0 - 1.0 / kappa) * frac;
  }
  if (normalization == Normalization::trace_one) {
    spectrum /= spectrum.sum();
  } else {
    spectrum /= spectrum(0);
  }
  return GroundTruth(std::move(v), std::move(spectrum), normalization);
}

FactorState random_init_factor(int n, int r, double scale, std::uint64_t seed) {
  if (!(scale > 0.0)) throw InvalidArgument("random_init_factor: scale must be positive");
  if (n < 1 || n > 30 || r < 1) throw InvalidArgument("random_init_factor: bad shape");
  Rng rng(seed);
  return FactorState(complex_gaussian(std::size_t{1} << n, static_cast<std::size_t>(r), scale, rng));
}

namespace {

// ||A A^dagger - B B^dagger||_F through the R factor of [A, B] = Q R. Both
// products live in span(Q), so the norm is that of a 2r x 2r difference;
// unlike the Gram expansion it has no sqrt(eps) cancellation floor.
double lowrank_difference_norm(const CMatrix& a, const CMatrix& b) {
  const Eigen::Index ra = a.cols();
  const Eigen::Index k = ra + b.cols();
  CMatrix stacked(a.rows(), k);
  stacked << a, b;
  Eigen::HouseholderQR<CMatrix> qr(stacked);
  const Eigen::Index m = std::min<Eigen::Index>(k, a.rows());
  const CMatrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  const CMatrix ra_part = r.leftCols(ra);
  const CMatrix rb_part = r.rightCols(b.cols());
  return (ra_part * ra_part.adjoint() - rb_part * rb_part.adjoint()).norm();
}

}  // namespace

double frobenius_distance(const FactorState& est, const GroundTruth& truth) {
  const CMatrix& u = est.matrix();
  if (static_cast<std::size_t>(u.rows()) != truth.dim()) {
    throw InvalidArgument("frobenius_distance: dimension mismatch");
  }
  const CMatrix truth_factor = truth.eigvecs() * truth.spectrum().cwiseSqrt().cast<Complex>().asDiagonal();
  return lowrank_difference_norm(u, truth_factor);
}

double factor_distance(const FactorState& a, const FactorState& b) {
  if (a.matrix().rows() != b.matrix().rows()) throw InvalidArgument("factor_distance: dimension mismatch");
  return lowrank_difference_norm(a.matrix(), b.matrix());
}

}  // namespace qst
