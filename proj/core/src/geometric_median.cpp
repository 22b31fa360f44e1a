#include <cmath>
#include <limits>

#include "qst/initializer.hpp"

namespace qst {

namespace {

// G(i, j) = Re <rho_i, rho_j> = ||U_i^dagger U_j||_F^2.
Eigen::MatrixXd gram_of(const std::vector<FactorState>& points) {
  const auto J = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(J, J);
  for (Eigen::Index i = 0; i < J; ++i) {
    for (Eigen::Index j = i; j < J; ++j) {
      const double v =
          (points[static_cast<std::size_t>(i)].matrix().adjoint() * points[static_cast<std::size_t>(j)].matrix())
              .squaredNorm();
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

RVector distances(const Eigen::MatrixXd& g, const RVector& w) {
  const RVector gw = g * w;
  const double wgw = w.dot(gw);
  RVector dist(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    dist(i) = std::sqrt(std::max(wgw - 2.0 * gw(i) + g(i, i), 0.0));
  }
  return dist;
}

double quad_norm(const Eigen::MatrixXd& g, const RVector& c) {
  return std::sqrt(std::max(c.dot(g * c), 0.0));
}

// Top-r factor of sum_j w_j U_j U_j^dagger (all w_j >= 0) and the discarded tail norm.
std::pair<FactorState, double> project_to_rank(const std::vector<FactorState>& points,
                                               const RVector& w, int r) {
  const auto d = points.front().matrix().rows();
  const auto rp = points.front().matrix().cols();
  const auto J = static_cast<Eigen::Index>(points.size());
  CMatrix k(d, J * rp);
  for (Eigen::Index j = 0; j < J; ++j) {
    k.middleCols(j * rp, rp) = points[static_cast<std::size_t>(j)].matrix() * std::sqrt(std::max(w(j), 0.0));
  }
  Eigen::BDCSVD<CMatrix> svd(k, Eigen::ComputeThinU);
  const RVector& sv = svd.singularValues();
  const Eigen::Index keep = std::min<Eigen::Index>(r, sv.size());
  CMatrix factor = CMatrix::Zero(d, r);
  for (Eigen::Index c = 0; c < keep; ++c) factor.col(c) = svd.matrixU().col(c) * sv(c);
  double tail = 0.0;
  for (Eigen::Index c = keep; c < sv.size(); ++c) tail += std::pow(sv(c), 4);
  return {FactorState(std::move(factor)), std::sqrt(tail)};
}

}  // namespace

double geometric_median_objective(const std::vector<FactorState>& points, const RVector& weights) {
  if (static_cast<std::size_t>(weights.size()) != points.size()) {
    throw InvalidArgument("geometric_median_objective: weight count mismatch");
  }
  return distances(gram_of(points), weights).sum();
}

GeometricMedianResult geometric_median(const std::vector<FactorState>& points, double tol,
                                       int max_iterations) {
  if (points.empty()) throw InvalidArgument("geometric_median needs at least one point");
  if (!(tol > 0.0)) throw InvalidArgument("geometric_median: tol must be positive");
  const auto& first = points.front().matrix();
  for (const auto& p : points) {
    if (p.matrix().rows() != first.rows() || p.matrix().cols() != first.cols()) {
      throw InvalidArgument("geometric_median: points must share one shape");
    }
  }

  const auto J = static_cast<Eigen::Index>(points.size());
  const Eigen::MatrixXd g = gram_of(points);
  const double scale = std::sqrt(std::max(g.diagonal().maxCoeff(), 1e-300));
  // Distances below this are treated as coincidence with a data point.
  const double anchor_eps = 1e-12 * std::max(scale, 1.0);

  RVector w = RVector::Constant(J, 1.0 / static_cast<double>(J));
  RVector dist = distances(g, w);
  double objective = dist.sum();

  auto finish = [&](int iterations) {
    GeometricMedianResult out;
    out.weights = w;
    out.objective = objective;
    out.iterations = iterations;
    auto [proj, residual] = project_to_rank(points, w, static_cast<int>(first.cols()));
    out.projection = std::move(proj);
    out.projection_residual = residual;
    return out;
  };

  // A data point is the median iff the unit vectors towards the others sum to
  // norm <= its multiplicity; Weiszfeld only approaches such points sublinearly.
  for (Eigen::Index j = 0; j < J; ++j) {
    RVector r_coef = RVector::Zero(J);
    double mass = 0.0;
    for (Eigen::Index i = 0; i < J; ++i) {
      const double dij = std::sqrt(std::max(g(i, i) + g(j, j) - 2.0 * g(i, j), 0.0));
      if (dij <= anchor_eps) {
        mass += 1.0;
      } else {
        r_coef(j) += 1.0 / dij;
        r_coef(i) -= 1.0 / dij;
      }
    }
    if (quad_norm(g, r_coef) <= mass) {
      w = RVector::Unit(J, j);
      dist = distances(g, w);
      objective = dist.sum();
      return finish(0);
    }
  }

  for (int it = 1; it <= max_iterations; ++it) {
    // Vardi-Zhang: points coinciding with the iterate contribute eta_mass instead of 1/dist.
    RVector a = RVector::Zero(J);
    double eta_mass = 0.0;
    for (Eigen::Index i = 0; i < J; ++i) {
      if (dist(i) <= anchor_eps) {
        eta_mass += 1.0;
      } else {
        a(i) = 1.0 / dist(i);
      }
    }
    const double a_sum = a.sum();
    if (a_sum == 0.0) return finish(it - 1);  // every point coincides with the iterate

    const RVector t = a / a_sum;
    RVector next;
    if (eta_mass == 0.0) {
      next = t;
    } else {
      const RVector r_coef = a - a_sum * w;
      const double r_norm = quad_norm(g, r_coef);
      if (r_norm <= eta_mass) return finish(it - 1);  // the anchor is optimal
      const double beta = std::min(1.0, eta_mass / r_norm);
      next = (1.0 - beta) * t + beta * w;
    }

    const double move = quad_norm(g, next - w);
    const RVector next_dist = distances(g, next);
    const double next_objective = next_dist.sum();
    if (next_objective > objective * (1.0 + 1e-9) + 1e-14) {
      throw InternalInvariant("Weiszfeld objective increased: " + std::to_string(objective) +
                              " -> " + std::to_string(next_objective));
    }
    w = next;
    dist = next_dist;
    objective = next_objective;
    if (move < tol) return finish(it);
  }
  throw GeometricMedianError("geometric median did not converge within " +
                                 std::to_string(max_iterations) + " iterations",
                             finish(max_iterations));
}

}  // namespace qst
