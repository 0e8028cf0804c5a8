#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rapm/rng.hpp"

namespace rapm::oracle {

Vector grid_minimize(const std::function<double(const Vector&)>& phi, Vector center,
                     double radius, std::size_t points_per_dim, double final_radius) {
  const auto d = static_cast<std::size_t>(center.size());
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= points_per_dim;
  const double steps = static_cast<double>(points_per_dim - 1);

  Vector best = center;
  double best_value = phi(center);
  Vector z(center.size());
  while (radius > final_radius) {
    const Vector origin = best;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      for (std::size_t i = 0; i < d; ++i) {
        const auto g = static_cast<double>(rest % points_per_dim);
        rest /= points_per_dim;
        z[static_cast<Eigen::Index>(i)] =
            origin[static_cast<Eigen::Index>(i)] - radius + 2.0 * radius * g / steps;
      }
      const double v = phi(z);
      if (v < best_value) {
        best_value = v;
        best = z;
      }
    }
    radius *= 0.5;
  }
  return best;
}

Vector brute_force_prox(const ProxOp& op, const Vector& u, double gamma) {
  auto phi = [&](const Vector& z) {
    const double w = evaluate(op, z);
    if (std::isinf(w)) return std::numeric_limits<double>::infinity();
    return gamma * w + 0.5 * (z - u).squaredNorm();
  };
  double extent = u.cwiseAbs().maxCoeff();
  if (const auto* b = std::get_if<BoxIndicator>(&op)) {
    extent = std::max({extent, b->lo.cwiseAbs().maxCoeff(), b->hi.cwiseAbs().maxCoeff()});
  }
  if (const auto* l = std::get_if<L1BallIndicator>(&op)) extent = std::max(extent, l->radius);
  Vector start = Vector::Zero(u.size());
  if (const auto* b = std::get_if<BoxIndicator>(&op)) start = 0.5 * (b->lo + b->hi);
  return grid_minimize(phi, start, extent + 1.0);
}

Vector l1_ball_projection_kkt_2d(const Vector& u, double radius) {
  std::vector<Vector> candidates;
  if (std::abs(u[0]) + std::abs(u[1]) <= radius) return u;
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      // Edge s1 z1 + s2 z2 = radius with s_i z_i >= 0: project onto the line.
      const Vector s{{s1, s2}};
      const Vector z = u - (0.5 * (s.dot(u) - radius)) * s;
      if (s1 * z[0] >= 0.0 && s2 * z[1] >= 0.0) candidates.push_back(z);
    }
  }
  candidates.push_back(Vector{{radius, 0.0}});
  candidates.push_back(Vector{{-radius, 0.0}});
  candidates.push_back(Vector{{0.0, radius}});
  candidates.push_back(Vector{{0.0, -radius}});
  Vector best = candidates.front();
  for (const auto& c : candidates) {
    if ((c - u).squaredNorm() < (best - u).squaredNorm()) best = c;
  }
  return best;
}

double lambda_max_eigen(const DenseMatrix& a) {
  const Eigen::MatrixXd m = a.storage();
  const Eigen::MatrixXd g = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Vector random_vector(Rng& rng, std::size_t n, double scale) {
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

ProxOp random_prox_op(Rng& rng, std::size_t n) {
  switch (rng.index(4)) {
    case 0:
      return make_zero();
    case 1:
      return make_l1_norm(rng.uniform(0.0, 2.0));
    case 2:
      return make_l1_ball(rng.uniform(0.1, 3.0));
    default: {
      Vector lo(static_cast<Eigen::Index>(n));
      Vector hi(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < lo.size(); ++i) {
        lo[i] = rng.uniform(-2.0, 0.5);
        hi[i] = lo[i] + rng.uniform(0.0, 2.0);
      }
      return make_box(lo, hi);
    }
  }
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.normal();
  return DenseMatrix(rows, cols, std::move(v));
}

}  // namespace rapm::oracle
