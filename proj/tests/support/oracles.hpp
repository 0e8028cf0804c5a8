#pragma once

#include <functional>

#include "rapm/numerics.hpp"
#include "rapm/prox.hpp"
#include "rapm/rng.hpp"

namespace rapm::oracle {

/// Minimizes phi over a cube by repeated grid search: each round evaluates
/// points_per_dim^d grid points in [center - r, center + r]^d, recenters on
/// the best one and halves r. Intended for d <= 3.
Vector grid_minimize(const std::function<double(const Vector&)>& phi, Vector center,
                     double radius, std::size_t points_per_dim = 41, double final_radius = 1e-10);

/// argmin_z gamma * op(z) + 0.5 ||z - u||^2 by grid_minimize.
Vector brute_force_prox(const ProxOp& op, const Vector& u, double gamma);

/// Projection onto { |z1| + |z2| <= radius } by enumerating the KKT cases:
/// interior, the four edges, the four vertices.
Vector l1_ball_projection_kkt_2d(const Vector& u, double radius);

/// lambda_max(A^T A) from a dense symmetric eigendecomposition.
double lambda_max_eigen(const DenseMatrix& a);

/// scale * standard normal entries.
Vector random_vector(Rng& rng, std::size_t n, double scale = 2.0);

/// One of the four term kinds with random parameters.
ProxOp random_prox_op(Rng& rng, std::size_t n);

/// Seeded standard-normal matrix.
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace rapm::oracle
