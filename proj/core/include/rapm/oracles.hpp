#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rapm/numerics.hpp"
#include "rapm/prox.hpp"

namespace rapm {

/// Value, gradient and gradient-Lipschitz constant of a smooth convex function.
///
/// The callables must not carry hidden mutable state; a ProblemSpec is shared
/// read-only between concurrent solver runs.
struct SmoothOracle {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  double lipschitz = 0.0;
  std::size_t dimension = 0;
};

/// <c, x>, Lipschitz constant 0.
SmoothOracle linear_oracle(Vector c);
/// 0.5 * curvature * ||x - center||^2, Lipschitz constant curvature.
SmoothOracle quadratic_oracle(Vector center, double curvature = 1.0);
/// 0.5 * ||A x - b||^2 with a caller-supplied Lipschitz constant.
SmoothOracle least_squares_oracle(DenseMatrix a, Vector b, double lipschitz);

/// Known solution data of a bilevel instance.
struct GroundTruth {
  Vector x_star;
  double f_star = 0.0;
  double h_bar_star = 0.0;
  std::optional<double> alpha;  ///< weak-sharpness modulus of the lower solution set
  double grad_f_at_xstar_norm = 0.0;
  /// Distance to the bilevel solution set X*.
  std::function<double(const Vector&)> dist_to_solution_set;
  /// Euclidean projection onto the lower-level solution set.
  std::function<Vector(const Vector&)> project_lower_solution_set;
};

struct RegressionData;

struct ProblemSpec {
  std::string name;
  /// Identifies the instance (generator and parameters); traces and
  /// references carry it so metrics are never mixed across problems.
  std::string id;
  SmoothOracle upper;  ///< f
  SmoothOracle lower;  ///< h
  ProxOp nonsmooth;    ///< omega
  std::size_t dimension = 0;
  std::optional<GroundTruth> ground_truth;
  /// Nonemptiness of argmin h + omega. Not testable from oracles; generators
  /// set it by construction.
  bool lower_argmin_nonempty = false;
  std::shared_ptr<const RegressionData> regression;
};

/// Assembles a ProblemSpec, checking that all dimensions agree and the
/// Lipschitz constants are finite and nonnegative.
ProblemSpec make_problem(std::string name, std::string id, SmoothOracle upper, SmoothOracle lower,
                         ProxOp nonsmooth, std::optional<GroundTruth> ground_truth = std::nullopt,
                         bool lower_argmin_nonempty = false);

/// h(x) + eta f(x). Requires eta > 0.
double f_eta_value(const ProblemSpec& p, double eta, const Vector& x);
/// f_eta(x) + omega(x); +infinity when x is outside an indicator's set.
double F_eta_value(const ProblemSpec& p, double eta, const Vector& x);
/// grad h(x) + eta grad f(x). Requires eta > 0.
Vector grad_f_eta(const ProblemSpec& p, double eta, const Vector& x);
/// L_h + eta L_f.
double lipschitz_L_eta(const ProblemSpec& p, double eta);

/// h(x) + omega(x).
double h_bar_value(const ProblemSpec& p, const Vector& x);

/// prox_{gamma omega}[x - gamma (grad h(x) + eta grad f(x))].
///
/// eta = 0 is accepted and gives the pure lower-level step. Throws
/// ParameterError when gamma exceeds 1 / (L_h + eta L_f).
Vector q_map(const ProblemSpec& p, double eta, double gamma, const Vector& x);

/// Largest admissible step 1 / (L_h + eta L_f); +infinity when that sum is 0.
double max_step(const ProblemSpec& p, double eta);

struct CheckResult {
  std::string name;
  bool passed = false;
  /// Normalized slack; the check passes iff worst_margin >= -tolerance.
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  const CheckResult* find(const std::string& name) const;
};

/// Sampled falsification of the standing assumptions on p.
///
/// Checks per smooth oracle: central finite differences (step 1e-5, relative
/// tolerance 1e-5), midpoint convexity (slack 1e-9), and the declared
/// Lipschitz constant on sampled pairs whose direction is sharpened by a few
/// gradient-difference power steps. With ground truth: f(x*) = f*,
/// h(x*) + omega(x*) = h_bar*, ||grad f(x*)||, and the lower-level
/// fixed-point residual at x*. Never estimates constants, only rejects them.
ValidationReport validate_problem(const ProblemSpec& p, std::uint64_t seed,
                                  std::size_t n_samples);

}  // namespace rapm
