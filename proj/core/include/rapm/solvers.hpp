#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rapm/errors.hpp"
#include "rapm/oracles.hpp"

namespace rapm {

enum class Variant {
  RAPM,        ///< regularized accelerated proximal method
  RPM,         ///< same regularized map, no momentum
  BiGSAM,      ///< sequential averaging baseline
  aIRG,        ///< averaged iteratively regularized gradient baseline
  FISTALower,  ///< accelerated proximal method on h + omega alone
};

std::string to_string(Variant v);
/// Accepts the names produced by to_string(). Throws ParameterError.
Variant parse_variant(const std::string& s);

struct FixedEta {
  double value = 0.0;
};
/// eta = 1 / (K + 1)
struct BudgetScaledEta {};
/// eta = alpha / (2 ||grad f(x*)||) from ground truth
struct WeakSharpEta {};
using EtaMode = std::variant<FixedEta, BudgetScaledEta, WeakSharpEta>;

/// gamma = 1 / L_eta
struct MaxStep {};
/// gamma = fraction / L_eta, fraction in (0, 1]
struct ScaledStep {
  double fraction = 1.0;
};
using GammaRule = std::variant<MaxStep, ScaledStep>;

struct SolverConfig {
  Variant variant = Variant::RAPM;
  std::size_t K = 1;
  EtaMode eta_mode = BudgetScaledEta{};
  GammaRule gamma_rule = MaxStep{};
  /// Zero vector when unset.
  std::optional<Vector> x0;
  std::size_t record_every = 1;
  std::uint64_t seed = 0;
  /// Wall-clock timings make traces nondeterministic; off means elapsed = 0.
  bool record_timings = false;
};

/// Throws ParameterError on K = 0, record_every = 0, nonpositive fixed eta
/// or a step fraction outside (0, 1].
void validate_config(const SolverConfig& cfg);

struct IterateRecord {
  std::size_t k = 0;
  Vector x;  ///< x_k
  Vector y;  ///< point the step producing x_k was taken from
  double t = 0.0;  ///< momentum scalar t_k (t_0 = 0, t_1 = 1); 1 for non-accelerated methods
  double f = 0.0;
  double h = 0.0;
  double omega = 0.0;
  double F_eta = 0.0;  ///< h + eta f + omega at the eta in force for this step
  double elapsed_seconds = 0.0;
  std::optional<Vector> x_avg;  ///< step-weighted running average (aIRG only)
};

struct IterateTrace {
  Variant variant = Variant::RAPM;
  std::string problem_id;
  double eta = 0.0;    ///< eta used (eta_0 for aIRG, 0 for BiG-SAM and FISTALower)
  double gamma = 0.0;  ///< step used (gamma_0 for aIRG, lower step for BiG-SAM)
  std::size_t K = 0;
  std::size_t record_every = 1;
  std::uint64_t seed = 0;
  Vector x0;
  std::vector<IterateRecord> records;  ///< k = 0 first, then every record_every-th k and k = K

  const IterateRecord& last() const { return records.back(); }
};

/// A solver produced a non-finite value or an iterate with norm above 1e12.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t last_finite_k, IterateTrace partial)
      : Error(what), last_finite_k_(last_finite_k), partial_(std::move(partial)) {}

  std::size_t last_finite_k() const noexcept { return last_finite_k_; }
  const IterateTrace& partial_trace() const noexcept { return partial_; }

 private:
  std::size_t last_finite_k_;
  IterateTrace partial_;
};

/// t_{k+1} = 0.5 + sqrt(0.25 + t_k^2). Throws ParameterError for t_k < 1.
double momentum_next(double t);

/// x + ((t - 1) / t_next) (x - x_prev)
Vector extrapolate(const Vector& x, const Vector& x_prev, double t, double t_next);

/// Resolves the regularization weight.
///
/// WeakSharp needs ground truth with alpha; when ||grad f(x*)|| <= 1e-12 the
/// threshold is unbounded and min(1, alpha / (2 max(||grad f(x*)||, 1e-12)))
/// is used instead.
double select_eta(const EtaMode& mode, std::size_t K, const std::optional<GroundTruth>& truth);

/// Step size for a given L_eta. Throws ParameterError when L_eta = 0.
double select_gamma(const GammaRule& rule, double l_eta);

/// Fixed-budget R-APM:
///   y_1 = x_0, t_1 = 1
///   x_k = q(y_k)
///   t_{k+1} = 0.5 + sqrt(0.25 + t_k^2)
///   y_{k+1} = x_k + ((t_k - 1) / t_{k+1}) (x_k - x_{k-1})
IterateTrace rapm_solve(const ProblemSpec& p, const SolverConfig& cfg);

/// x_k = q(x_{k-1}) with the same eta and gamma as R-APM.
IterateTrace rpm_solve(const ProblemSpec& p, const SolverConfig& cfg);

/// R-APM iteration with eta = 0 and gamma = 1 / L_h (unit step when L_h = 0).
IterateTrace fista_lower_solve(const ProblemSpec& p, std::size_t K,
                               const std::optional<Vector>& x0 = std::nullopt,
                               std::size_t record_every = 1);

/// BiG-SAM: u = prox step on h with 1/L_h, v = gradient step on f with 1/L_f,
/// x_k = a_k v + (1 - a_k) u with a_k = min(1, 2/(k+1)). Iterates need not lie
/// in dom omega because v is not projected.
IterateTrace bigsam_solve(const ProblemSpec& p, const SolverConfig& cfg);

/// a-IRG: gamma_k = gamma_0 / sqrt(k+1), eta_k = 1 / (k+1)^(1/4),
/// gamma_0 = 1 / (L_h + L_f). Records also carry the gamma-weighted average.
IterateTrace airg_solve(const ProblemSpec& p, const SolverConfig& cfg);

/// Dispatches on cfg.variant.
IterateTrace solve(const ProblemSpec& p, const SolverConfig& cfg);

}  // namespace rapm
