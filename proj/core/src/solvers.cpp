#include "rapm/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace rapm {

namespace {

constexpr double kDivergenceNorm = 1e12;

Vector start_point(const ProblemSpec& p, const std::optional<Vector>& x0) {
  if (!x0) return Vector::Zero(static_cast<Eigen::Index>(p.dimension));
  if (static_cast<std::size_t>(x0->size()) != p.dimension) {
    throw DimensionError("solver start point", p.dimension, static_cast<std::size_t>(x0->size()));
  }
  if (!all_finite(*x0)) throw ParameterError("solver start point must be finite");
  return *x0;
}

/// Fallback step for a linear term, where every step size satisfies the
/// descent lemma.
double inverse_or_unit(double lipschitz) { return lipschitz > 0.0 ? 1.0 / lipschitz : 1.0; }

class Recorder {
 public:
  Recorder(const ProblemSpec& p, IterateTrace& trace, bool timings)
      : p_(p), trace_(trace), timings_(timings), start_(std::chrono::steady_clock::now()) {}

  bool wants(std::size_t k) const {
    return k == 0 || k == trace_.K || k % trace_.record_every == 0;
  }

  /// Evaluates and checks x_k; records it when due. Throws DivergenceError.
  void step(std::size_t k, const Vector& x, const Vector& y, double t, double eta,
            const Vector* x_avg = nullptr) {
    const double nx = all_finite(x) ? norm2(x) : kInfinity;
    if (!(nx <= kDivergenceNorm)) diverge(k, "iterate is non-finite or has norm above 1e12");
    const bool due = wants(k);
    if (!due) return;

    IterateRecord r;
    r.k = k;
    r.x = x;
    r.y = y;
    r.t = t;
    r.f = p_.upper.value(x);
    r.h = p_.lower.value(x);
    r.omega = evaluate(p_.nonsmooth, x);
    if (!std::isfinite(r.f) || !std::isfinite(r.h)) diverge(k, "objective value is non-finite");
    r.F_eta = std::isinf(r.omega) ? kInfinity : r.h + eta * r.f + r.omega;
    if (timings_) {
      r.elapsed_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    if (x_avg != nullptr) r.x_avg = *x_avg;
    trace_.records.push_back(std::move(r));
  }

 private:
  [[noreturn]] void diverge(std::size_t k, const std::string& why) {
    const std::size_t last = k == 0 ? 0 : k - 1;
    throw DivergenceError(to_string(trace_.variant) + " diverged at k = " + std::to_string(k) +
                              ": " + why + " (last finite iterate k = " + std::to_string(last) +
                              ")",
                          last, trace_);
  }

  const ProblemSpec& p_;
  IterateTrace& trace_;
  bool timings_;
  std::chrono::steady_clock::time_point start_;
};

IterateTrace make_trace(const ProblemSpec& p, Variant v, std::size_t K, std::size_t record_every,
                        std::uint64_t seed, Vector x0) {
  IterateTrace trace;
  trace.variant = v;
  trace.problem_id = p.id;
  trace.K = K;
  trace.record_every = record_every;
  trace.seed = seed;
  trace.x0 = std::move(x0);
  trace.records.reserve(K / record_every + 2);
  return trace;
}

IterateTrace accelerated(const ProblemSpec& p, Variant v, std::size_t K, std::size_t record_every,
                         std::uint64_t seed, bool timings, const std::optional<Vector>& x0,
                         double eta, double gamma) {
  IterateTrace trace = make_trace(p, v, K, record_every, seed, start_point(p, x0));
  trace.eta = eta;
  trace.gamma = gamma;
  Recorder rec(p, trace, timings);

  Vector x_prev = trace.x0;
  Vector y = trace.x0;
  double t = 1.0;
  rec.step(0, x_prev, x_prev, 0.0, eta);
  for (std::size_t k = 1; k <= K; ++k) {
    Vector x = q_map(p, eta, gamma, y);
    rec.step(k, x, y, t, eta);
    const double t_next = momentum_next(t);
    y = extrapolate(x, x_prev, t, t_next);
    x_prev = std::move(x);
    t = t_next;
  }
  return trace;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::RAPM:
      return "RAPM";
    case Variant::RPM:
      return "RPM";
    case Variant::BiGSAM:
      return "BiGSAM";
    case Variant::aIRG:
      return "aIRG";
    case Variant::FISTALower:
      return "FISTALower";
  }
  return "unknown";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::RAPM, Variant::RPM, Variant::BiGSAM, Variant::aIRG,
                    Variant::FISTALower}) {
    if (s == to_string(v)) return v;
  }
  throw ParameterError("unknown solver variant '" + s +
                       "' (expected RAPM, RPM, BiGSAM, aIRG or FISTALower)");
}

void validate_config(const SolverConfig& cfg) {
  if (cfg.K < 1) throw ParameterError("SolverConfig: K must be >= 1");
  if (cfg.record_every < 1) throw ParameterError("SolverConfig: record_every must be >= 1");
  if (const auto* f = std::get_if<FixedEta>(&cfg.eta_mode)) {
    if (!(f->value > 0.0) || !std::isfinite(f->value)) {
      throw ParameterError("SolverConfig: fixed eta must be finite and > 0");
    }
  }
  if (const auto* s = std::get_if<ScaledStep>(&cfg.gamma_rule)) {
    if (!(s->fraction > 0.0 && s->fraction <= 1.0)) {
      throw ParameterError("SolverConfig: gamma fraction must lie in (0, 1]");
    }
  }
}

double momentum_next(double t) {
  if (!(t >= 1.0)) throw ParameterError("momentum_next: t_k must be >= 1");
  return 0.5 + std::sqrt(0.25 + t * t);
}

Vector extrapolate(const Vector& x, const Vector& x_prev, double t, double t_next) {
  return x + ((t - 1.0) / t_next) * (x - x_prev);
}

double select_eta(const EtaMode& mode, std::size_t K, const std::optional<GroundTruth>& truth) {
  if (const auto* f = std::get_if<FixedEta>(&mode)) {
    if (!(f->value > 0.0)) throw ParameterError("select_eta: fixed eta must be > 0");
    return f->value;
  }
  if (std::holds_alternative<BudgetScaledEta>(mode)) {
    return 1.0 / (static_cast<double>(K) + 1.0);
  }
  if (!truth || !truth->alpha) {
    throw ParameterError("select_eta: weak-sharp mode needs ground truth with alpha");
  }
  const double alpha = *truth->alpha;
  const double g = truth->grad_f_at_xstar_norm;
  if (g <= 1e-12) return std::min(1.0, alpha / (2.0 * std::max(g, 1e-12)));
  return alpha / (2.0 * g);
}

double select_gamma(const GammaRule& rule, double l_eta) {
  if (!(l_eta > 0.0)) {
    throw ParameterError("select_gamma: L_h + eta L_f is 0, so 1/L_eta is undefined");
  }
  if (const auto* s = std::get_if<ScaledStep>(&rule)) return s->fraction / l_eta;
  return 1.0 / l_eta;
}

IterateTrace rapm_solve(const ProblemSpec& p, const SolverConfig& cfg) {
  validate_config(cfg);
  const double eta = select_eta(cfg.eta_mode, cfg.K, p.ground_truth);
  const double gamma = select_gamma(cfg.gamma_rule, lipschitz_L_eta(p, eta));
  return accelerated(p, Variant::RAPM, cfg.K, cfg.record_every, cfg.seed, cfg.record_timings,
                     cfg.x0, eta, gamma);
}

IterateTrace rpm_solve(const ProblemSpec& p, const SolverConfig& cfg) {
  validate_config(cfg);
  const double eta = select_eta(cfg.eta_mode, cfg.K, p.ground_truth);
  const double gamma = select_gamma(cfg.gamma_rule, lipschitz_L_eta(p, eta));

  IterateTrace trace =
      make_trace(p, Variant::RPM, cfg.K, cfg.record_every, cfg.seed, start_point(p, cfg.x0));
  trace.eta = eta;
  trace.gamma = gamma;
  Recorder rec(p, trace, cfg.record_timings);

  Vector x = trace.x0;
  rec.step(0, x, x, 1.0, eta);
  for (std::size_t k = 1; k <= cfg.K; ++k) {
    Vector next = q_map(p, eta, gamma, x);
    rec.step(k, next, x, 1.0, eta);
    x = std::move(next);
  }
  return trace;
}

IterateTrace fista_lower_solve(const ProblemSpec& p, std::size_t K, const std::optional<Vector>& x0,
                               std::size_t record_every) {
  if (K < 1) throw ParameterError("fista_lower_solve: K must be >= 1");
  if (record_every < 1) throw ParameterError("fista_lower_solve: record_every must be >= 1");
  return accelerated(p, Variant::FISTALower, K, record_every, 0, false, x0, 0.0,
                     inverse_or_unit(p.lower.lipschitz));
}

IterateTrace bigsam_solve(const ProblemSpec& p, const SolverConfig& cfg) {
  validate_config(cfg);
  const double gamma_h = inverse_or_unit(p.lower.lipschitz);
  const double gamma_f = inverse_or_unit(p.upper.lipschitz);

  IterateTrace trace =
      make_trace(p, Variant::BiGSAM, cfg.K, cfg.record_every, cfg.seed, start_point(p, cfg.x0));
  trace.eta = 0.0;
  trace.gamma = gamma_h;
  Recorder rec(p, trace, cfg.record_timings);

  Vector x = trace.x0;
  rec.step(0, x, x, 1.0, 0.0);
  for (std::size_t k = 1; k <= cfg.K; ++k) {
    const Vector u = prox(p.nonsmooth, x - gamma_h * p.lower.gradient(x), gamma_h);
    const Vector v = x - gamma_f * p.upper.gradient(x);
    const double a = std::min(1.0, 2.0 / (static_cast<double>(k) + 1.0));
    Vector next = a * v + (1.0 - a) * u;
    rec.step(k, next, x, 1.0, 0.0);
    x = std::move(next);
  }
  return trace;
}

IterateTrace airg_solve(const ProblemSpec& p, const SolverConfig& cfg) {
  validate_config(cfg);
  constexpr double eta0 = 1.0;
  const double gamma0 = inverse_or_unit(lipschitz_L_eta(p, eta0));

  IterateTrace trace =
      make_trace(p, Variant::aIRG, cfg.K, cfg.record_every, cfg.seed, start_point(p, cfg.x0));
  trace.eta = eta0;
  trace.gamma = gamma0;
  Recorder rec(p, trace, cfg.record_timings);

  Vector x = trace.x0;
  Vector weighted_sum = Vector::Zero(x.size());
  double weight_total = 0.0;
  rec.step(0, x, x, 1.0, eta0, &x);
  for (std::size_t k = 0; k < cfg.K; ++k) {
    const double kk = static_cast<double>(k) + 1.0;
    const double gamma_k = gamma0 / std::sqrt(kk);
    const double eta_k = eta0 / std::pow(kk, 0.25);
    Vector next = q_map(p, eta_k, gamma_k, x);
    weighted_sum += gamma_k * next;
    weight_total += gamma_k;
    const Vector avg = weighted_sum / weight_total;
    rec.step(k + 1, next, x, 1.0, eta_k, &avg);
    x = std::move(next);
  }
  return trace;
}

IterateTrace solve(const ProblemSpec& p, const SolverConfig& cfg) {
  switch (cfg.variant) {
    case Variant::RAPM:
      return rapm_solve(p, cfg);
    case Variant::RPM:
      return rpm_solve(p, cfg);
    case Variant::BiGSAM:
      return bigsam_solve(p, cfg);
    case Variant::aIRG:
      return airg_solve(p, cfg);
    case Variant::FISTALower: {
      validate_config(cfg);
      return fista_lower_solve(p, cfg.K, cfg.x0, cfg.record_every);
    }
  }
  throw ParameterError("solve: unknown variant");
}

}  // namespace rapm
