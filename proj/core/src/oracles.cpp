#include "rapm/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "rapm/errors.hpp"
#include "rapm/rng.hpp"

namespace rapm {

namespace {

void require_dim(const char* what, std::size_t expected, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != expected) {
    throw DimensionError(what, expected, static_cast<std::size_t>(x.size()));
  }
}

void require_positive_eta(const char* what, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ParameterError(std::string(what) + ": eta must be finite and > 0 (got " +
                         std::to_string(eta) + ")");
  }
}

constexpr double kFdStep = 1e-5;
constexpr double kFdTol = 1e-5;
constexpr double kConvexityTol = 1e-9;
constexpr double kLipschitzTol = 1e-9;
constexpr double kGroundTruthTol = 1e-10;
constexpr double kFixedPointTol = 1e-12;

Vector random_point(Rng& rng, std::size_t n, double scale) {
  Vector x(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = scale * rng.normal();
  return x;
}

Vector central_difference(const SmoothOracle& g, const Vector& x) {
  Vector fd(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + kFdStep;
    const double up = g.value(probe);
    probe[i] = xi - kFdStep;
    const double down = g.value(probe);
    probe[i] = xi;
    fd[i] = (up - down) / (2.0 * kFdStep);
  }
  return fd;
}

CheckResult gradient_check(const std::string& label, const SmoothOracle& g, Rng& rng,
                           std::size_t n_samples) {
  CheckResult r{label + ".gradient_fd", true, 0.0, kFdTol, ""};
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vector x = random_point(rng, g.dimension, 1.0);
    const Vector grad = g.gradient(x);
    const Vector fd = central_difference(g, x);
    const double rel = norm_inf(grad - fd) / (1.0 + norm_inf(grad));
    r.worst_margin = std::min(r.worst_margin, -rel);
  }
  r.passed = r.worst_margin >= -r.tolerance;
  r.detail = "max relative deviation from central differences";
  return r;
}

CheckResult convexity_check(const std::string& label, const SmoothOracle& g, Rng& rng,
                            std::size_t n_samples) {
  CheckResult r{label + ".midpoint_convexity", true, 0.0, kConvexityTol, ""};
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vector x = random_point(rng, g.dimension, 2.0);
    const Vector y = random_point(rng, g.dimension, 2.0);
    const double gx = g.value(x);
    const double gy = g.value(y);
    const double gm = g.value(0.5 * (x + y));
    const double slack = (0.5 * (gx + gy) - gm) / (1.0 + std::abs(gx) + std::abs(gy));
    r.worst_margin = std::min(r.worst_margin, slack);
  }
  r.passed = r.worst_margin >= -r.tolerance;
  r.detail = "0.5 (g(x) + g(y)) - g((x + y) / 2), normalized";
  return r;
}

CheckResult lipschitz_check(const std::string& label, const SmoothOracle& g, Rng& rng,
                            std::size_t n_samples) {
  CheckResult r{label + ".lipschitz", true, 0.0, kLipschitzTol, ""};
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vector x = random_point(rng, g.dimension, 1.0);
    Vector d = random_point(rng, g.dimension, 1.0);
    const double len = norm2(d);
    if (len == 0.0) continue;
    const Vector gx = g.gradient(x);
    // Steer d toward the direction of largest gradient change.
    for (int it = 0; it < 20; ++it) {
      const Vector diff = g.gradient(x + d) - gx;
      const double dn = norm2(diff);
      if (dn == 0.0 || !std::isfinite(dn)) break;
      d = diff * (len / dn);
    }
    const double dist = norm2(d);
    const double grad_change = norm2(g.gradient(x + d) - gx);
    const double bound = g.lipschitz * dist;
    const double scale = std::max({bound, grad_change, 1e-300});
    r.worst_margin = std::min(r.worst_margin, (bound - grad_change) / scale);
  }
  r.passed = r.worst_margin >= -r.tolerance;
  r.detail = "(L ||x - y|| - ||grad(x) - grad(y)||) / max(both)";
  return r;
}

CheckResult scalar_match(const std::string& name, double actual, double expected, double tol,
                         const std::string& detail) {
  CheckResult r{name, true, -std::abs(actual - expected), tol, detail};
  if (!std::isfinite(actual)) r.worst_margin = -kInfinity;
  r.passed = r.worst_margin >= -tol;
  return r;
}

}  // namespace

SmoothOracle linear_oracle(Vector c) {
  const auto n = static_cast<std::size_t>(c.size());
  auto coef = std::make_shared<const Vector>(std::move(c));
  return SmoothOracle{
      [coef](const Vector& x) { return dot(*coef, x); },
      [coef](const Vector& x) -> Vector {
        require_dim("linear oracle gradient", static_cast<std::size_t>(coef->size()), x);
        return *coef;
      },
      0.0,
      n,
  };
}

SmoothOracle quadratic_oracle(Vector center, double curvature) {
  if (!(curvature >= 0.0) || !std::isfinite(curvature)) {
    throw ParameterError("quadratic_oracle: curvature must be finite and >= 0");
  }
  const auto n = static_cast<std::size_t>(center.size());
  auto c = std::make_shared<const Vector>(std::move(center));
  return SmoothOracle{
      [c, curvature](const Vector& x) {
        const Vector r = x - *c;
        return 0.5 * curvature * dot(r, r);
      },
      [c, curvature](const Vector& x) -> Vector {
        require_dim("quadratic oracle gradient", static_cast<std::size_t>(c->size()), x);
        return curvature * (x - *c);
      },
      curvature,
      n,
  };
}

SmoothOracle least_squares_oracle(DenseMatrix a, Vector b, double lipschitz) {
  if (a.rows() != static_cast<std::size_t>(b.size())) {
    throw DimensionError("least_squares_oracle: rows of A vs length of b", a.rows(),
                         static_cast<std::size_t>(b.size()));
  }
  struct Data {
    DenseMatrix a;
    Vector b;
  };
  const std::size_t n = a.cols();
  auto d = std::make_shared<const Data>(Data{std::move(a), std::move(b)});
  return SmoothOracle{
      [d](const Vector& x) {
        const Vector r = matvec(d->a, x) - d->b;
        return 0.5 * dot(r, r);
      },
      [d](const Vector& x) -> Vector { return matvec_transposed(d->a, matvec(d->a, x) - d->b); },
      lipschitz,
      n,
  };
}

ProblemSpec make_problem(std::string name, std::string id, SmoothOracle upper, SmoothOracle lower,
                         ProxOp nonsmooth, std::optional<GroundTruth> ground_truth,
                         bool lower_argmin_nonempty) {
  if (!upper.value || !upper.gradient || !lower.value || !lower.gradient) {
    throw ParameterError("make_problem: oracle callables must be set");
  }
  if (upper.dimension != lower.dimension) {
    throw DimensionError("make_problem: upper vs lower oracle dimension", lower.dimension,
                         upper.dimension);
  }
  for (const auto* o : {&upper, &lower}) {
    if (!(o->lipschitz >= 0.0) || !std::isfinite(o->lipschitz)) {
      throw ParameterError("make_problem: Lipschitz constants must be finite and >= 0");
    }
  }
  const std::size_t n = upper.dimension;
  if (const auto* box = std::get_if<BoxIndicator>(&nonsmooth)) {
    if (static_cast<std::size_t>(box->lo.size()) != n) {
      throw DimensionError("make_problem: box bounds vs problem dimension", n,
                           static_cast<std::size_t>(box->lo.size()));
    }
  }
  if (ground_truth) require_dim("make_problem: ground-truth x*", n, ground_truth->x_star);

  ProblemSpec p;
  p.name = std::move(name);
  p.id = std::move(id);
  p.upper = std::move(upper);
  p.lower = std::move(lower);
  p.nonsmooth = std::move(nonsmooth);
  p.dimension = n;
  p.ground_truth = std::move(ground_truth);
  p.lower_argmin_nonempty = lower_argmin_nonempty;
  return p;
}

double f_eta_value(const ProblemSpec& p, double eta, const Vector& x) {
  require_positive_eta("f_eta_value", eta);
  require_dim("f_eta_value", p.dimension, x);
  return p.lower.value(x) + eta * p.upper.value(x);
}

double F_eta_value(const ProblemSpec& p, double eta, const Vector& x) {
  const double w = evaluate(p.nonsmooth, x);
  const double fe = f_eta_value(p, eta, x);
  return std::isinf(w) ? kInfinity : fe + w;
}

Vector grad_f_eta(const ProblemSpec& p, double eta, const Vector& x) {
  require_positive_eta("grad_f_eta", eta);
  require_dim("grad_f_eta", p.dimension, x);
  return p.lower.gradient(x) + eta * p.upper.gradient(x);
}

double lipschitz_L_eta(const ProblemSpec& p, double eta) {
  return p.lower.lipschitz + eta * p.upper.lipschitz;
}

double h_bar_value(const ProblemSpec& p, const Vector& x) {
  require_dim("h_bar_value", p.dimension, x);
  const double w = evaluate(p.nonsmooth, x);
  return std::isinf(w) ? kInfinity : p.lower.value(x) + w;
}

double max_step(const ProblemSpec& p, double eta) {
  const double l = lipschitz_L_eta(p, eta);
  return l > 0.0 ? 1.0 / l : kInfinity;
}

Vector q_map(const ProblemSpec& p, double eta, double gamma, const Vector& x) {
  require_dim("q_map", p.dimension, x);
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ParameterError("q_map: eta must be >= 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("q_map: gamma must be > 0");
  const double bound = max_step(p, eta);
  if (gamma > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "q_map: step size gamma = " << gamma << " exceeds 1/(L_h + eta L_f) = " << bound;
    throw ParameterError(os.str());
  }
  Vector g = p.lower.gradient(x);
  if (eta != 0.0) g += eta * p.upper.gradient(x);
  return prox(p.nonsmooth, x - gamma * g, gamma);
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ValidationReport validate_problem(const ProblemSpec& p, std::uint64_t seed,
                                  std::size_t n_samples) {
  ValidationReport report;
  Rng rng(seed);

  CheckResult dims{"dimensions", true, 0.0, 0.0, "upper, lower and nonsmooth term agree"};
  dims.passed = p.upper.dimension == p.dimension && p.lower.dimension == p.dimension;
  if (const auto* box = std::get_if<BoxIndicator>(&p.nonsmooth)) {
    dims.passed = dims.passed && static_cast<std::size_t>(box->lo.size()) == p.dimension;
  }
  dims.worst_margin = dims.passed ? 0.0 : -1.0;
  report.checks.push_back(dims);
  if (!dims.passed) return report;

  const std::array<std::pair<std::string, const SmoothOracle*>, 2> levels{
      {{"upper", &p.upper}, {"lower", &p.lower}}};
  for (const auto& [label, oracle] : levels) {
    report.checks.push_back(gradient_check(label, *oracle, rng, n_samples));
    report.checks.push_back(convexity_check(label, *oracle, rng, n_samples));
    report.checks.push_back(lipschitz_check(label, *oracle, rng, n_samples));
  }

  if (p.ground_truth) {
    const GroundTruth& gt = *p.ground_truth;
    report.checks.push_back(scalar_match("ground_truth.f_star", p.upper.value(gt.x_star),
                                         gt.f_star, kGroundTruthTol, "|f(x*) - f*|"));
    report.checks.push_back(scalar_match("ground_truth.h_bar_star", h_bar_value(p, gt.x_star),
                                         gt.h_bar_star, kGroundTruthTol,
                                         "|h(x*) + omega(x*) - h_bar*|"));
    report.checks.push_back(scalar_match("ground_truth.grad_f_norm",
                                         norm2(p.upper.gradient(gt.x_star)),
                                         gt.grad_f_at_xstar_norm, kGroundTruthTol,
                                         "| ||grad f(x*)|| - recorded value |"));
    // Unit step when h is linear: any gamma is admissible there.
    const double gamma = p.lower.lipschitz > 0.0 ? 1.0 / p.lower.lipschitz : 1.0;
    const double residual = norm2(q_map(p, 0.0, gamma, gt.x_star) - gt.x_star);
    report.checks.push_back(scalar_match("ground_truth.lower_fixed_point", residual, 0.0,
                                         kFixedPointTol, "||q_0(x*) - x*|| (eta = 0)"));
  }
  return report;
}

}  // namespace rapm
