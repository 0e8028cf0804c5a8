#include "rapm/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "rapm/errors.hpp"
#include "rapm/rng.hpp"

namespace rapm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_same_size(const char* what, const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw DimensionError(what, static_cast<std::size_t>(a.size()),
                         static_cast<std::size_t>(b.size()));
  }
}

void require_box_size(const BoxIndicator& box, const Vector& x) {
  if (box.lo.size() != x.size()) {
    throw DimensionError("box indicator: bounds and point lengths differ",
                         static_cast<std::size_t>(box.lo.size()),
                         static_cast<std::size_t>(x.size()));
  }
}

double box_violation(const BoxIndicator& box, const Vector& x) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    v = std::max({v, box.lo[i] - x[i], x[i] - box.hi[i]});
  }
  return v;
}

// Worst margin of the variational inequality <u - z, v - z> <= tol ||v - z||,
// normalized by ||v - z|| so the margin compares directly against -tol.
double variational_margin(const std::vector<Vector>& probes, const Vector& u, const Vector& z) {
  const Vector r = u - z;
  // Probes within rounding distance of z carry no direction.
  const double coincident = 1e-12 * (1.0 + norm_inf(z));
  double worst = 0.0;
  for (const auto& v : probes) {
    const Vector d = v - z;
    const double dn = norm2(d);
    if (dn <= coincident) continue;
    worst = std::min(worst, -dot(r, d) / dn);
  }
  return worst;
}

}  // namespace

ProxOp make_zero() { return ZeroTerm{}; }

ProxOp make_l1_norm(double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw ParameterError("L1Norm: weight must be finite and >= 0");
  }
  return L1Norm{weight};
}

ProxOp make_l1_ball(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParameterError("L1BallIndicator: radius must be finite and > 0");
  }
  return L1BallIndicator{radius};
}

ProxOp make_box(Vector lo, Vector hi) {
  require_same_size("BoxIndicator: lo and hi lengths differ", lo, hi);
  if (!all_finite(lo) || !all_finite(hi)) {
    throw ParameterError("BoxIndicator: bounds must be finite");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) {
      throw ParameterError("BoxIndicator: lo > hi at index " + std::to_string(i));
    }
  }
  return BoxIndicator{std::move(lo), std::move(hi)};
}

ProxOp make_box(std::size_t n, double lo, double hi) {
  const auto k = static_cast<Eigen::Index>(n);
  return make_box(Vector::Constant(k, lo), Vector::Constant(k, hi));
}

bool is_indicator(const ProxOp& op) {
  return std::holds_alternative<L1BallIndicator>(op) || std::holds_alternative<BoxIndicator>(op);
}

std::string describe(const ProxOp& op) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const ZeroTerm&) { os << "zero"; },
                 [&](const L1Norm& t) { os << "l1_norm(weight=" << t.weight << ")"; },
                 [&](const L1BallIndicator& t) { os << "l1_ball(radius=" << t.radius << ")"; },
                 [&](const BoxIndicator& t) { os << "box(n=" << t.lo.size() << ")"; },
             },
             op);
  return os.str();
}

double evaluate(const ProxOp& op, const Vector& x) {
  return std::visit(Overloaded{
                        [](const ZeroTerm&) { return 0.0; },
                        [&](const L1Norm& t) { return t.weight * norm1(x); },
                        [&](const L1BallIndicator& t) {
                          return norm1(x) <= t.radius + kIndicatorSlack ? 0.0 : kInfinity;
                        },
                        [&](const BoxIndicator& t) {
                          require_box_size(t, x);
                          return box_violation(t, x) <= kIndicatorSlack ? 0.0 : kInfinity;
                        },
                    },
                    op);
}

bool is_feasible(const ProxOp& op, const Vector& x, double tol) {
  return std::visit(Overloaded{
                        [](const ZeroTerm&) { return true; },
                        [](const L1Norm&) { return true; },
                        [&](const L1BallIndicator& t) { return norm1(x) <= t.radius + tol; },
                        [&](const BoxIndicator& t) {
                          require_box_size(t, x);
                          return box_violation(t, x) <= tol;
                        },
                    },
                    op);
}

Vector soft_threshold(const Vector& u, double threshold) {
  Vector z(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    z[i] = a <= threshold ? 0.0 : std::copysign(a - threshold, u[i]);
  }
  return z;
}

L1Projection project_l1_ball_with_threshold(const Vector& u, double radius) {
  if (!(radius > 0.0)) throw ParameterError("project_l1_ball: radius must be > 0");
  if (norm1(u) <= radius) return {u, 0.0};

  std::vector<double> mags(static_cast<std::size_t>(u.size()));
  for (Eigen::Index i = 0; i < u.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(u[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  // theta = (sum of the rho largest magnitudes - radius) / rho, with rho the
  // last index at which the running threshold stays below the magnitude.
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumsum += mags[j];
    const double candidate = (cumsum - radius) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) {
      theta = candidate;
    } else {
      break;
    }
  }
  return {soft_threshold(u, theta), theta};
}

Vector project_l1_ball(const Vector& u, double radius) {
  return project_l1_ball_with_threshold(u, radius).point;
}

Vector project_box(const Vector& u, const Vector& lo, const Vector& hi) {
  require_same_size("project_box: bounds and point lengths differ", lo, u);
  require_same_size("project_box: bounds lengths differ", lo, hi);
  return u.cwiseMax(lo).cwiseMin(hi);
}

Vector prox(const ProxOp& op, const Vector& u, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("prox: gamma must be > 0");
  return std::visit(Overloaded{
                        [&](const ZeroTerm&) -> Vector { return u; },
                        [&](const L1Norm& t) { return soft_threshold(u, gamma * t.weight); },
                        // Projections: gamma * indicator is the same indicator.
                        [&](const L1BallIndicator& t) { return project_l1_ball(u, t.radius); },
                        [&](const BoxIndicator& t) { return project_box(u, t.lo, t.hi); },
                    },
                    op);
}

std::vector<Vector> probe_points(const ProxOp& op, std::size_t n, std::uint64_t probe_seed) {
  const auto k = static_cast<Eigen::Index>(n);
  std::vector<Vector> probes;
  std::visit(Overloaded{
                 [](const ZeroTerm&) {},
                 [](const L1Norm&) {},
                 [&](const L1BallIndicator& t) {
                   probes.reserve(2 * n);
                   for (Eigen::Index i = 0; i < k; ++i) {
                     probes.push_back(Vector::Unit(k, i) * t.radius);
                     probes.push_back(Vector::Unit(k, i) * -t.radius);
                   }
                 },
                 [&](const BoxIndicator& t) {
                   if (n <= 12) {
                     const std::size_t count = std::size_t{1} << n;
                     probes.reserve(count);
                     for (std::size_t mask = 0; mask < count; ++mask) {
                       Vector v(k);
                       for (Eigen::Index i = 0; i < k; ++i) {
                         v[i] = ((mask >> i) & 1U) != 0 ? t.hi[i] : t.lo[i];
                       }
                       probes.push_back(std::move(v));
                     }
                   } else {
                     Rng rng(probe_seed);
                     probes.reserve(128);
                     for (int s = 0; s < 128; ++s) {
                       Vector v(k);
                       for (Eigen::Index i = 0; i < k; ++i) v[i] = rng.uniform(t.lo[i], t.hi[i]);
                       probes.push_back(std::move(v));
                     }
                   }
                 },
             },
             op);
  return probes;
}

CertificateResult certify_prox(const ProxOp& op, const Vector& u, const Vector& z, double gamma,
                               double tol) {
  CertificateResult out;
  if (u.size() != z.size() || !(gamma > 0.0)) {
    out.worst_margin = -kInfinity;
    out.detail = "malformed input: size mismatch or nonpositive gamma";
    return out;
  }
  const Vector g = (u - z) / gamma;

  std::visit(Overloaded{
                 [&](const ZeroTerm&) {
                   out.worst_margin = -norm_inf(g);
                   out.detail = "subgradient must vanish";
                 },
                 [&](const L1Norm& t) {
                   double worst = 0.0;
                   for (Eigen::Index i = 0; i < g.size(); ++i) {
                     const double viol = z[i] == 0.0
                                             ? std::max(0.0, std::abs(g[i]) - t.weight)
                                             : std::abs(g[i] - std::copysign(t.weight, z[i]));
                     worst = std::min(worst, -viol);
                   }
                   out.worst_margin = worst;
                   out.detail = "componentwise l1 subdifferential";
                 },
                 [&](const L1BallIndicator& t) {
                   const double feas = -std::max(0.0, norm1(z) - t.radius);
                   const double vi =
                       variational_margin(probe_points(op, static_cast<std::size_t>(z.size())), u, z);
                   out.worst_margin = std::min(feas, vi);
                   out.detail = "feasibility + variational inequality on l1-ball vertices";
                 },
                 [&](const BoxIndicator& t) {
                   require_box_size(t, z);
                   const double feas = -box_violation(t, z);
                   const double vi =
                       variational_margin(probe_points(op, static_cast<std::size_t>(z.size())), u, z);
                   out.worst_margin = std::min(feas, vi);
                   out.detail = "feasibility + variational inequality on box probes";
                 },
             },
             op);
  out.passed = out.worst_margin >= -tol;
  return out;
}

}  // namespace rapm
