#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "rapm/numerics.hpp"

namespace rapm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ZeroTerm {};

/// weight * ||x||_1
struct L1Norm {
  double weight = 0.0;
};

/// Indicator of { x : ||x||_1 <= radius }.
struct L1BallIndicator {
  double radius = 1.0;
};

/// Indicator of { x : lo <= x <= hi } componentwise.
struct BoxIndicator {
  Vector lo;
  Vector hi;
};

/// The nonsmooth term of a composite objective.
using ProxOp = std::variant<ZeroTerm, L1Norm, L1BallIndicator, BoxIndicator>;

// Checked constructors; each throws ParameterError on a violated invariant.
ProxOp make_zero();
ProxOp make_l1_norm(double weight);
ProxOp make_l1_ball(double radius);
ProxOp make_box(Vector lo, Vector hi);
/// [lo, hi]^n
ProxOp make_box(std::size_t n, double lo, double hi);

bool is_indicator(const ProxOp& op);
std::string describe(const ProxOp& op);

/// Rounding allowance of indicator values: a projection may land 1 ulp
/// outside its set.
inline constexpr double kIndicatorSlack = 1e-10;

/// Value of the term at x; +infinity when x is more than kIndicatorSlack
/// outside an indicator's set.
double evaluate(const ProxOp& op, const Vector& x);

bool is_feasible(const ProxOp& op, const Vector& x, double tol = 0.0);

/// argmin_z { gamma * op(z) + 0.5 ||z - u||^2 }.
///
/// Soft thresholding returns an exact zero whenever |u_i| <= gamma * weight.
/// Indicator terms return the Euclidean projection and do not use gamma.
Vector prox(const ProxOp& op, const Vector& u, double gamma);

struct L1Projection {
  Vector point;
  /// Soft threshold applied to |u|; 0 when u was already inside the ball.
  double threshold = 0.0;
};

/// Euclidean projection onto the l1-ball by sorting |u| in decreasing order.
L1Projection project_l1_ball_with_threshold(const Vector& u, double radius);
Vector project_l1_ball(const Vector& u, double radius);

Vector project_box(const Vector& u, const Vector& lo, const Vector& hi);

Vector soft_threshold(const Vector& u, double threshold);

struct CertificateResult {
  bool passed = false;
  /// Smallest (most negative) margin over all conditions checked; 0 is a
  /// tight pass, negative values below -tol fail.
  double worst_margin = 0.0;
  std::string detail;
};

/// Points v used for the variational inequality <u - z, v - z> <= tol ||v - z||.
///
///  - l1-ball: the 2n signed vertices +-radius * e_i (exhaustive).
///  - box, n <= 12: all 2^n vertices (exhaustive).
///  - box, n > 12: 128 uniform samples from the box, seeded by probe_seed.
///  - other terms: empty.
std::vector<Vector> probe_points(const ProxOp& op, std::size_t n,
                                 std::uint64_t probe_seed = 0x5eed);

/// Checks that (u - z) / gamma lies in the subdifferential of op at z.
///
/// Smooth-part terms are checked componentwise. Indicators are checked for
/// feasibility of z and for the variational inequality on probe_points(). A
/// failed check is reported in the result rather than thrown.
CertificateResult certify_prox(const ProxOp& op, const Vector& u, const Vector& z, double gamma,
                               double tol);

}  // namespace rapm
