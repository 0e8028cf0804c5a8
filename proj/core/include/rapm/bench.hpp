#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rapm/oracles.hpp"
#include "rapm/solvers.hpp"

namespace rapm {

enum class ReferenceSource { ClosedForm, LongRun };

std::string to_string(ReferenceSource s);

/// Optimal values that metrics are measured against.
struct Reference {
  std::string problem_id;
  double f_star = 0.0;
  double h_bar_star = 0.0;
  ReferenceSource source = ReferenceSource::ClosedForm;
  std::size_t budget = 0;          ///< LongRun only
  double lower_residual = 0.0;     ///< ||x - q_0(x)|| at the lower reference point
  double upper_residual = 0.0;     ///< ||x - q_eta(x)|| at the upper reference point
  /// x* for closed forms, final R-APM iterate of the long run otherwise.
  Vector x_ref;
  std::function<Vector(const Vector&)> project_lower;  ///< set for closed forms
};

/// Closed form when p has ground truth. Otherwise h_bar* is the smallest
/// h_bar seen along fista_lower_solve(budget) and f* is f at the end of an
/// R-APM run with eta = 1/(budget+1) over the same budget, both from x0.
Reference compute_reference(const ProblemSpec& p, std::size_t budget,
                            const std::optional<Vector>& x0 = std::nullopt);

struct MetricPoint {
  std::size_t k = 0;
  double f = 0.0;
  double h_bar = 0.0;
  double suboptimality = 0.0;     ///< |f(x_k) - f*|
  double infeasibility = 0.0;     ///< h_bar(x_k) - h_bar* (signed)
  double abs_infeasibility = 0.0;
  double dist_lower = std::numeric_limits<double>::quiet_NaN();  ///< dist(x_k, X*_h_bar)
};

struct MetricSeries {
  std::string problem_id;
  bool has_dist = false;
  std::vector<MetricPoint> points;
};

/// Metrics of each recorded x_k. Throws ParameterError when the trace and the
/// reference belong to different problems.
MetricSeries evaluate_trace(const IterateTrace& trace, const Reference& ref);

/// Same metrics on the step-weighted averages of an aIRG trace.
MetricSeries evaluate_averaged(const IterateTrace& trace, const Reference& ref,
                               const ProblemSpec& p);

struct InequalityResult {
  std::string name;
  bool applicable = true;
  bool passed = true;
  /// Normalized slack (rhs - lhs over a scale); pass iff >= -tolerance.
  double worst_margin = 0.0;
  std::size_t worst_k = 0;
  double tolerance = 0.0;
  std::size_t checked = 0;
  std::string note;
};

struct CertReport {
  std::vector<InequalityResult> items;

  /// True when every applicable inequality passed.
  bool passed() const;
  const InequalityResult* find(const std::string& name) const;
};

inline constexpr double kTheoremTol = 1e-9;
inline constexpr double kLemmaTol = 1e-8;

/// Bounds on the suboptimality and infeasibility of each recorded x_k, with
/// K := k and L_eta = L_h + eta L_f:
///   (i)   f(x_k) - f* <= 2 L_eta d0^2 / (eta (k+1)^2)
///   (ii)  0 <= h_bar(x_k) - h_bar* <= 4 L_eta d0^2 / (k+1)^2
///         dist(x_k, X*_h_bar) <= 4 L_eta d0^2 / (alpha (k+1)^2)
///   (iii) f(x_k) - f* >= -||grad f(x*)|| 4 L_eta d0^2 / (alpha (k+1)^2)
/// where d0 = dist(x_0, X*). (ii) and (iii) are reported as not applicable
/// unless eta <= alpha / (2 ||grad f(x*)||). Throws ParameterError without
/// ground truth.
CertReport certify_theorem1(const IterateTrace& trace, const ProblemSpec& p, double eta);

/// Budget-scaled regime (eta = 1/(K+1)) at the final iterate:
///   f(x_K) - f* <= 2 L_f d0^2/(K+1)^2 + 2 L_h d0^2/(K+1)
///   0 <= h_bar(x_K) - h_bar* <= 2 L_f dh^2/(K+1)^3 + 2 L_h dh^2/(K+1)^2 + D_f/(K+1)
/// with dh = dist(x_0, X*_h_bar) and D_f = max_k f(P(x_0)) - f(x_k) over the
/// recorded k >= 1, P the projection onto X*_h_bar. Throws ParameterError
/// without ground truth.
CertReport certify_proposition1(const IterateTrace& trace, const ProblemSpec& p);

/// Per-iteration checks along an accelerated trace with L := 1/gamma:
///   lemma2: F(x) - F(x_k) >= <y_k - x, x_k - y_k>/gamma + ||x_k - y_k||^2/(2 gamma)
///           for x in {x_{k-1}, x_cmp}
///   lemma3: (2/L)(t_k^2 v_k - t_{k+1}^2 v_{k+1}) >= ||u_{k+1}||^2 - ||u_k||^2
///           v_k = F(x_k) - F(x_cmp), u_k = t_k x_k - (t_k - 1) x_{k-1} - x_cmp
///   lemma4: v_k <= 2 L ||x_0 - x_cmp||^2 / (k+1)^2
/// Throws ParameterError unless every k in 0..K was recorded.
CertReport certify_lemma_chain(const IterateTrace& trace, const ProblemSpec& p, double eta,
                               const Vector& x_cmp);

struct RateReport {
  double slope = 0.0;      ///< least-squares slope of log(error) against log(k)
  double intercept = 0.0;
  double doubling_ratio = std::numeric_limits<double>::quiet_NaN();  ///< error(K/2) / error(K)
  std::size_t window_begin_k = 0;
  std::size_t window_end_k = 0;
  std::size_t points_used = 0;
};

inline constexpr double kRateFloor = 1e-13;

/// (k, error) pairs in increasing k.
using ErrorSeries = std::vector<std::pair<std::size_t, double>>;

ErrorSeries suboptimality_series(const MetricSeries& m);
ErrorSeries infeasibility_series(const MetricSeries& m);

/// Fits the last tail_fraction of the recorded points with k >= 1, skipping
/// entries below 1e-13. Throws ParameterError with fewer than 5 usable points.
RateReport estimate_rate(const ErrorSeries& series, double tail_fraction);

/// error(k) / error(2k) for k = k_min, 2 k_min, 4 k_min, ... while 2k is recorded.
std::vector<std::pair<std::size_t, double>> doubling_ratios(const ErrorSeries& series,
                                                            std::size_t k_min);

/// First recorded k with error <= threshold, if any.
std::optional<std::size_t> iterations_to_threshold(const ErrorSeries& series, double threshold);

enum class BudgetMetric { Suboptimality, Infeasibility };

/// Smallest K >= 0 with
///   suboptimality: K >= sqrt(2 (L_h/eta + L_f)) dist / sqrt(eps) - 1
///   infeasibility: K >= 2 sqrt(L_h + eta L_f) dist / sqrt(eps) - 1
std::size_t iteration_budget(double eps, double l_h, double l_f, double eta, double dist0,
                             BudgetMetric metric);

/// Header of the trace CSV format.
inline constexpr const char* kTraceCsvHeader =
    "k,f,h,omega,F_eta,subopt,infeas,dist,elapsed_seconds";

/// One row per record: k then values with %.17g. dist is empty when the
/// series has no lower-set distance. Rows pair trace records with series
/// points by position.
void write_trace_csv(const IterateTrace& trace, const MetricSeries& series,
                     const std::filesystem::path& path);

/// <dir>/<prefix><variant>.csv
std::filesystem::path trace_csv_path(const std::filesystem::path& dir, const std::string& prefix,
                                     Variant variant);

/// Parses a trace CSV back into rows of doubles (empty cells become NaN).
std::vector<std::vector<double>> read_trace_csv(const std::filesystem::path& path);

}  // namespace rapm
