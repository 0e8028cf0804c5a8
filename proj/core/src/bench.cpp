#include "rapm/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "rapm/problems.hpp"

namespace rapm {

namespace fs = std::filesystem;

namespace {

constexpr double kLowest = std::numeric_limits<double>::lowest();

/// Folds one normalized slack into an inequality result. Non-finite slacks
/// count as the worst possible violation so reported margins stay finite.
void record_margin(InequalityResult& r, double slack, std::size_t k) {
  if (std::isnan(slack) || slack == -kInfinity) slack = kLowest;
  if (slack == kInfinity) return;
  ++r.checked;
  if (r.checked == 1 || slack < r.worst_margin) {
    r.worst_margin = slack;
    r.worst_k = k;
  }
}

void finalize(InequalityResult& r) {
  r.passed = !r.applicable || r.worst_margin >= -r.tolerance;
}

InequalityResult make_item(std::string name, double tol) {
  InequalityResult r;
  r.name = std::move(name);
  r.tolerance = tol;
  return r;
}

/// (rhs - lhs) / (1 + |rhs|); the upper-bound form of a margin.
double upper_slack(double lhs, double rhs) {
  if (std::isinf(lhs) && lhs > 0) return -kInfinity;
  return (rhs - lhs) / (1.0 + std::abs(rhs));
}

const GroundTruth& require_truth(const ProblemSpec& p, const char* who) {
  if (!p.ground_truth) throw ParameterError(std::string(who) + ": problem has no ground truth");
  if (!p.ground_truth->dist_to_solution_set) {
    throw ParameterError(std::string(who) + ": ground truth lacks dist(., X*)");
  }
  return *p.ground_truth;
}

double composite_value(const ProblemSpec& p, double eta, const Vector& x) {
  const double w = evaluate(p.nonsmooth, x);
  if (std::isinf(w)) return kInfinity;
  return p.lower.value(x) + eta * p.upper.value(x) + w;
}

MetricPoint metric_point(std::size_t k, double f, double h, double omega, const Vector& x,
                         const Reference& ref) {
  MetricPoint m;
  m.k = k;
  m.f = f;
  m.h_bar = std::isinf(omega) ? kInfinity : h + omega;
  m.suboptimality = std::abs(f - ref.f_star);
  m.infeasibility = m.h_bar - ref.h_bar_star;
  m.abs_infeasibility = std::abs(m.infeasibility);
  if (ref.project_lower) m.dist_lower = norm2(x - ref.project_lower(x));
  return m;
}

}  // namespace

std::string to_string(ReferenceSource s) {
  return s == ReferenceSource::ClosedForm ? "ClosedForm" : "LongRun";
}

Reference compute_reference(const ProblemSpec& p, std::size_t budget,
                            const std::optional<Vector>& x0) {
  if (budget < 1) throw ParameterError("compute_reference: budget must be >= 1");
  Reference ref;
  ref.problem_id = p.id;

  if (p.ground_truth) {
    const GroundTruth& gt = *p.ground_truth;
    ref.source = ReferenceSource::ClosedForm;
    ref.f_star = gt.f_star;
    ref.h_bar_star = gt.h_bar_star;
    ref.x_ref = gt.x_star;
    ref.project_lower = gt.project_lower_solution_set;
    return ref;
  }

  ref.source = ReferenceSource::LongRun;
  ref.budget = budget;

  const std::size_t every = std::max<std::size_t>(1, budget / 2000);
  const IterateTrace lower = fista_lower_solve(p, budget, x0, every);
  ref.h_bar_star = kInfinity;
  for (const auto& r : lower.records) {
    if (!std::isinf(r.omega)) ref.h_bar_star = std::min(ref.h_bar_star, r.h + r.omega);
  }
  const Vector& xl = lower.last().x;
  ref.lower_residual = norm2(xl - q_map(p, 0.0, lower.gamma, xl));

  SolverConfig cfg;
  cfg.variant = Variant::RAPM;
  cfg.K = budget;
  cfg.eta_mode = BudgetScaledEta{};
  cfg.gamma_rule = MaxStep{};
  cfg.x0 = x0;
  cfg.record_every = budget;
  const IterateTrace upper = rapm_solve(p, cfg);
  ref.x_ref = upper.last().x;
  ref.f_star = upper.last().f;
  ref.upper_residual = norm2(ref.x_ref - q_map(p, upper.eta, upper.gamma, ref.x_ref));
  return ref;
}

MetricSeries evaluate_trace(const IterateTrace& trace, const Reference& ref) {
  if (trace.problem_id != ref.problem_id) {
    throw ParameterError("evaluate_trace: trace is for problem '" + trace.problem_id +
                         "' but the reference is for '" + ref.problem_id + "'");
  }
  MetricSeries s;
  s.problem_id = trace.problem_id;
  s.has_dist = static_cast<bool>(ref.project_lower);
  s.points.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    s.points.push_back(metric_point(r.k, r.f, r.h, r.omega, r.x, ref));
  }
  return s;
}

MetricSeries evaluate_averaged(const IterateTrace& trace, const Reference& ref,
                               const ProblemSpec& p) {
  if (trace.problem_id != ref.problem_id || p.id != ref.problem_id) {
    throw ParameterError("evaluate_averaged: trace, reference and problem must match");
  }
  MetricSeries s;
  s.problem_id = trace.problem_id;
  s.has_dist = static_cast<bool>(ref.project_lower);
  for (const auto& r : trace.records) {
    if (!r.x_avg) throw ParameterError("evaluate_averaged: trace has no averaged iterates");
    const Vector& x = *r.x_avg;
    s.points.push_back(metric_point(r.k, p.upper.value(x), p.lower.value(x),
                                    evaluate(p.nonsmooth, x), x, ref));
  }
  return s;
}

bool CertReport::passed() const {
  return std::all_of(items.begin(), items.end(),
                     [](const InequalityResult& r) { return !r.applicable || r.passed; });
}

const InequalityResult* CertReport::find(const std::string& name) const {
  for (const auto& r : items) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

CertReport certify_theorem1(const IterateTrace& trace, const ProblemSpec& p, double eta) {
  const GroundTruth& gt = require_truth(p, "certify_theorem1");
  if (trace.problem_id != p.id) throw ParameterError("certify_theorem1: trace/problem mismatch");
  if (!(eta > 0.0)) throw ParameterError("certify_theorem1: eta must be > 0");

  const double l_eta = lipschitz_L_eta(p, eta);
  const double d0 = gt.dist_to_solution_set(trace.x0);
  const double d0sq = d0 * d0;
  const double gnorm = gt.grad_f_at_xstar_norm;

  bool premise = false;
  std::string gate;
  if (!gt.alpha) {
    gate = "no weak-sharpness modulus";
  } else if (gnorm > 0.0 && eta > (*gt.alpha / (2.0 * gnorm)) * (1.0 + 1e-12)) {
    gate = "eta exceeds alpha / (2 ||grad f(x*)||)";
  } else {
    premise = true;
  }

  auto sub_up = make_item("theorem1.i.suboptimality_upper", kTheoremTol);
  auto inf_lo = make_item("theorem1.ii.infeasibility_lower", kTheoremTol);
  auto inf_up = make_item("theorem1.ii.infeasibility_upper", kTheoremTol);
  auto dist_up = make_item("theorem1.ii.distance_upper", kTheoremTol);
  auto sub_lo = make_item("theorem1.iii.suboptimality_lower", kTheoremTol);
  for (auto* r : {&inf_lo, &inf_up, &dist_up, &sub_lo}) {
    r->applicable = premise;
    r->note = premise ? "" : "not applicable: " + gate;
  }
  if (premise && !gt.project_lower_solution_set) {
    dist_up.applicable = false;
    dist_up.note = "not applicable: no projection onto X*_h_bar";
  }

  for (const auto& r : trace.records) {
    if (r.k == 0) continue;
    const double k1 = static_cast<double>(r.k) + 1.0;
    const double sub = r.f - gt.f_star;
    const double h_bar = std::isinf(r.omega) ? kInfinity : r.h + r.omega;
    const double infeas = h_bar - gt.h_bar_star;

    record_margin(sub_up, upper_slack(sub, 2.0 * l_eta * d0sq / (eta * k1 * k1)), r.k);
    if (!premise) continue;
    const double alpha = *gt.alpha;
    const double inf_bound = 4.0 * l_eta * d0sq / (k1 * k1);
    record_margin(inf_lo, infeas / (1.0 + std::abs(infeas)), r.k);
    record_margin(inf_up, upper_slack(infeas, inf_bound), r.k);
    if (dist_up.applicable) {
      const double dist = norm2(r.x - gt.project_lower_solution_set(r.x));
      record_margin(dist_up, upper_slack(dist, inf_bound / alpha), r.k);
    }
    const double lower_bound = -gnorm * inf_bound / alpha;
    record_margin(sub_lo, (sub - lower_bound) / (1.0 + std::abs(lower_bound)), r.k);
  }

  CertReport rep;
  for (auto* r : {&sub_up, &inf_lo, &inf_up, &dist_up, &sub_lo}) {
    finalize(*r);
    rep.items.push_back(std::move(*r));
  }
  return rep;
}

CertReport certify_proposition1(const IterateTrace& trace, const ProblemSpec& p) {
  const GroundTruth& gt = require_truth(p, "certify_proposition1");
  if (trace.problem_id != p.id) {
    throw ParameterError("certify_proposition1: trace/problem mismatch");
  }
  const double k1 = static_cast<double>(trace.K) + 1.0;
  const double d0 = gt.dist_to_solution_set(trace.x0);
  const double l_h = p.lower.lipschitz;
  const double l_f = p.upper.lipschitz;
  const IterateRecord& last = trace.last();

  auto sub_up = make_item("proposition1.i.suboptimality_upper", kTheoremTol);
  const double sub = last.f - gt.f_star;
  record_margin(sub_up,
                upper_slack(sub, 2.0 * l_f * d0 * d0 / (k1 * k1) + 2.0 * l_h * d0 * d0 / k1),
                last.k);
  if (std::abs(trace.eta * k1 - 1.0) > 1e-12) {
    sub_up.note = "eta != 1/(K+1); bound evaluated anyway";
  }

  auto inf_lo = make_item("proposition1.ii.infeasibility_lower", kTheoremTol);
  auto inf_up = make_item("proposition1.ii.infeasibility_upper", kTheoremTol);
  const double h_bar = std::isinf(last.omega) ? kInfinity : last.h + last.omega;
  const double infeas = h_bar - gt.h_bar_star;
  record_margin(inf_lo, infeas / (1.0 + std::abs(infeas)), last.k);
  if (gt.project_lower_solution_set) {
    const Vector anchor = gt.project_lower_solution_set(trace.x0);
    const double dh = norm2(trace.x0 - anchor);
    const double f_anchor = p.upper.value(anchor);
    double d_f = -kInfinity;
    for (const auto& r : trace.records) {
      if (r.k >= 1) d_f = std::max(d_f, f_anchor - r.f);
    }
    const double bound = 2.0 * l_f * dh * dh / (k1 * k1 * k1) + 2.0 * l_h * dh * dh / (k1 * k1) +
                         d_f / k1;
    record_margin(inf_up, upper_slack(infeas, bound), last.k);
    inf_up.note = "D_f = " + format_double(d_f);
  } else {
    inf_up.applicable = false;
    inf_up.note = "not applicable: no projection onto X*_h_bar";
  }

  CertReport rep;
  for (auto* r : {&sub_up, &inf_lo, &inf_up}) {
    finalize(*r);
    rep.items.push_back(std::move(*r));
  }
  return rep;
}

CertReport certify_lemma_chain(const IterateTrace& trace, const ProblemSpec& p, double eta,
                               const Vector& x_cmp) {
  if (trace.problem_id != p.id) {
    throw ParameterError("certify_lemma_chain: trace/problem mismatch");
  }
  if (trace.records.size() != trace.K + 1) {
    throw ParameterError("certify_lemma_chain: trace recorded too sparsely (need every k, "
                         "record_every = 1)");
  }
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    if (trace.records[i].k != i) {
      throw ParameterError("certify_lemma_chain: trace records are not consecutive");
    }
  }
  if (!(trace.gamma > 0.0)) throw ParameterError("certify_lemma_chain: trace has no step size");

  const double gamma = trace.gamma;
  const double two_over_l = 2.0 * gamma;
  const double cmp_value = composite_value(p, eta, x_cmp);
  const double cmp_scale = 1.0 + dot(x_cmp, x_cmp);
  const auto& rec = trace.records;
  const std::size_t K = trace.K;

  std::vector<double> F(K + 1);
  for (std::size_t k = 0; k <= K; ++k) F[k] = composite_value(p, eta, rec[k].x);

  auto lemma2 = make_item("lemma2.descent", kLemmaTol);
  auto lemma3 = make_item("lemma3.recursion", kLemmaTol);
  auto lemma4 = make_item("lemma4.value_bound", kLemmaTol);

  auto check_descent = [&](double f_x, const Vector& x, std::size_t k) {
    if (std::isinf(f_x)) return;  // infeasible comparison point: holds trivially
    const Vector& y = rec[k].y;
    const Vector step = rec[k].x - y;
    const double inner = dot(y - x, step) / gamma;
    const double quad = dot(step, step) / (2.0 * gamma);
    const double lhs = f_x - F[k];
    const double rhs = inner + quad;
    const double scale =
        1.0 + std::max({std::abs(f_x), std::abs(F[k]), std::abs(inner), std::abs(quad)});
    record_margin(lemma2, std::isinf(F[k]) ? -kInfinity : (lhs - rhs) / scale, k);
  };

  auto u_vec = [&](std::size_t k) -> Vector {
    return rec[k].t * rec[k].x - (rec[k].t - 1.0) * rec[k - 1].x - x_cmp;
  };

  const double d0sq = dot(trace.x0 - x_cmp, trace.x0 - x_cmp);
  for (std::size_t k = 1; k <= K; ++k) {
    check_descent(F[k - 1], rec[k - 1].x, k);
    check_descent(cmp_value, x_cmp, k);

    const double v_k = F[k] - cmp_value;
    const double k1 = static_cast<double>(k) + 1.0;
    const double bound = two_over_l == 0.0 ? kInfinity : 2.0 * d0sq / (gamma * k1 * k1);
    record_margin(lemma4, (bound - v_k) / (1.0 + std::abs(cmp_value)), k);

    if (k + 1 <= K) {
      const double t_k = rec[k].t;
      const double t_n = rec[k + 1].t;
      const double v_n = F[k + 1] - cmp_value;
      const double lhs = two_over_l * (t_k * t_k * v_k - t_n * t_n * v_n);
      const Vector u_k = u_vec(k);
      const Vector u_n = u_vec(k + 1);
      const double rhs = dot(u_n, u_n) - dot(u_k, u_k);
      record_margin(lemma3, (lhs - rhs) / cmp_scale, k);
    }
  }
  if (K < 2) lemma3.note = "vacuous for K < 2";

  CertReport rep;
  for (auto* r : {&lemma2, &lemma3, &lemma4}) {
    finalize(*r);
    rep.items.push_back(std::move(*r));
  }
  return rep;
}

ErrorSeries suboptimality_series(const MetricSeries& m) {
  ErrorSeries s;
  s.reserve(m.points.size());
  for (const auto& pt : m.points) s.emplace_back(pt.k, pt.suboptimality);
  return s;
}

ErrorSeries infeasibility_series(const MetricSeries& m) {
  ErrorSeries s;
  s.reserve(m.points.size());
  for (const auto& pt : m.points) s.emplace_back(pt.k, pt.abs_infeasibility);
  return s;
}

RateReport estimate_rate(const ErrorSeries& series, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw ParameterError("estimate_rate: tail_fraction must lie in (0, 1]");
  }
  std::vector<std::pair<std::size_t, double>> recorded;
  for (const auto& e : series) {
    if (e.first >= 1) recorded.push_back(e);
  }
  const auto take = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(recorded.size())));
  const std::size_t begin = recorded.size() - std::min(take, recorded.size());

  RateReport rep;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = begin; i < recorded.size(); ++i) {
    const auto [k, err] = recorded[i];
    if (!std::isfinite(err) || err < kRateFloor) continue;
    const double lx = std::log(static_cast<double>(k));
    const double ly = std::log(err);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    if (n == 0) rep.window_begin_k = k;
    rep.window_end_k = k;
    ++n;
  }
  if (n < 5) {
    throw ParameterError("estimate_rate: only " + std::to_string(n) +
                         " usable tail points (need 5; entries below 1e-13 are excluded)");
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  rep.slope = (dn * sxy - sx * sy) / denom;
  rep.intercept = (sy - rep.slope * sx) / dn;
  rep.points_used = n;

  const auto [k_last, e_last] = recorded.back();
  const std::size_t half = k_last / 2;
  for (auto it = recorded.rbegin(); it != recorded.rend(); ++it) {
    if (it->first <= half) {
      if (e_last >= kRateFloor && std::isfinite(it->second)) {
        rep.doubling_ratio = it->second / e_last;
      }
      break;
    }
  }
  return rep;
}

std::vector<std::pair<std::size_t, double>> doubling_ratios(const ErrorSeries& series,
                                                            std::size_t k_min) {
  std::vector<std::pair<std::size_t, double>> out;
  if (k_min == 0) return out;
  auto lookup = [&](std::size_t k) -> std::optional<double> {
    for (const auto& e : series) {
      if (e.first == k) return e.second;
    }
    return std::nullopt;
  };
  for (std::size_t k = k_min;; k *= 2) {
    const auto a = lookup(k);
    const auto b = lookup(2 * k);
    if (!a || !b) break;
    out.emplace_back(k, *a / *b);
  }
  return out;
}

std::optional<std::size_t> iterations_to_threshold(const ErrorSeries& series, double threshold) {
  for (const auto& [k, err] : series) {
    if (err <= threshold) return k;
  }
  return std::nullopt;
}

std::size_t iteration_budget(double eps, double l_h, double l_f, double eta, double dist0,
                             BudgetMetric metric) {
  if (!(eps > 0.0) || !(eta > 0.0) || !(dist0 > 0.0) || !(l_h >= 0.0) || !(l_f >= 0.0) ||
      !(l_h + l_f > 0.0)) {
    throw ParameterError("iteration_budget: eps, eta, dist0 must be > 0; L_h, L_f >= 0 and not "
                         "both 0");
  }
  // K + 1 >= dist * sqrt(c / eps)
  const double c = metric == BudgetMetric::Suboptimality ? 2.0 * (l_h / eta + l_f)
                                                          : 4.0 * (l_h + eta * l_f);
  const double rhs = dist0 * std::sqrt(c / eps) - 1.0;
  if (rhs <= 0.0) return 0;
  // Absorb rounding in rhs so exact integer bounds are not pushed up by one.
  return static_cast<std::size_t>(std::ceil(rhs * (1.0 - 1e-14)));
}

void write_trace_csv(const IterateTrace& trace, const MetricSeries& series, const fs::path& path) {
  if (series.points.size() != trace.records.size()) {
    throw ParameterError("write_trace_csv: series length differs from trace length");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open trace file '" + path.string() + "' for writing");
  out << kTraceCsvHeader << '\n';
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    const auto& m = series.points[i];
    out << r.k << ',' << format_double(r.f) << ',' << format_double(r.h) << ','
        << format_double(r.omega) << ',' << format_double(r.F_eta) << ','
        << format_double(m.suboptimality) << ',' << format_double(m.infeasibility) << ',';
    if (series.has_dist) out << format_double(m.dist_lower);
    out << ',' << format_double(r.elapsed_seconds) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failed for trace file '" + path.string() + "'");
}

fs::path trace_csv_path(const fs::path& dir, const std::string& prefix, Variant variant) {
  return dir / (prefix + to_string(variant) + ".csv");
}

std::vector<std::vector<double>> read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw ParseError(path.string(), 1, 0, "missing or unexpected trace header");
  }
  std::vector<std::vector<double>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    std::vector<double> values;
    std::string_view rest = line;
    std::size_t col = 0;
    while (true) {
      ++col;
      const auto comma = rest.find(',');
      const std::string_view cell = rest.substr(0, comma);
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!cell.empty()) {
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
          throw ParseError(path.string(), row, col, "bad number '" + std::string(cell) + "'");
        }
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(values));
  }
  return rows;
}

}  // namespace rapm
