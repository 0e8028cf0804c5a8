#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <variant>
#include <vector>

#include "rapm/bench.hpp"
#include "rapm/problems.hpp"
#include "rapm/prox.hpp"
#include "rapm/solvers.hpp"

namespace rapm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_g(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void print_row(std::ostream& out, const std::string& name, const std::string& status,
               double margin, const std::string& extra) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-40s %-5s %14s  %s\n", name.c_str(), status.c_str(),
                fmt_g(margin).c_str(), extra.c_str());
  out << buf;
}

struct RunResult {
  SolverEntry entry;
  SolverConfig config;
  IterateTrace trace;
  bool diverged = false;
  std::string error;
  fs::path csv;
};

/// One run per solver entry, concurrently over the shared problem.
std::vector<RunResult> run_all(const ProblemSpec& p, const RunConfig& c) {
  std::vector<std::future<RunResult>> futures;
  for (const auto& e : c.solvers) {
    futures.push_back(std::async(std::launch::async, [&p, &c, e] {
      RunResult r;
      r.entry = e;
      r.config = to_solver_config(e, c);
      try {
        r.trace = solve(p, r.config);
      } catch (const DivergenceError& d) {
        r.diverged = true;
        r.error = d.what();
        r.trace = d.partial_trace();
      }
      return r;
    }));
  }
  std::vector<RunResult> out;
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

/// trace_<variant>.csv, with the solver index added when a variant repeats.
void assign_paths(std::vector<RunResult>& runs, const fs::path& dir) {
  std::map<Variant, int> seen;
  for (const auto& r : runs) ++seen[r.entry.variant];
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string prefix =
        seen[runs[i].entry.variant] > 1 ? "trace_" + std::to_string(i) + "_" : "trace_";
    runs[i].csv = trace_csv_path(dir, prefix, runs[i].entry.variant);
  }
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
}

json reference_json(const Reference& ref) {
  json j{{"source", to_string(ref.source)},
         {"f_star", ref.f_star},
         {"h_bar_star", ref.h_bar_star}};
  if (ref.source == ReferenceSource::LongRun) {
    j["budget"] = ref.budget;
    j["lower_residual"] = ref.lower_residual;
    j["upper_residual"] = ref.upper_residual;
  }
  return j;
}

Vector shared_x0(const ProblemSpec& p, const RunConfig& c) {
  if (c.x0) return Eigen::Map<const Vector>(c.x0->data(), static_cast<Eigen::Index>(c.x0->size()));
  return Vector::Zero(static_cast<Eigen::Index>(p.dimension));
}

void write_manifest(const RunConfig& c, const std::string& command, const ProblemSpec& p,
                    const Reference& ref, const std::vector<RunResult>& runs,
                    const std::vector<MetricSeries>& series) {
  json doc = to_json(c);
  json m;
  m["command"] = command;
  m["problem_id"] = p.id;
  m["dimension"] = p.dimension;
  m["L_h"] = p.lower.lipschitz;
  m["L_f"] = p.upper.lipschitz;
  m["nonsmooth"] = describe(p.nonsmooth);
  const Vector x0 = shared_x0(p, c);
  m["x0"] = std::vector<double>(x0.begin(), x0.end());
  m["reference"] = reference_json(ref);
  json rj = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    json j;
    j["variant"] = to_string(r.entry.variant);
    j["K"] = r.trace.K;
    j["eta"] = r.trace.eta;
    j["gamma"] = r.trace.gamma;
    j["L_eta"] = p.lower.lipschitz + r.trace.eta * p.upper.lipschitz;
    j["seed"] = r.trace.seed;
    j["record_every"] = r.trace.record_every;
    j["trace_file"] = r.csv.filename().string();
    j["status"] = r.diverged ? "diverged" : "completed";
    if (r.diverged) j["error"] = r.error;
    if (!series[i].points.empty()) {
      const MetricPoint& last = series[i].points.back();
      j["final"] = {{"k", last.k},
                    {"f", last.f},
                    {"suboptimality", last.suboptimality},
                    {"infeasibility", std::isfinite(last.infeasibility) ? json(last.infeasibility)
                                                                        : json("inf")}};
    }
    rj.push_back(std::move(j));
  }
  m["runs"] = std::move(rj);
  doc["manifest"] = std::move(m);

  const fs::path path = c.output_dir / kManifestFile;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void log_run(std::ostream& out, const RunResult& r, const MetricSeries& s) {
  const MetricPoint& last = s.points.back();
  out << to_string(r.entry.variant) << " K=" << r.trace.K << " eta=" << fmt_g(r.trace.eta)
      << " gamma=" << fmt_g(r.trace.gamma) << " final subopt=" << fmt_g(last.suboptimality)
      << " infeas=" << fmt_g(last.infeasibility)
      << (r.diverged ? " DIVERGED: " + r.error : std::string()) << "\n";
}

struct Executed {
  ProblemSpec problem;
  Reference reference;
  std::vector<RunResult> runs;
  std::vector<MetricSeries> series;
  bool any_diverged = false;
};

Executed execute(const RunConfig& c, const std::string& command, std::ostream& out, bool quiet) {
  Executed ex;
  ex.problem = build_problem(c);
  prepare_output_dir(c.output_dir);
  ex.reference = compute_reference(ex.problem, resolved_reference_budget(c), shared_x0(ex.problem, c));
  ex.runs = run_all(ex.problem, c);
  assign_paths(ex.runs, c.output_dir);
  for (auto& r : ex.runs) {
    ex.series.push_back(evaluate_trace(r.trace, ex.reference));
    write_trace_csv(r.trace, ex.series.back(), r.csv);
    ex.any_diverged = ex.any_diverged || r.diverged;
    if (!quiet) log_run(out, r, ex.series.back());
  }
  write_manifest(c, command, ex.problem, ex.reference, ex.runs, ex.series);
  return ex;
}

std::string slope_cell(const ErrorSeries& s) {
  try {
    return format_double(estimate_rate(s, 0.5).slope);
  } catch (const ParameterError&) {
    return "n/a";
  }
}

std::string reach_cell(const ErrorSeries& s, double threshold) {
  const auto k = iterations_to_threshold(s, threshold);
  return k ? std::to_string(*k) : kNotReached;
}

}  // namespace

void apply_overrides(RunConfig& c, const Options& o) {
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.seed) {
    c.seed = *o.seed;
    c.problem.seed = *o.seed;
  }
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  const ProblemSpec p = build_problem(c);
  const ValidationReport rep = validate_problem(p, c.seed, c.validate_samples);
  bool ok = rep.all_passed();
  out << "problem " << p.id << " (dimension " << p.dimension << ", L_h " << fmt_g(p.lower.lipschitz)
      << ", L_f " << fmt_g(p.upper.lipschitz) << ")\n";
  for (const auto& ch : rep.checks) {
    print_row(out, ch.name, ch.passed ? "PASS" : "FAIL", ch.worst_margin,
              "tol " + fmt_g(ch.tolerance) + "  " + ch.detail);
  }
  if (p.ground_truth && p.ground_truth->alpha && p.ground_truth->project_lower_solution_set &&
      c.weak_sharp_samples > 0) {
    const WeakSharpnessReport ws = verify_weak_sharpness(p, c.weak_sharp_samples, c.seed);
    print_row(out, "weak_sharpness", ws.passed ? "PASS" : "FAIL", ws.worst_margin,
              std::to_string(ws.samples) + " samples, " + std::to_string(ws.violations) +
                  " violations");
    ok = ok && ws.passed;
  }
  out << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_solve(const RunConfig& c, std::ostream& out, bool quiet) {
  const Executed ex = execute(c, "solve", out, quiet);
  if (!quiet) out << "wrote " << ex.runs.size() << " trace(s) and " << kManifestFile << " to "
                  << c.output_dir.string() << "\n";
  return ex.any_diverged ? kExitRuntime : kExitOk;
}

int cmd_certify(const RunConfig& c, std::ostream& out, bool quiet) {
  const ProblemSpec p = build_problem(c);
  std::vector<SolverEntry> entries;
  for (const auto& e : c.solvers) {
    if (e.variant == Variant::RAPM) entries.push_back(e);
  }
  if (entries.empty()) throw ConfigError("certify: the config lists no RAPM solver");

  std::optional<Vector> x_cmp;
  if (p.ground_truth) {
    x_cmp = p.ground_truth->x_star;
  } else if (c.certify.lemma_chain) {
    x_cmp = compute_reference(p, resolved_reference_budget(c), shared_x0(p, c)).x_ref;
  }

  bool ok = true;
  for (auto e : entries) {
    e.record_every = 1;
    SolverConfig cfg = to_solver_config(e, c);
    IterateTrace trace = rapm_solve(p, cfg);
    const std::size_t pk = c.test_hooks.perturb_k;
    if (pk >= 1 && pk <= trace.K) trace.records[pk].x[0] += c.test_hooks.perturb_magnitude;

    out << "RAPM K=" << trace.K << " eta=" << fmt_g(trace.eta) << " gamma=" << fmt_g(trace.gamma)
        << (pk >= 1 && pk <= trace.K ? " (x_" + std::to_string(pk) + " perturbed)" : "") << "\n";
    CertReport all;
    if (c.certify.lemma_chain) {
      for (auto& r : certify_lemma_chain(trace, p, trace.eta, *x_cmp).items) all.items.push_back(r);
    }
    if (c.certify.theorem1) {
      if (p.ground_truth && p.ground_truth->alpha) {
        for (auto& r : certify_theorem1(trace, p, trace.eta).items) all.items.push_back(r);
      } else if (!quiet) {
        out << "  theorem1: not applicable (no ground truth with a weak-sharpness modulus)\n";
      }
    }
    if (c.certify.proposition1 && e.eta_mode == "budget_scaled") {
      if (p.ground_truth) {
        for (auto& r : certify_proposition1(trace, p).items) all.items.push_back(r);
      } else if (!quiet) {
        out << "  proposition1: not applicable (no ground truth)\n";
      }
    }
    for (const auto& r : all.items) {
      const std::string status = !r.applicable ? "n/a" : (r.passed ? "PASS" : "FAIL");
      std::string extra = r.applicable ? "at k=" + std::to_string(r.worst_k) + ", tol " +
                                             fmt_g(r.tolerance)
                                       : "";
      if (!r.note.empty()) extra += (extra.empty() ? "" : "  ") + r.note;
      print_row(out, "  " + r.name, status, r.worst_margin, extra);
    }
    ok = ok && all.passed();
  }
  out << (ok ? "all applicable checks passed\n" : "some checks FAILED\n");
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_compare(const RunConfig& c, std::ostream& out, bool quiet) {
  if (c.solvers.size() < 2) throw ConfigError("compare: the config must list at least 2 solvers");
  const Executed ex = execute(c, "compare", out, quiet);

  struct Row {
    std::string name;
    std::size_t K;
    MetricSeries series;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < ex.runs.size(); ++i) {
    rows.push_back({to_string(ex.runs[i].entry.variant), ex.runs[i].trace.K, ex.series[i]});
    if (ex.runs[i].entry.variant == Variant::aIRG && !ex.runs[i].diverged) {
      rows.push_back({"aIRG_avg", ex.runs[i].trace.K,
                      evaluate_averaged(ex.runs[i].trace, ex.reference, ex.problem)});
    }
  }

  const fs::path path = c.output_dir / kSummaryFile;
  std::ofstream csv(path, std::ios::trunc);
  if (!csv) throw IoError("cannot open '" + path.string() + "' for writing");
  csv << "solver,K,final_f,final_subopt,final_infeas,subopt_slope,infeas_slope,"
         "k_subopt_1e-3,k_subopt_1e-6,k_infeas_1e-3,k_infeas_1e-6\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-11s %7s %12s %12s %9s %9s %12s %12s\n", "solver", "K",
                "subopt", "infeas", "slope_s", "slope_i", "k_s(1e-6)", "k_i(1e-6)");
  if (!quiet) out << line;
  for (const auto& r : rows) {
    const MetricPoint& last = r.series.points.back();
    const ErrorSeries sub = suboptimality_series(r.series);
    const ErrorSeries inf = infeasibility_series(r.series);
    csv << r.name << ',' << r.K << ',' << format_double(last.f) << ','
        << format_double(last.suboptimality) << ',' << format_double(last.infeasibility) << ','
        << slope_cell(sub) << ',' << slope_cell(inf) << ',' << reach_cell(sub, 1e-3) << ','
        << reach_cell(sub, 1e-6) << ',' << reach_cell(inf, 1e-3) << ',' << reach_cell(inf, 1e-6)
        << '\n';
    std::snprintf(line, sizeof line, "%-11s %7zu %12s %12s %9s %9s %12s %12s\n", r.name.c_str(),
                  r.K, fmt_g(last.suboptimality, 4).c_str(), fmt_g(last.infeasibility, 4).c_str(),
                  slope_cell(sub).substr(0, 6).c_str(), slope_cell(inf).substr(0, 6).c_str(),
                  reach_cell(sub, 1e-6).c_str(), reach_cell(inf, 1e-6).c_str());
    if (!quiet) out << line;
  }
  csv.flush();
  if (!csv) throw IoError("write failed for '" + path.string() + "'");
  return ex.any_diverged ? kExitRuntime : kExitOk;
}

int run_command(const std::string& command, const fs::path& config, const Options& options,
                std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = load_config(config);
    apply_overrides(c, options);
    build_problem(c);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    if (command == "validate") return cmd_validate(c, out);
    if (command == "solve") return cmd_solve(c, out, options.quiet);
    if (command == "certify") return cmd_certify(c, out, options.quiet);
    if (command == "compare") return cmd_compare(c, out, options.quiet);
    err << "unknown command '" << command << "'\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace rapm::cli
