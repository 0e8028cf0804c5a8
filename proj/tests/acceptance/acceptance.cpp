// One PASS/FAIL line per acceptance criterion. Exit status 0 iff every
// selected criterion passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "cli/commands.hpp"
#include "oracles.hpp"
#include "rapm/bench.hpp"
#include "rapm/problems.hpp"
#include "rapm/prox.hpp"
#include "rapm/rng.hpp"
#include "rapm/solvers.hpp"

using namespace rapm;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kBoxSeed = 1;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ProblemSpec box20() { return random_weak_sharp_box(20, 10, kBoxSeed); }
ProblemSpec regression() { return make_sparse_regression(60, 40, 50, 5, 0.01, 1.0, 7); }

SolverConfig config(Variant v, std::size_t K, EtaMode eta) {
  SolverConfig c;
  c.variant = v;
  c.K = K;
  c.eta_mode = eta;
  c.gamma_rule = MaxStep{};
  return c;
}

/// Worst margin over the applicable items, or +inf when none applied.
double worst_of(const CertReport& r) {
  double w = kInfinity;
  for (const auto& i : r.items) {
    if (i.applicable) w = std::min(w, i.worst_margin);
  }
  return w;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() /
                     ("rapm_acceptance_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& command, const fs::path& cfg, const fs::path& out_dir,
            std::string& err) {
  cli::Options o;
  o.output_dir = out_dir;
  o.quiet = true;
  std::ostringstream out, e;
  const int code = cli::run_command(command, cfg, o, out, e);
  err = e.str();
  return code;
}

Outcome criterion1() {
  Outcome o;
  double worst = kInfinity;
  const ProblemSpec box = box20();
  const ProblemSpec reg = regression();
  const Vector reg_cmp = compute_reference(reg, 10000).x_ref;
  for (std::size_t K : {10u, 100u, 1000u}) {
    for (const EtaMode& eta : {EtaMode{WeakSharpEta{}}, EtaMode{BudgetScaledEta{}}}) {
      const IterateTrace t = rapm_solve(box, config(Variant::RAPM, K, eta));
      const CertReport r = certify_lemma_chain(t, box, t.eta, box.ground_truth->x_star);
      worst = std::min(worst, worst_of(r));
      o.require(r.passed(), "box K=" + std::to_string(K) + " eta=" + g(t.eta));
    }
    const IterateTrace t = rapm_solve(reg, config(Variant::RAPM, K, BudgetScaledEta{}));
    const CertReport r = certify_lemma_chain(t, reg, t.eta, reg_cmp);
    worst = std::min(worst, worst_of(r));
    o.require(r.passed(), "regression K=" + std::to_string(K));
  }
  o.require(worst >= -1e-8, "worst margin below -1e-8");
  o.detail = "worst relative margin " + g(worst) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion2() {
  Outcome o;
  double worst = kInfinity;
  const ProblemSpec n2 = make_weak_sharp_box(2, Vector{{1.0, 0.0}}, Vector{{0.5, 0.7}});
  for (const ProblemSpec& p : {n2, box20()}) {
    SolverConfig c = config(Variant::RAPM, 2000, WeakSharpEta{});
    c.x0 = Vector::Constant(static_cast<Eigen::Index>(p.dimension), 1.0);
    const IterateTrace t = rapm_solve(p, c);
    const CertReport r = certify_theorem1(t, p, t.eta);
    for (const auto& i : r.items) {
      o.require(i.applicable, p.name + " " + i.name + " not applicable");
      o.require(i.passed && i.worst_margin >= -1e-9,
                p.name + " " + i.name + " margin " + g(i.worst_margin) + " at k=" +
                    std::to_string(i.worst_k));
    }
    worst = std::min(worst, worst_of(r));
  }
  o.detail = "worst margin " + g(worst) + " over 5 bounds x 2000 iterations x 2 instances" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion3() {
  Outcome o;
  const ProblemSpec p = box20();
  const Reference ref = compute_reference(p, 2000);
  auto measure = [&](Variant v, const std::string& label) -> std::optional<RateReport> {
    const IterateTrace t = solve(p, config(v, 2000, WeakSharpEta{}));
    const ErrorSeries s = suboptimality_series(evaluate_trace(t, ref));
    std::size_t usable = 0;
    std::optional<std::size_t> floor_k;
    for (const auto& [k, e] : s) {
      if (k == 0) continue;
      if (e >= kRateFloor) ++usable;
      if (e < kRateFloor && !floor_k) floor_k = k;
    }
    try {
      return estimate_rate(s, 0.5);
    } catch (const ParameterError&) {
      o.require(false, label + " suboptimality is below 1e-13 from k=" +
                           (floor_k ? std::to_string(*floor_k) : "?") + " onward (" +
                           std::to_string(usable) + " usable points), no rate to fit");
      return std::nullopt;
    }
  };
  if (const auto r = measure(Variant::RAPM, "RAPM")) {
    o.require(r->slope <= -1.8, "RAPM slope " + g(r->slope) + " > -1.8");
    const IterateTrace t = rapm_solve(p, config(Variant::RAPM, 2000, WeakSharpEta{}));
    for (const auto& [k, ratio] :
         doubling_ratios(suboptimality_series(evaluate_trace(t, ref)), 100)) {
      o.require(ratio >= 3.2 && ratio <= 4.8,
                "doubling ratio " + g(ratio) + " at k=" + std::to_string(k));
    }
  }
  if (const auto r = measure(Variant::RPM, "RPM")) {
    o.require(r->slope >= -1.2, "RPM slope " + g(r->slope) + " < -1.2");
  }
  return o;
}

Outcome criterion4() {
  Outcome o;
  double worst = kInfinity;
  for (const ProblemSpec& p :
       {make_weak_sharp_box(2, Vector{{1.0, 0.0}}, Vector{{0.5, 0.7}}), box20()}) {
    for (std::size_t K : {10u, 100u, 1000u}) {
      SolverConfig c = config(Variant::RAPM, K, BudgetScaledEta{});
      c.x0 = Vector::Constant(static_cast<Eigen::Index>(p.dimension), 1.0);
      const IterateTrace t = rapm_solve(p, c);
      const InequalityResult* i =
          certify_proposition1(t, p).find("proposition1.i.suboptimality_upper");
      o.require(i && i->applicable && i->passed && i->worst_margin >= -1e-9,
                p.name + " K=" + std::to_string(K));
      if (i) worst = std::min(worst, i->worst_margin);
    }
  }
  o.detail = "worst margin " + g(worst) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion5() {
  Outcome o;
  Rng rng(2024);
  std::size_t certified = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng.index(16);
    const ProxOp op = oracle::random_prox_op(rng, n);
    const double gamma = rng.uniform(0.05, 3.0);
    const Vector u = oracle::random_vector(rng, n);
    certified += certify_prox(op, u, prox(op, u, gamma), gamma, 1e-8).passed;
  }
  o.require(certified == 1000, std::to_string(1000 - certified) + " triples failed certify_prox");

  Rng low(77);
  double worst_grid = 0.0;
  for (int i = 0; i < 40; ++i) {
    const std::size_t n = 1 + low.index(3);
    const ProxOp op = oracle::random_prox_op(low, n);
    const double gamma = low.uniform(0.2, 2.0);
    const Vector u = oracle::random_vector(low, n, 1.5);
    const Vector diff = prox(op, u, gamma) - oracle::brute_force_prox(op, u, gamma);
    worst_grid = std::max(worst_grid, norm_inf(diff));
  }
  o.require(worst_grid <= 1e-6, "grid mismatch " + g(worst_grid));

  for (const Vector& u : {Vector{{0.3, -0.2}}, Vector{{3.0, 0.0}}, Vector{{2.0, 1.0}}}) {
    o.require(project_l1_ball(u, 1.0) == oracle::l1_ball_projection_kkt_2d(u, 1.0),
              "KKT mismatch");
  }
  o.detail = std::to_string(certified) + "/1000 certified, grid max deviation " + g(worst_grid) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion6() {
  Outcome o;
  double t = 1.0;
  double worst_identity = 0.0;
  std::size_t first_bad = 0;
  for (std::size_t k = 1; k < 1000000; ++k) {
    const double next = momentum_next(t);
    const double residual = std::abs((next * next - next) - t * t) / std::max(1.0, t * t);
    worst_identity = std::max(worst_identity, residual);
    if (residual > 1e-12 && first_bad == 0) first_bad = k;
    t = next;
    if (t < static_cast<double>(k + 2) / 2.0 && first_bad == 0) first_bad = k + 1;
  }
  o.require(first_bad == 0, "violation at k=" + std::to_string(first_bad));
  o.detail = "max relative identity residual " + g(worst_identity) + ", t_1e6 = " + g(t);
  return o;
}

Outcome criterion7() {
  Outcome o;
  const fs::path dir = scratch("compare");
  std::ofstream(dir / "compare.json") << R"({
  "problem": {"kind": "sparse_regression", "m_tr": 60, "m_val": 40, "n": 50, "k_sparse": 5,
              "noise_sigma": 0.01, "radius": 1, "seed": 7},
  "solvers": [
    {"variant": "RAPM", "K": 3000},
    {"variant": "RPM", "K": 3000},
    {"variant": "aIRG", "K": 3000},
    {"variant": "BiGSAM", "K": 3000}
  ],
  "x0": [)" + [] {
    std::string zeros;
    for (int i = 0; i < 50; ++i) zeros += i ? ",0" : "0";
    return zeros;
  }() + R"(]
})";
  std::string err;
  const int code = run_cli("compare", dir / "compare.json", dir / "out", err);
  if (code != cli::kExitOk) {
    o.require(false, "compare exited " + std::to_string(code) + ": " + err);
    fs::remove_all(dir);
    return o;
  }

  std::map<std::string, std::pair<double, double>> finals;
  std::ifstream summary(dir / "out" / cli::kSummaryFile);
  std::string line;
  std::getline(summary, line);
  while (std::getline(summary, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    finals[cells[0]] = {std::stod(cells[3]), std::abs(std::stod(cells[4]))};
  }
  const auto [rs, ri] = finals.at("RAPM");
  for (const char* other : {"RPM", "aIRG", "BiGSAM"}) {
    const auto [s, i] = finals.at(other);
    o.require(rs < s, std::string("suboptimality not strictly below ") + other + " (" + g(rs) +
                          " vs " + g(s) + ", difference " + g(s - rs) + ")");
    o.require(ri < i, std::string("infeasibility not strictly below ") + other + " (" + g(ri) +
                          " vs " + g(i) + ", difference " + g(i - ri) + ")");
  }
  std::size_t infeasible = 0;
  for (const auto& row : read_trace_csv(dir / "out" / "trace_RAPM.csv")) {
    infeasible += row[3] != 0.0;
  }
  o.require(infeasible == 0, std::to_string(infeasible) + " RAPM iterates outside the l1-ball");
  o.detail = "RAPM final subopt " + g(rs) + ", infeas " + g(ri) +
             (o.detail.empty() ? "" : "; " + o.detail);
  fs::remove_all(dir);
  return o;
}

Outcome criterion8() {
  Outcome o;
  const fs::path dir = scratch("determinism");
  std::ofstream(dir / "solve.json") << R"({
  "problem": {"kind": "sparse_regression", "m_tr": 60, "m_val": 40, "n": 50, "k_sparse": 5,
              "noise_sigma": 0.01, "radius": 1, "seed": 7},
  "solvers": [
    {"variant": "RAPM", "K": 500},
    {"variant": "RPM", "K": 500},
    {"variant": "aIRG", "K": 500},
    {"variant": "BiGSAM", "K": 500}
  ]
})";
  std::map<fs::path, std::string> first;
  for (int rep = 0; rep < 2; ++rep) {
    std::string err;
    const int code = run_cli("solve", dir / "solve.json", dir / "out", err);
    o.require(code == cli::kExitOk, "solve exited " + std::to_string(code) + ": " + err);
    for (const auto& e : fs::directory_iterator(dir / "out")) {
      const std::string bytes = slurp(e.path());
      if (rep == 0) {
        first[e.path().filename()] = bytes;
      } else {
        o.require(first.count(e.path().filename()) && first[e.path().filename()] == bytes,
                  e.path().filename().string() + " differs");
      }
    }
    if (rep == 0) fs::remove_all(dir / "out");
  }
  o.detail = std::to_string(first.size()) + " files compared";
  fs::remove_all(dir);
  return o;
}

struct Criterion {
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"lemma-chain certification", 10.0, criterion1},
      {"Theorem 1 envelopes", 5.0, criterion2},
      {"rate order", 10.0, criterion3},
      {"budget-scaled suboptimality bound", 0.0, criterion4},
      {"prox correctness", 0.0, criterion5},
      {"momentum identity", 0.0, criterion6},
      {"comparison ranking", 30.0, criterion7},
      {"determinism", 0.0, criterion8},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    const Criterion& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0) {
      o.require(secs < c.budget_seconds, "runtime over " + g(c.budget_seconds) + " s");
    }
    std::printf("%s criterion %zu (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, c.title,
                o.detail.c_str(), secs);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
