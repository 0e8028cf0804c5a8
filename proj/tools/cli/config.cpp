#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "rapm/problems.hpp"

namespace rapm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Walks a parsed document, producing errors that name the key path and,
/// when the key text can be found in the source, its line.
class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    std::string where = source_;
    const std::size_t line = locate(path);
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": key '" + path + "': " + msg);
  }

  void only_keys(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (std::find_if(allowed.begin(), allowed.end(),
                       [&](const char* a) { return key == a; }) == allowed.end()) {
        fail(join(path, key), "unknown key");
      }
    }
  }

  const json& required(const json& obj, const std::string& path, const char* key) const {
    if (!obj.contains(key)) fail(join(path, key), "missing required key");
    return obj.at(key);
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }

  double positive(const json& v, const std::string& path) const {
    const double d = number(v, path);
    if (!(d > 0.0)) fail(path, "must be > 0 (got " + v.dump() + ")");
    return d;
  }

  std::uint64_t count(const json& v, const std::string& path) const {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      fail(path, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const json& v, const std::string& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const json& v, const std::string& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  /// Line of the first occurrence of the last key name in the path.
  std::size_t locate(const std::string& path) const {
    std::string key = path.substr(path.find_last_of('.') + 1);
    key = key.substr(0, key.find('['));
    const auto pos = text_.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + pos, '\n')) + 1;
  }

  const std::string& text_;
  std::string source_;
};

ProblemKind parse_kind(const Reader& r, const json& v, const std::string& path) {
  const std::string s = r.string(v, path);
  if (s == "weak_sharp_box") return ProblemKind::WeakSharpBox;
  if (s == "sparse_regression") return ProblemKind::SparseRegression;
  if (s == "csv") return ProblemKind::Csv;
  r.fail(path, "unknown problem kind '" + s + "' (expected weak_sharp_box, sparse_regression or csv)");
}

ProblemConfig parse_problem(const Reader& r, const json& j, const fs::path& base_dir,
                            std::uint64_t default_seed) {
  const std::string path = "problem";
  ProblemConfig pc;
  pc.kind = parse_kind(r, r.required(j, path, "kind"), "problem.kind");
  pc.seed = j.contains("seed") ? r.count(j.at("seed"), "problem.seed") : default_seed;

  switch (pc.kind) {
    case ProblemKind::WeakSharpBox: {
      r.only_keys(j, path, {"kind", "seed", "n", "c", "p", "positive_count"});
      pc.n = r.count(r.required(j, path, "n"), "problem.n");
      if (pc.n == 0) r.fail("problem.n", "must be >= 1");
      const bool explicit_data = j.contains("c") || j.contains("p");
      if (explicit_data) {
        if (j.contains("positive_count")) {
          r.fail("problem.positive_count", "cannot be combined with explicit c and p");
        }
        pc.c = r.numbers(r.required(j, path, "c"), "problem.c");
        pc.p = r.numbers(r.required(j, path, "p"), "problem.p");
        if (pc.c->size() != pc.n) r.fail("problem.c", "length differs from n");
        if (pc.p->size() != pc.n) r.fail("problem.p", "length differs from n");
      } else {
        pc.positive_count = r.count(r.required(j, path, "positive_count"), "problem.positive_count");
        if (pc.positive_count < 1 || pc.positive_count > pc.n) {
          r.fail("problem.positive_count", "must lie in [1, n]");
        }
      }
      break;
    }
    case ProblemKind::SparseRegression: {
      r.only_keys(j, path,
                  {"kind", "seed", "m_tr", "m_val", "n", "k_sparse", "noise_sigma", "radius"});
      pc.m_tr = r.count(r.required(j, path, "m_tr"), "problem.m_tr");
      pc.m_val = r.count(r.required(j, path, "m_val"), "problem.m_val");
      pc.n = r.count(r.required(j, path, "n"), "problem.n");
      pc.k_sparse = r.count(r.required(j, path, "k_sparse"), "problem.k_sparse");
      pc.noise_sigma = r.number(r.required(j, path, "noise_sigma"), "problem.noise_sigma");
      pc.radius = r.positive(r.required(j, path, "radius"), "problem.radius");
      if (pc.m_tr == 0) r.fail("problem.m_tr", "must be >= 1");
      if (pc.m_val == 0) r.fail("problem.m_val", "must be >= 1");
      if (pc.n == 0) r.fail("problem.n", "must be >= 1");
      if (pc.k_sparse < 1 || pc.k_sparse > pc.n) r.fail("problem.k_sparse", "must lie in [1, n]");
      if (pc.noise_sigma < 0.0) r.fail("problem.noise_sigma", "must be >= 0");
      break;
    }
    case ProblemKind::Csv: {
      r.only_keys(j, path, {"kind", "seed", "A_tr", "b_tr", "A_val", "b_val", "radius"});
      auto file = [&](const char* key) {
        const std::string kp = std::string("problem.") + key;
        fs::path f = r.string(r.required(j, path, key), kp);
        if (f.is_relative()) f = base_dir / f;
        if (!fs::exists(f)) r.fail(kp, "file '" + f.string() + "' does not exist");
        return f;
      };
      pc.a_tr = file("A_tr");
      pc.b_tr = file("b_tr");
      pc.a_val = file("A_val");
      pc.b_val = file("b_val");
      pc.radius = r.positive(r.required(j, path, "radius"), "problem.radius");
      break;
    }
  }
  return pc;
}

SolverEntry parse_solver(const Reader& r, const json& j, const std::string& path) {
  r.only_keys(j, path,
              {"variant", "K", "eta_mode", "eta", "gamma_rule", "gamma_fraction", "record_every"});
  SolverEntry e;
  const std::string v = r.string(r.required(j, path, "variant"), path + ".variant");
  try {
    e.variant = parse_variant(v);
  } catch (const ParameterError& ex) {
    r.fail(path + ".variant", ex.what());
  }
  e.K = r.count(r.required(j, path, "K"), path + ".K");
  if (e.K < 1) r.fail(path + ".K", "must be >= 1");
  if (j.contains("eta_mode")) e.eta_mode = r.string(j.at("eta_mode"), path + ".eta_mode");
  if (e.eta_mode != "fixed" && e.eta_mode != "budget_scaled" && e.eta_mode != "weak_sharp") {
    r.fail(path + ".eta_mode", "expected fixed, budget_scaled or weak_sharp");
  }
  if (e.eta_mode == "fixed") {
    e.eta = r.positive(r.required(j, path, "eta"), path + ".eta");
  } else if (j.contains("eta")) {
    r.fail(path + ".eta", "only allowed with eta_mode fixed");
  }
  if (j.contains("gamma_rule")) e.gamma_rule = r.string(j.at("gamma_rule"), path + ".gamma_rule");
  if (e.gamma_rule != "max_step" && e.gamma_rule != "scaled") {
    r.fail(path + ".gamma_rule", "expected max_step or scaled");
  }
  if (j.contains("gamma_fraction")) {
    e.gamma_fraction = r.number(j.at("gamma_fraction"), path + ".gamma_fraction");
    if (!(e.gamma_fraction > 0.0 && e.gamma_fraction <= 1.0)) {
      r.fail(path + ".gamma_fraction", "must lie in (0, 1]");
    }
  }
  if (j.contains("record_every")) {
    e.record_every = r.count(j.at("record_every"), path + ".record_every");
    if (e.record_every < 1) r.fail(path + ".record_every", "must be >= 1");
  }
  return e;
}

json problem_json(const ProblemConfig& pc) {
  json j;
  j["kind"] = to_string(pc.kind);
  j["seed"] = pc.seed;
  switch (pc.kind) {
    case ProblemKind::WeakSharpBox:
      j["n"] = pc.n;
      if (pc.c) {
        j["c"] = *pc.c;
        j["p"] = *pc.p;
      } else {
        j["positive_count"] = pc.positive_count;
      }
      break;
    case ProblemKind::SparseRegression:
      j["m_tr"] = pc.m_tr;
      j["m_val"] = pc.m_val;
      j["n"] = pc.n;
      j["k_sparse"] = pc.k_sparse;
      j["noise_sigma"] = pc.noise_sigma;
      j["radius"] = pc.radius;
      break;
    case ProblemKind::Csv:
      j["A_tr"] = pc.a_tr.string();
      j["b_tr"] = pc.b_tr.string();
      j["A_val"] = pc.a_val.string();
      j["b_val"] = pc.b_val.string();
      j["radius"] = pc.radius;
      break;
  }
  return j;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::WeakSharpBox:
      return "weak_sharp_box";
    case ProblemKind::SparseRegression:
      return "sparse_regression";
    case ProblemKind::Csv:
      return "csv";
  }
  return "unknown";
}

RunConfig parse_config(const std::string& text, const std::string& source,
                       const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  const Reader r(text, source);
  r.only_keys(doc, "",
              {"problem", "solvers", "x0", "output_dir", "seed", "validate_samples",
               "weak_sharp_samples", "reference_budget", "record_timings", "certify", "test_hooks",
               "manifest"});

  RunConfig c;
  if (doc.contains("seed")) c.seed = r.count(doc.at("seed"), "seed");
  c.problem = parse_problem(r, r.required(doc, "", "problem"), base_dir, c.seed);

  const json& solvers = r.required(doc, "", "solvers");
  if (!solvers.is_array() || solvers.empty()) r.fail("solvers", "expected a nonempty array");
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    c.solvers.push_back(parse_solver(r, solvers[i], "solvers[" + std::to_string(i) + "]"));
  }

  if (doc.contains("x0")) c.x0 = r.numbers(doc.at("x0"), "x0");
  if (doc.contains("output_dir")) c.output_dir = r.string(doc.at("output_dir"), "output_dir");
  if (doc.contains("validate_samples")) {
    c.validate_samples = r.count(doc.at("validate_samples"), "validate_samples");
    if (c.validate_samples < 1) r.fail("validate_samples", "must be >= 1");
  }
  if (doc.contains("weak_sharp_samples")) {
    c.weak_sharp_samples = r.count(doc.at("weak_sharp_samples"), "weak_sharp_samples");
  }
  if (doc.contains("reference_budget")) {
    c.reference_budget = r.count(doc.at("reference_budget"), "reference_budget");
  }
  if (doc.contains("record_timings")) {
    c.record_timings = r.boolean(doc.at("record_timings"), "record_timings");
  }
  if (doc.contains("certify")) {
    const json& j = doc.at("certify");
    r.only_keys(j, "certify", {"lemma_chain", "theorem1", "proposition1"});
    if (j.contains("lemma_chain")) c.certify.lemma_chain = r.boolean(j["lemma_chain"], "certify.lemma_chain");
    if (j.contains("theorem1")) c.certify.theorem1 = r.boolean(j["theorem1"], "certify.theorem1");
    if (j.contains("proposition1")) {
      c.certify.proposition1 = r.boolean(j["proposition1"], "certify.proposition1");
    }
  }
  if (doc.contains("test_hooks")) {
    const json& j = doc.at("test_hooks");
    r.only_keys(j, "test_hooks", {"nonconvex_upper", "perturb_k", "perturb_magnitude"});
    if (j.contains("nonconvex_upper")) {
      c.test_hooks.nonconvex_upper = r.boolean(j["nonconvex_upper"], "test_hooks.nonconvex_upper");
    }
    if (j.contains("perturb_k")) c.test_hooks.perturb_k = r.count(j["perturb_k"], "test_hooks.perturb_k");
    if (j.contains("perturb_magnitude")) {
      c.test_hooks.perturb_magnitude = r.number(j["perturb_magnitude"], "test_hooks.perturb_magnitude");
    }
  }
  if (c.x0) {
    const std::size_t n = c.problem.kind == ProblemKind::Csv ? c.x0->size() : c.problem.n;
    if (c.x0->size() != n) r.fail("x0", "length differs from the problem dimension");
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["problem"] = problem_json(c.problem);
  json solvers = json::array();
  for (const auto& e : c.solvers) {
    json s;
    s["variant"] = to_string(e.variant);
    s["K"] = e.K;
    s["eta_mode"] = e.eta_mode;
    if (e.eta_mode == "fixed") s["eta"] = e.eta;
    s["gamma_rule"] = e.gamma_rule;
    s["gamma_fraction"] = e.gamma_fraction;
    s["record_every"] = e.record_every;
    solvers.push_back(std::move(s));
  }
  j["solvers"] = std::move(solvers);
  if (c.x0) j["x0"] = *c.x0;
  j["output_dir"] = c.output_dir.string();
  j["seed"] = c.seed;
  j["validate_samples"] = c.validate_samples;
  j["weak_sharp_samples"] = c.weak_sharp_samples;
  j["reference_budget"] = resolved_reference_budget(c);
  j["record_timings"] = c.record_timings;
  j["certify"] = {{"lemma_chain", c.certify.lemma_chain},
                  {"theorem1", c.certify.theorem1},
                  {"proposition1", c.certify.proposition1}};
  j["test_hooks"] = {{"nonconvex_upper", c.test_hooks.nonconvex_upper},
                     {"perturb_k", c.test_hooks.perturb_k},
                     {"perturb_magnitude", c.test_hooks.perturb_magnitude}};
  return j;
}

ProblemSpec build_problem(const RunConfig& c) {
  const ProblemConfig& pc = c.problem;
  ProblemSpec p;
  switch (pc.kind) {
    case ProblemKind::WeakSharpBox:
      p = pc.c ? make_weak_sharp_box(pc.n, to_vector(*pc.c), to_vector(*pc.p))
               : random_weak_sharp_box(pc.n, pc.positive_count, pc.seed);
      break;
    case ProblemKind::SparseRegression:
      p = make_sparse_regression(pc.m_tr, pc.m_val, pc.n, pc.k_sparse, pc.noise_sigma, pc.radius,
                                 pc.seed);
      break;
    case ProblemKind::Csv:
      p = load_regression_csv(pc.a_tr, pc.b_tr, pc.a_val, pc.b_val, pc.radius);
      break;
  }
  if (c.x0 && c.x0->size() != p.dimension) {
    throw ConfigError("x0 has length " + std::to_string(c.x0->size()) +
                      " but the problem dimension is " + std::to_string(p.dimension));
  }
  if (c.test_hooks.nonconvex_upper) {
    SmoothOracle f;
    f.value = [](const Vector& x) { return -0.5 * dot(x, x); };
    f.gradient = [](const Vector& x) -> Vector { return -x; };
    f.lipschitz = 1.0;
    f.dimension = p.dimension;
    p.upper = std::move(f);
    p.id += ":nonconvex_upper";
  }
  return p;
}

SolverConfig to_solver_config(const SolverEntry& e, const RunConfig& c) {
  SolverConfig s;
  s.variant = e.variant;
  s.K = e.K;
  if (e.eta_mode == "fixed") {
    s.eta_mode = FixedEta{e.eta};
  } else if (e.eta_mode == "weak_sharp") {
    s.eta_mode = WeakSharpEta{};
  } else {
    s.eta_mode = BudgetScaledEta{};
  }
  if (e.gamma_rule == "scaled") {
    s.gamma_rule = ScaledStep{e.gamma_fraction};
  } else {
    s.gamma_rule = MaxStep{};
  }
  if (c.x0) s.x0 = to_vector(*c.x0);
  s.record_every = e.record_every;
  s.seed = c.seed;
  s.record_timings = c.record_timings;
  return s;
}

std::size_t resolved_reference_budget(const RunConfig& c) {
  if (c.reference_budget > 0) return c.reference_budget;
  std::size_t k = 1;
  for (const auto& e : c.solvers) k = std::max(k, e.K);
  return 10 * k;
}

}  // namespace rapm::cli
