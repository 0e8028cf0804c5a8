#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rapm/errors.hpp"
#include "rapm/oracles.hpp"
#include "rapm/solvers.hpp"

namespace rapm::cli {

/// Bad config content. The message carries the file, the line when it can be
/// located, and the dotted key path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ProblemKind { WeakSharpBox, SparseRegression, Csv };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::WeakSharpBox;
  std::uint64_t seed = 0;

  // weak_sharp_box: explicit c and p, or a seeded draw with positive_count.
  std::size_t n = 0;
  std::optional<std::vector<double>> c;
  std::optional<std::vector<double>> p;
  std::size_t positive_count = 0;

  // sparse_regression
  std::size_t m_tr = 0;
  std::size_t m_val = 0;
  std::size_t k_sparse = 0;
  double noise_sigma = 0.0;
  double radius = 1.0;  ///< also used by csv

  // csv, resolved against the config file directory at load time
  std::filesystem::path a_tr, b_tr, a_val, b_val;
};

struct SolverEntry {
  Variant variant = Variant::RAPM;
  std::size_t K = 100;
  std::string eta_mode = "budget_scaled";  ///< fixed | budget_scaled | weak_sharp
  double eta = 0.0;                         ///< fixed mode only
  std::string gamma_rule = "max_step";      ///< max_step | scaled
  double gamma_fraction = 1.0;              ///< scaled only
  std::size_t record_every = 1;
};

struct CertifyToggles {
  bool lemma_chain = true;
  bool theorem1 = true;
  bool proposition1 = true;
};

/// Hooks used by tests to exercise failure paths.
struct TestHooks {
  bool nonconvex_upper = false;        ///< replace f by -0.5 ||x||^2
  std::size_t perturb_k = 0;           ///< 0 disables
  double perturb_magnitude = 1e-2;     ///< added to coordinate 0 of x_k
};

struct RunConfig {
  ProblemConfig problem;
  std::vector<SolverEntry> solvers;
  std::optional<std::vector<double>> x0;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  std::size_t validate_samples = 200;
  std::size_t weak_sharp_samples = 10000;
  std::size_t reference_budget = 0;  ///< 0: ten times the largest K
  bool record_timings = false;
  CertifyToggles certify;
  TestHooks test_hooks;
};

/// Parses a config; `source` names the input in error messages and
/// `base_dir` resolves relative csv paths. Unknown keys are rejected. A
/// top-level "manifest" object (written by the commands) is ignored.
RunConfig parse_config(const std::string& text, const std::string& source,
                       const std::filesystem::path& base_dir);

/// Reads and parses a config file. Throws IoError or ConfigError.
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved config as JSON; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

std::string to_string(ProblemKind k);

/// Builds the problem described by the config.
ProblemSpec build_problem(const RunConfig& c);

SolverConfig to_solver_config(const SolverEntry& e, const RunConfig& c);

/// Largest K over the configured solvers times ten, unless set explicitly.
std::size_t resolved_reference_budget(const RunConfig& c);

}  // namespace rapm::cli
