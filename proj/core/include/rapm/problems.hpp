#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rapm/numerics.hpp"
#include "rapm/oracles.hpp"

namespace rapm {

/// Train/validation split of a constrained least-squares selection problem:
///   lower  h(x) = 0.5 ||A_tr x - b_tr||^2 over ||x||_1 <= radius
///   upper  f(x) = 0.5 ||A_val x - b_val||^2
struct RegressionData {
  DenseMatrix A_tr;
  Vector b_tr;
  DenseMatrix A_val;
  Vector b_val;
  double radius = 1.0;
  /// Generating sparse vector, when the data is synthetic.
  std::optional<Vector> x_true;
};

/// Throws DimensionError / ParameterError when the split is inconsistent.
void check_regression_data(const RegressionData& d);

/// Linear lower level over the unit box with a quadratic upper level:
///   h(x) = <c, x>, omega = indicator of [0, 1]^n, f(x) = 0.5 ||x - p||^2.
///
/// The lower solution set is { x in [0,1]^n : x_i = 0 where c_i > 0 }, which
/// is weakly sharp with alpha = min{ c_i : c_i > 0 }. The bilevel solution is
/// x*_i = 0 where c_i > 0 and clamp(p_i, 0, 1) elsewhere. Throws
/// ParameterError when c has a negative entry or no positive entry.
ProblemSpec make_weak_sharp_box(std::size_t n, const Vector& c, const Vector& p);

/// Seeded instance: positive_count entries of c drawn from U[0.5, 2] at random
/// positions (the rest 0), p drawn from U[-0.5, 1.5]^n.
ProblemSpec random_weak_sharp_box(std::size_t n, std::size_t positive_count, std::uint64_t seed);

struct WeakSharpnessReport {
  bool passed = false;
  /// min over samples of h_bar(x) - h_bar* - alpha dist(x, X*_h_bar)
  double worst_margin = 0.0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  Vector worst_point;
};

/// Samples feasible points (uniform draws and single-axis moves away from x*)
/// and checks h_bar(x) - h_bar* >= alpha dist(x, X*_h_bar) - 1e-10.
/// Throws ParameterError without ground truth carrying alpha and the
/// lower-set projection.
WeakSharpnessReport verify_weak_sharpness(const ProblemSpec& p, std::size_t n_samples,
                                          std::uint64_t seed);

/// Synthetic regression data. Draw order from one Rng(seed): A_tr row-major,
/// A_val row-major, support (partial Fisher-Yates), signs, noise on b_tr,
/// noise on b_val. The support entries have magnitude radius / k_sparse, with
/// the last one adjusted so that ||x_true||_1 == radius exactly.
RegressionData make_regression_data(std::size_t m_tr, std::size_t m_val, std::size_t n,
                                    std::size_t k_sparse, double noise_sigma, double radius,
                                    std::uint64_t seed);

/// Wraps regression data as a ProblemSpec; L_h and L_f come from
/// spectral_norm_sq of A_tr and A_val.
ProblemSpec make_regression_problem(RegressionData data, std::string name, std::string id);

ProblemSpec make_sparse_regression(std::size_t m_tr, std::size_t m_val, std::size_t n,
                                   std::size_t k_sparse, double noise_sigma, double radius,
                                   std::uint64_t seed);

/// Plain numeric CSV: comma separated, no header, one matrix row per line.
DenseMatrix read_csv_matrix(const std::filesystem::path& path);
/// A vector file is either a single column or a single row.
Vector read_csv_vector(const std::filesystem::path& path);
void write_csv_matrix(const DenseMatrix& a, const std::filesystem::path& path);
void write_csv_vector(const Vector& v, const std::filesystem::path& path);

ProblemSpec load_regression_csv(const std::filesystem::path& a_tr, const std::filesystem::path& b_tr,
                                const std::filesystem::path& a_val,
                                const std::filesystem::path& b_val, double radius);

struct RegressionFiles {
  std::filesystem::path A_tr, b_tr, A_val, b_val;
};

/// Writes the four files as <dir>/<prefix>A_tr.csv etc.
RegressionFiles write_regression_csv(const RegressionData& d, const std::filesystem::path& dir,
                                     const std::string& prefix = "");

/// %.17g, enough to round-trip any double.
std::string format_double(double v);

}  // namespace rapm
