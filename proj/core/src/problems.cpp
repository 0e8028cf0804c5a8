#include "rapm/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "rapm/errors.hpp"
#include "rapm/rng.hpp"

namespace rapm {

namespace fs = std::filesystem;

namespace {

/// FNV-1a over the bit patterns of the given vectors.
std::string fingerprint(std::initializer_list<const Vector*> parts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Vector* v : parts) {
    for (Eigen::Index i = 0; i < v->size(); ++i) {
      std::uint64_t bits = 0;
      const double d = (*v)[i];
      static_assert(sizeof bits == sizeof d);
      std::memcpy(&bits, &d, sizeof d);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Vector flatten(const DenseMatrix& a) {
  Vector v(static_cast<Eigen::Index>(a.rows() * a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      v[static_cast<Eigen::Index>(i * a.cols() + j)] = a(i, j);
    }
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

struct CsvTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path.string() + "'");

  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(path.string(), 0, 0, "file contains no rows");

  CsvTable t;
  for (std::size_t r = 0; r < lines.size(); ++r) {
    std::string_view rest = lines[r];
    std::size_t col = 0;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      ++col;
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        throw ParseError(path.string(), r + 1, col,
                         "non-numeric cell '" + std::string(cell) + "'");
      }
      t.values.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (r == 0) {
      t.cols = col;
    } else if (col != t.cols) {
      throw ParseError(path.string(), r + 1, 0,
                       "ragged row " + std::to_string(r + 1) + ": has " + std::to_string(col) +
                           " columns, expected " + std::to_string(t.cols));
    }
  }
  t.rows = lines.size();
  return t;
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_regression_data(const RegressionData& d) {
  if (d.A_tr.cols() != d.A_val.cols()) {
    throw DimensionError("regression data: columns of A_val vs A_tr", d.A_tr.cols(),
                         d.A_val.cols());
  }
  if (static_cast<std::size_t>(d.b_tr.size()) != d.A_tr.rows()) {
    throw DimensionError("regression data: length of b_tr vs rows of A_tr", d.A_tr.rows(),
                         static_cast<std::size_t>(d.b_tr.size()));
  }
  if (static_cast<std::size_t>(d.b_val.size()) != d.A_val.rows()) {
    throw DimensionError("regression data: length of b_val vs rows of A_val", d.A_val.rows(),
                         static_cast<std::size_t>(d.b_val.size()));
  }
  if (d.A_tr.empty() || d.A_val.empty()) throw ParameterError("regression data: empty matrix");
  if (!(d.radius > 0.0) || !std::isfinite(d.radius)) {
    throw ParameterError("regression data: radius must be finite and > 0");
  }
}

ProblemSpec make_weak_sharp_box(std::size_t n, const Vector& c, const Vector& p) {
  if (static_cast<std::size_t>(c.size()) != n) {
    throw DimensionError("make_weak_sharp_box: length of c", n, static_cast<std::size_t>(c.size()));
  }
  if (static_cast<std::size_t>(p.size()) != n) {
    throw DimensionError("make_weak_sharp_box: length of p", n, static_cast<std::size_t>(p.size()));
  }
  if (!all_finite(c) || !all_finite(p)) throw ParameterError("make_weak_sharp_box: non-finite data");
  double alpha = kInfinity;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c[i] < 0.0) {
      throw ParameterError("make_weak_sharp_box: c must be >= 0 (c[" + std::to_string(i) +
                           "] = " + format_double(c[i]) + ")");
    }
    if (c[i] > 0.0) alpha = std::min(alpha, c[i]);
  }
  if (std::isinf(alpha)) {
    throw ParameterError("make_weak_sharp_box: c has no positive entry, so there is no "
                         "weak-sharpness modulus");
  }

  // Shared mask of "pinned" coordinates, those with c_i > 0.
  auto pinned = std::make_shared<const Eigen::Array<bool, Eigen::Dynamic, 1>>(c.array() > 0.0);

  Vector x_star(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    x_star[i] = (*pinned)[i] ? 0.0 : std::clamp(p[i], 0.0, 1.0);
  }

  GroundTruth gt;
  gt.x_star = x_star;
  gt.f_star = 0.5 * dot(x_star - p, x_star - p);
  gt.h_bar_star = 0.0;
  gt.alpha = alpha;
  gt.grad_f_at_xstar_norm = norm2(x_star - p);
  auto xs = std::make_shared<const Vector>(x_star);
  gt.dist_to_solution_set = [xs](const Vector& x) { return norm2(x - *xs); };
  gt.project_lower_solution_set = [pinned](const Vector& x) {
    Vector z(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      z[i] = (*pinned)[i] ? 0.0 : std::clamp(x[i], 0.0, 1.0);
    }
    return z;
  };

  const std::string id = "weak_sharp_box:n=" + std::to_string(n) + ":" + fingerprint({&c, &p});
  return make_problem("weak_sharp_box", id, quadratic_oracle(p, 1.0), linear_oracle(c),
                      make_box(n, 0.0, 1.0), std::move(gt), true);
}

ProblemSpec random_weak_sharp_box(std::size_t n, std::size_t positive_count, std::uint64_t seed) {
  if (n == 0) throw ParameterError("random_weak_sharp_box: n must be >= 1");
  if (positive_count < 1 || positive_count > n) {
    throw ParameterError("random_weak_sharp_box: positive_count must lie in [1, n]");
  }
  Rng rng(seed);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < positive_count; ++i) {
    std::swap(idx[i], idx[i + rng.index(n - i)]);
  }
  Vector c = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < positive_count; ++i) {
    c[static_cast<Eigen::Index>(idx[i])] = rng.uniform(0.5, 2.0);
  }
  Vector p(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = rng.uniform(-0.5, 1.5);
  return make_weak_sharp_box(n, c, p);
}

WeakSharpnessReport verify_weak_sharpness(const ProblemSpec& p, std::size_t n_samples,
                                          std::uint64_t seed) {
  if (!p.ground_truth || !p.ground_truth->alpha || !p.ground_truth->project_lower_solution_set) {
    throw ParameterError("verify_weak_sharpness: ground truth with alpha and the lower-set "
                         "projection is required");
  }
  const GroundTruth& gt = *p.ground_truth;
  const double alpha = *gt.alpha;
  const auto n = static_cast<Eigen::Index>(p.dimension);
  Rng rng(seed);

  auto to_feasible = [&](Vector x) {
    if (is_indicator(p.nonsmooth)) return prox(p.nonsmooth, x, 1.0);
    return x;
  };

  WeakSharpnessReport rep;
  rep.worst_margin = kInfinity;
  for (std::size_t s = 0; s < n_samples; ++s) {
    Vector x(n);
    if (s % 2 == 0) {
      if (const auto* box = std::get_if<BoxIndicator>(&p.nonsmooth)) {
        for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(box->lo[i], box->hi[i]);
      } else {
        for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.normal();
        x = to_feasible(std::move(x));
      }
    } else {
      // Move a single coordinate away from x*.
      x = gt.x_star;
      const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
      x[i] += rng.uniform(-1.0, 1.0);
      x = to_feasible(std::move(x));
    }
    const double gap = h_bar_value(p, x) - gt.h_bar_star;
    const double dist = norm2(x - gt.project_lower_solution_set(x));
    const double margin = gap - alpha * dist;
    ++rep.samples;
    if (margin < -1e-10) ++rep.violations;
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_point = x;
    }
  }
  if (rep.samples == 0) rep.worst_margin = 0.0;
  rep.passed = rep.violations == 0;
  return rep;
}

RegressionData make_regression_data(std::size_t m_tr, std::size_t m_val, std::size_t n,
                                    std::size_t k_sparse, double noise_sigma, double radius,
                                    std::uint64_t seed) {
  if (m_tr == 0 || m_val == 0 || n == 0) {
    throw ParameterError("make_sparse_regression: dimensions must be positive");
  }
  if (k_sparse < 1 || k_sparse > n) {
    throw ParameterError("make_sparse_regression: k_sparse must lie in [1, n]");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ParameterError("make_sparse_regression: noise_sigma must be >= 0");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ParameterError("make_sparse_regression: radius must be > 0");
  }
  Rng rng(seed);
  auto gaussian_matrix = [&](std::size_t rows) {
    std::vector<double> e(rows * n);
    for (double& v : e) v = rng.normal();
    return DenseMatrix(rows, n, std::move(e));
  };
  DenseMatrix a_tr = gaussian_matrix(m_tr);
  DenseMatrix a_val = gaussian_matrix(m_val);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k_sparse; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  std::vector<std::size_t> support(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_sparse));
  std::sort(support.begin(), support.end());

  Vector x_true = Vector::Zero(static_cast<Eigen::Index>(n));
  const double mag = radius / static_cast<double>(k_sparse);
  double partial = 0.0;
  for (std::size_t j = 0; j < k_sparse; ++j) {
    // Summing in index order mirrors norm1, so the adjusted last entry makes
    // the l1 norm equal radius exactly.
    const double m = j + 1 < k_sparse ? mag : radius - partial;
    partial += m;
    x_true[static_cast<Eigen::Index>(support[j])] = rng.sign() * m;
  }

  Vector b_tr = matvec(a_tr, x_true);
  Vector b_val = matvec(a_val, x_true);
  if (noise_sigma > 0.0) {
    for (Eigen::Index i = 0; i < b_tr.size(); ++i) b_tr[i] += noise_sigma * rng.normal();
    for (Eigen::Index i = 0; i < b_val.size(); ++i) b_val[i] += noise_sigma * rng.normal();
  }
  return RegressionData{std::move(a_tr), std::move(b_tr), std::move(a_val), std::move(b_val),
                        radius, std::move(x_true)};
}

ProblemSpec make_regression_problem(RegressionData data, std::string name, std::string id) {
  check_regression_data(data);
  auto shared = std::make_shared<const RegressionData>(std::move(data));
  const double l_h = spectral_norm_sq(shared->A_tr);
  const double l_f = spectral_norm_sq(shared->A_val);
  ProblemSpec p = make_problem(std::move(name), std::move(id),
                               least_squares_oracle(shared->A_val, shared->b_val, l_f),
                               least_squares_oracle(shared->A_tr, shared->b_tr, l_h),
                               make_l1_ball(shared->radius), std::nullopt,
                               // Continuous function over a compact set.
                               true);
  p.regression = std::move(shared);
  return p;
}

ProblemSpec make_sparse_regression(std::size_t m_tr, std::size_t m_val, std::size_t n,
                                   std::size_t k_sparse, double noise_sigma, double radius,
                                   std::uint64_t seed) {
  RegressionData d = make_regression_data(m_tr, m_val, n, k_sparse, noise_sigma, radius, seed);
  std::ostringstream id;
  id << "sparse_regression:" << m_tr << ":" << m_val << ":" << n << ":" << k_sparse << ":"
     << format_double(noise_sigma) << ":" << format_double(radius) << ":seed=" << seed;
  return make_regression_problem(std::move(d), "sparse_regression", id.str());
}

DenseMatrix read_csv_matrix(const fs::path& path) {
  CsvTable t = read_csv(path);
  return DenseMatrix(t.rows, t.cols, std::move(t.values));
}

Vector read_csv_vector(const fs::path& path) {
  CsvTable t = read_csv(path);
  if (t.rows != 1 && t.cols != 1) {
    throw ParseError(path.string(), 0, 0,
                     "expected a single row or column, got " + std::to_string(t.rows) + "x" +
                         std::to_string(t.cols));
  }
  return Eigen::Map<const Vector>(t.values.data(), static_cast<Eigen::Index>(t.values.size()));
}

void write_csv_matrix(const DenseMatrix& a, const fs::path& path) {
  std::ofstream out = open_for_write(path);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_csv_vector(const Vector& v, const fs::path& path) {
  std::ofstream out = open_for_write(path);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ProblemSpec load_regression_csv(const fs::path& a_tr, const fs::path& b_tr, const fs::path& a_val,
                                const fs::path& b_val, double radius) {
  RegressionData d{read_csv_matrix(a_tr), read_csv_vector(b_tr), read_csv_matrix(a_val),
                   read_csv_vector(b_val), radius, std::nullopt};
  check_regression_data(d);
  const Vector flat_tr = flatten(d.A_tr);
  const Vector flat_val = flatten(d.A_val);
  const Vector rad = Vector::Constant(1, radius);
  const std::string id = "csv:" + std::to_string(d.A_tr.rows()) + "x" +
                         std::to_string(d.A_tr.cols()) + ":" +
                         fingerprint({&flat_tr, &d.b_tr, &flat_val, &d.b_val, &rad});
  return make_regression_problem(std::move(d), "csv_regression", id);
}

RegressionFiles write_regression_csv(const RegressionData& d, const fs::path& dir,
                                     const std::string& prefix) {
  RegressionFiles files{dir / (prefix + "A_tr.csv"), dir / (prefix + "b_tr.csv"),
                        dir / (prefix + "A_val.csv"), dir / (prefix + "b_val.csv")};
  write_csv_matrix(d.A_tr, files.A_tr);
  write_csv_vector(d.b_tr, files.b_tr);
  write_csv_matrix(d.A_val, files.A_val);
  write_csv_vector(d.b_val, files.b_val);
  return files;
}

}  // namespace rapm
