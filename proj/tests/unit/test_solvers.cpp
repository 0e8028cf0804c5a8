#include <gtest/gtest.h>

#include <cmath>

#include "rapm/errors.hpp"
#include "rapm/problems.hpp"
#include "rapm/solvers.hpp"

using namespace rapm;

namespace {

ProblemSpec one_d() {
  return make_problem("one_d", "one_d", quadratic_oracle(Vector{{2.0}}), quadratic_oracle(Vector{{0.0}}),
                      make_zero());
}

/// h = 0.5 ||diag(1, 0.03) (x - 1)||^2, f = 0.5 ||x||^2: condition number ~1e3.
ProblemSpec ill_conditioned() {
  const DenseMatrix a = DenseMatrix::diagonal(Vector{{1.0, 0.03}});
  const Vector b = matvec(a, Vector::Ones(2));
  return make_problem("ill", "ill", quadratic_oracle(Vector::Zero(2)), least_squares_oracle(a, b, 1.0),
                      make_zero());
}

SolverConfig config(Variant v, std::size_t K, EtaMode eta = BudgetScaledEta{}) {
  SolverConfig c;
  c.variant = v;
  c.K = K;
  c.eta_mode = eta;
  return c;
}

GroundTruth truth(double alpha, double grad_norm) {
  GroundTruth g;
  g.alpha = alpha;
  g.grad_f_at_xstar_norm = grad_norm;
  return g;
}

}  // namespace

TEST(Momentum, GoldenRatio) { EXPECT_DOUBLE_EQ(momentum_next(1.0), (1.0 + std::sqrt(5.0)) / 2.0); }

TEST(Momentum, Identity) {
  const double t2 = momentum_next(1.0);
  const double t3 = momentum_next(t2);
  EXPECT_NEAR(t3 * t3 - t3, t2 * t2, 1e-12);
}

TEST(Momentum, RejectsBelowOne) { EXPECT_THROW(momentum_next(0.99), ParameterError); }

TEST(Momentum, GrowsAtLeastLinearly) {
  double t = 1.0;
  for (std::size_t k = 1; k <= 1000000; ++k) {
    ASSERT_GE(t, (static_cast<double>(k) + 1.0) / 2.0) << "k=" << k;
    const double next = momentum_next(t);
    ASSERT_LE(std::abs(next * next - next - t * t), 1e-12 * t * t) << "k=" << k;
    t = next;
  }
}

TEST(SelectEta, Examples) {
  EXPECT_DOUBLE_EQ(select_eta(BudgetScaledEta{}, 99, std::nullopt), 0.01);
  EXPECT_EQ(select_eta(WeakSharpEta{}, 10, truth(1.0, 0.5)), 1.0);
  EXPECT_EQ(select_eta(FixedEta{0.05}, 10, std::nullopt), 0.05);
}

TEST(SelectEta, ZeroGradientFallbackIsCapped) {
  EXPECT_EQ(select_eta(WeakSharpEta{}, 10, truth(1.0, 0.0)), 1.0);
  EXPECT_EQ(select_eta(WeakSharpEta{}, 10, truth(1e-13, 0.0)), 0.05);
}

TEST(SelectEta, WeakSharpNeedsGroundTruth) {
  EXPECT_THROW(select_eta(WeakSharpEta{}, 10, std::nullopt), ParameterError);
  GroundTruth g;
  EXPECT_THROW(select_eta(WeakSharpEta{}, 10, g), ParameterError);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.K = 0;
  EXPECT_THROW(validate_config(c), ParameterError);
  c.K = 5;
  c.record_every = 0;
  EXPECT_THROW(validate_config(c), ParameterError);
  c.record_every = 1;
  c.eta_mode = FixedEta{0.0};
  EXPECT_THROW(validate_config(c), ParameterError);
  c.eta_mode = FixedEta{1.0};
  c.gamma_rule = ScaledStep{1.5};
  EXPECT_THROW(validate_config(c), ParameterError);
  c.gamma_rule = ScaledStep{0.5};
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Rapm, OneDimensionalExample) {
  const IterateTrace t = rapm_solve(one_d(), config(Variant::RAPM, 50, FixedEta{1.0}));
  EXPECT_EQ(t.gamma, 0.5);
  EXPECT_EQ(t.records[1].x[0], 1.0);
  EXPECT_NEAR(t.last().x[0], 1.0, 1e-12);
}

TEST(Rapm, StartsAtMinimizerStaysThere) {
  SolverConfig c = config(Variant::RAPM, 30, FixedEta{1.0});
  c.x0 = Vector{{1.0}};
  for (const auto& r : rapm_solve(one_d(), c).records) EXPECT_EQ(r.x[0], 1.0);
}

TEST(Rapm, WeakSharpBoxReachesClosedForm) {
  const ProblemSpec p = random_weak_sharp_box(20, 10, 1);
  const IterateTrace t = rapm_solve(p, config(Variant::RAPM, 2000, WeakSharpEta{}));
  EXPECT_LE((t.last().x - p.ground_truth->x_star).norm(), 1e-4);
}

TEST(Rapm, ReplayReproducesTraceBitIdentically) {
  const ProblemSpec p = make_sparse_regression(20, 15, 12, 3, 0.05, 1.0, 3);
  const IterateTrace t = rapm_solve(p, config(Variant::RAPM, 200));
  ASSERT_EQ(t.records.size(), 201u);
  Vector x_prev = t.x0;
  Vector y = t.x0;
  double tk = 1.0;
  for (std::size_t k = 1; k <= t.K; ++k) {
    const Vector x = q_map(p, t.eta, t.gamma, y);
    ASSERT_EQ(x, t.records[k].x) << "k=" << k;
    ASSERT_EQ(y, t.records[k].y) << "k=" << k;
    ASSERT_EQ(tk, t.records[k].t) << "k=" << k;
    const double tn = momentum_next(tk);
    y = extrapolate(x, x_prev, tk, tn);
    x_prev = x;
    tk = tn;
  }
  EXPECT_EQ(t.records[1].t, 1.0);
  for (std::size_t k = 2; k <= t.K; ++k) EXPECT_GT(t.records[k].t, t.records[k - 1].t);
}

TEST(Rapm, DeterministicAcrossRuns) {
  const ProblemSpec p = make_sparse_regression(20, 15, 12, 3, 0.05, 1.0, 3);
  const IterateTrace a = rapm_solve(p, config(Variant::RAPM, 100));
  const IterateTrace b = rapm_solve(p, config(Variant::RAPM, 100));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].x, b.records[i].x);
    EXPECT_EQ(a.records[i].f, b.records[i].f);
  }
}

TEST(Rapm, IteratesStayFeasible) {
  const ProblemSpec reg = make_sparse_regression(30, 20, 25, 4, 0.01, 0.5, 8);
  for (const auto& r : rapm_solve(reg, config(Variant::RAPM, 300)).records) {
    EXPECT_LE(norm1(r.x), 0.5 + 1e-10);
  }
  const ProblemSpec box = random_weak_sharp_box(10, 4, 2);
  for (const auto& r : rapm_solve(box, config(Variant::RAPM, 300, WeakSharpEta{})).records) {
    EXPECT_TRUE(is_feasible(box.nonsmooth, r.x));
  }
}

TEST(Rapm, RecordSchedule) {
  SolverConfig c = config(Variant::RAPM, 20, FixedEta{1.0});
  c.record_every = 7;
  const IterateTrace t = rapm_solve(one_d(), c);
  std::vector<std::size_t> ks;
  for (const auto& r : t.records) ks.push_back(r.k);
  EXPECT_EQ(ks, (std::vector<std::size_t>{0, 7, 14, 20}));
  EXPECT_EQ(t.records[0].t, 0.0);
}

TEST(Rapm, ScaledStep) {
  SolverConfig c = config(Variant::RAPM, 10, FixedEta{1.0});
  c.gamma_rule = ScaledStep{0.5};
  EXPECT_EQ(rapm_solve(one_d(), c).gamma, 0.25);
}

TEST(Rapm, ZeroLEtaHasNoMaxStep) {
  const ProblemSpec p = make_problem("lin", "lin", linear_oracle(Vector{{1.0}}),
                                     linear_oracle(Vector{{1.0}}), make_box(1, 0, 1));
  EXPECT_THROW(rapm_solve(p, config(Variant::RAPM, 5)), ParameterError);
}

TEST(Rapm, DivergenceGuardKeepsPartialTrace) {
  // Declared constant 1 for a curvature-100 quadratic: the step overshoots.
  SmoothOracle h = quadratic_oracle(Vector::Zero(2), 100.0);
  h.lipschitz = 1.0;
  const ProblemSpec p = make_problem("bad", "bad", quadratic_oracle(Vector::Zero(2)), h, make_zero());
  SolverConfig c = config(Variant::RAPM, 100, FixedEta{1.0});
  c.x0 = Vector::Ones(2);
  try {
    rapm_solve(p, c);
    FAIL() << "expected DivergenceError";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.last_finite_k(), 0u);
    EXPECT_LT(e.last_finite_k(), 100u);
    EXPECT_EQ(e.partial_trace().records.size(), e.last_finite_k() + 1);
  }
}

TEST(Rpm, AccelerationWinsOnIllConditionedProblem) {
  const ProblemSpec p = ill_conditioned();
  const EtaMode eta = FixedEta{1e-3};
  const IterateTrace a = rapm_solve(p, config(Variant::RAPM, 100, eta));
  const IterateTrace r = rpm_solve(p, config(Variant::RPM, 100, eta));
  // Minimizer of F_eta: (diag(1, 9e-4) + eta I) x = diag(1, 9e-4) 1.
  const Vector xs{{1.0 / (1.0 + 1e-3), 9e-4 / (9e-4 + 1e-3)}};
  const double fs = F_eta_value(p, 1e-3, xs);
  EXPECT_GT(r.last().F_eta - fs, a.last().F_eta - fs);
}

TEST(Rpm, MonotoneAndFixedPoint) {
  const ProblemSpec p = make_sparse_regression(20, 15, 12, 3, 0.05, 1.0, 3);
  const IterateTrace t = rpm_solve(p, config(Variant::RPM, 300));
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    EXPECT_LE(t.records[k].F_eta, t.records[k - 1].F_eta + 1e-12) << "k=" << k;
  }
  SolverConfig c = config(Variant::RPM, 20, FixedEta{1.0});
  c.x0 = Vector{{1.0}};
  for (const auto& r : rpm_solve(one_d(), c).records) EXPECT_EQ(r.x[0], 1.0);
}

TEST(FistaLower, ConvergesToLeastSquaresMinimizer) {
  const Vector b{{1.0, -2.0, 0.5}};
  const ProblemSpec p = make_problem("ls", "ls", quadratic_oracle(Vector::Zero(3)),
                                     quadratic_oracle(b), make_zero());
  const IterateTrace t = fista_lower_solve(p, 200);
  EXPECT_LE((t.last().x - b).norm(), 1e-6);
  for (const auto& r : t.records) {
    if (r.k == 0) continue;
    const double k1 = static_cast<double>(r.k) + 1.0;
    EXPECT_LE(r.h, 2.0 * b.squaredNorm() / (k1 * k1) + 1e-15) << "k=" << r.k;
  }
  const IterateTrace fixed = fista_lower_solve(p, 10, b);
  for (const auto& r : fixed.records) EXPECT_EQ(r.x, b);
}

TEST(FistaLower, WeakSharpLowerLevelReachesZero) {
  const ProblemSpec p = random_weak_sharp_box(20, 10, 4);
  const IterateTrace t = fista_lower_solve(p, 500);
  EXPECT_LE(std::abs(t.last().h + t.last().omega - p.ground_truth->h_bar_star), 1e-10);
  EXPECT_EQ(t.eta, 0.0);
}

TEST(BigSam, ZeroLowerLevelStaysFinite) {
  const ProblemSpec p = make_problem("z", "z", quadratic_oracle(Vector{{1.0, -1.0}}),
                                     linear_oracle(Vector::Zero(2)), make_zero());
  const IterateTrace t = bigsam_solve(p, config(Variant::BiGSAM, 200));
  for (const auto& r : t.records) EXPECT_TRUE(all_finite(r.x) && std::isfinite(r.F_eta));
}

TEST(BigSam, LeavesThenReturnsToOneDimensionalOptimum) {
  // alpha_1 = 1 makes the first iterate a full gradient step on f, so x = 0
  // is not a fixed point; the averaging weights pull it back as k grows.
  SolverConfig c = config(Variant::BiGSAM, 20000);
  c.x0 = Vector::Zero(1);
  const IterateTrace t = bigsam_solve(one_d(), c);
  EXPECT_EQ(t.records[1].x[0], 2.0);
  EXPECT_LT(std::abs(t.last().x[0]), 1e-3);
  EXPECT_LT(std::abs(t.last().x[0]), std::abs(t.records[t.records.size() / 2].x[0]));
}

TEST(BigSam, SparseRegressionCompletes) {
  const ProblemSpec p = make_sparse_regression(60, 40, 50, 5, 0.01, 1.0, 7);
  SolverConfig c = config(Variant::BiGSAM, 3000);
  c.record_every = 100;
  const IterateTrace t = bigsam_solve(p, c);
  EXPECT_EQ(t.last().k, 3000u);
  EXPECT_TRUE(all_finite(t.last().x));
}

TEST(Airg, FirstStepIsQMap) {
  const ProblemSpec p = make_sparse_regression(20, 15, 12, 3, 0.05, 1.0, 3);
  const IterateTrace t = airg_solve(p, config(Variant::aIRG, 10));
  const double gamma0 = 1.0 / (p.lower.lipschitz + p.upper.lipschitz);
  EXPECT_EQ(t.gamma, gamma0);
  EXPECT_EQ(t.records[1].x, q_map(p, 1.0, gamma0, t.x0));
}

TEST(Airg, AverageStaysInBall) {
  const ProblemSpec p = make_sparse_regression(20, 15, 12, 3, 0.05, 0.7, 3);
  for (const auto& r : airg_solve(p, config(Variant::aIRG, 500)).records) {
    ASSERT_TRUE(r.x_avg.has_value());
    EXPECT_LE(norm1(*r.x_avg), 0.7 + 1e-10);
    EXPECT_LE(norm1(r.x), 0.7 + 1e-10);
  }
}

TEST(Airg, NotBetterThanRapmOnWeakSharpBox) {
  // Both land on x* exactly here, so only the non-strict ordering is testable.
  const ProblemSpec p = random_weak_sharp_box(20, 10, 1);
  const double fs = p.ground_truth->f_star;
  const IterateTrace a = airg_solve(p, config(Variant::aIRG, 3000));
  const IterateTrace r = rapm_solve(p, config(Variant::RAPM, 3000, WeakSharpEta{}));
  EXPECT_GE(std::abs(a.last().f - fs), std::abs(r.last().f - fs));
}

TEST(Solve, DispatchesOnVariant) {
  const ProblemSpec p = make_sparse_regression(20, 15, 12, 3, 0.05, 1.0, 3);
  for (Variant v : {Variant::RAPM, Variant::RPM, Variant::BiGSAM, Variant::aIRG, Variant::FISTALower}) {
    const IterateTrace t = solve(p, config(v, 5));
    EXPECT_EQ(t.variant, v);
    EXPECT_EQ(t.problem_id, p.id);
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_variant("FISTA"), ParameterError);
}
