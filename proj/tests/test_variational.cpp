#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "qopf/saddle.hpp"
#include "qopf/variational.hpp"

using namespace qopf;

namespace {

constexpr double kPi = std::numbers::pi;

RVector uniform_angles(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  RVector p(n);
  for (auto& x : p) x = u(rng);
  return p;
}

LagrangianContext random_context(int pq, int dq, std::mt19937_64& rng, int prow = 6, int drow = 2, int layers = 2) {
  return LagrangianContext(oracle::random_problem(1 << pq, 1 << dq, rng), AnsatzSpec::from_table(prow, layers, pq),
                           AnsatzSpec::from_table(drow, layers, dq));
}

/// Problem whose matrices are all `m` with all bounds `b`.
LagrangianContext uniform_context(const CMatrix& m0, const CMatrix& mm, double b, int pq, int dq) {
  QcqpProblem p;
  p.n = p.dim = 1 << pq;
  p.m0 = oracle::sparse(m0);
  for (int r = 0; r < (1 << dq); ++r) {
    Constraint c;
    c.matrix = oracle::sparse(mm);
    c.bound = b;
    p.constraints.push_back(c);
  }
  p.node_index.resize(p.n);
  return LagrangianContext(p, AnsatzSpec::from_table(2, 2, pq), AnsatzSpec::from_table(2, 2, dq));
}

struct Point {
  PrimalPoint p;
  DualPoint d;
};

Point random_point(const LagrangianContext& ctx, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  return {{uniform_angles(ctx.primal_spec().param_count(), rng), u(rng)},
          {uniform_angles(ctx.dual_spec().param_count(), rng), u(rng)}};
}

}  // namespace

TEST_SUITE("variational_opf") {

TEST_CASE("primal vector") {
  std::mt19937_64 rng(1);
  LagrangianContext ctx = random_context(2, 2, rng, 2);
  const CVector e0 = primal_vector(ctx, {RVector::Zero(ctx.primal_spec().param_count()), 1.0});
  CHECK(e0[0] == cplx(1.0, 0.0));
  CHECK(e0.tail(3).norm() == 0.0);
  const double a = std::sqrt(57.0);
  for (int k = 0; k < 5; ++k) {
    const CVector v = primal_vector(ctx, {uniform_angles(ctx.primal_spec().param_count(), rng), a});
    CHECK(v.norm() == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("dual vector") {
  std::mt19937_64 rng(2);
  LagrangianContext ctx = random_context(1, 3, rng);
  const RVector phi = uniform_angles(ctx.dual_spec().param_count(), rng);
  CHECK(dual_vector(ctx, {phi, 0.0}).norm() == 0.0);
  for (double beta : {0.5, 2.0, 7.3}) {
    const RVector l = dual_vector(ctx, {phi, beta});
    CHECK(l.minCoeff() >= 0.0);
    CHECK(std::abs(l.sum() - beta * beta) < 1e-10);
    const CVector amp = prepare(ctx.dual_spec(), phi).amplitudes;
    for (int m = 0; m < l.size(); ++m) CHECK(std::abs(l[m] - beta * beta * std::norm(amp[m])) < 1e-13);
  }
}

TEST_CASE("terms on trivial observables") {
  std::mt19937_64 rng(3);
  const CMatrix id = CMatrix::Identity(4, 4);
  LagrangianContext ctx = uniform_context(id, id, 1.0, 2, 2);
  const Point z = random_point(ctx, rng);
  const Terms t = eval_terms_exact(ctx, z.p, z.d);
  CHECK(t.f == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(t.g == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(t.f0 == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("Kronecker form of F equals the weighted row sum") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    LagrangianContext ctx = random_context(2, 2, rng);
    const Point z = random_point(ctx, rng);
    const QuantumState psi = prepare(ctx.primal_spec(), z.p.theta);
    const QuantumState xi = prepare(ctx.dual_spec(), z.d.phi);
    double direct = 0.0;
    for (int m = 0; m < ctx.rows(); ++m)
      direct += std::norm(xi.amplitudes[m]) *
                oracle::double_loop(psi.amplitudes, oracle::dense(ctx.problem().constraints[m].matrix)).real();
    CHECK(std::abs(kronecker_F(ctx, psi, xi) - direct) < 1e-12);
    CHECK(std::abs(eval_terms_exact(ctx, z.p, z.d).f - direct) < 1e-12);
  }
}

TEST_CASE("Lagrangian equals the classical Lagrangian at matched points") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int pq = 1 + trial % 3, dq = 1 + (trial / 3) % 3;
    LagrangianContext ctx = random_context(pq, dq, rng, 1 + trial % 8, 1 + (trial + 3) % 8);
    const Point z = random_point(ctx, rng);
    const double expect = oracle::lagrangian(ctx.problem(), primal_vector(ctx, z.p), dual_vector(ctx, z.d));
    CHECK(std::abs(lagrangian(ctx, z.p, z.d) - expect) <= 1e-10 * (1.0 + std::abs(expect)));
  }
}

TEST_CASE("Lagrangian at a vanishing scale") {
  std::mt19937_64 rng(6);
  LagrangianContext ctx = random_context(2, 2, rng);
  Point z = random_point(ctx, rng);
  const Terms t = eval_terms_exact(ctx, z.p, z.d);
  const double a = z.p.alpha, b = z.d.beta;
  z.d.beta = 0.0;
  CHECK(lagrangian(ctx, z.p, z.d) == doctest::Approx(a * a * t.f0));
  z.d.beta = b;
  z.p.alpha = 0.0;
  CHECK(lagrangian(ctx, z.p, z.d) == doctest::Approx(-b * b * t.g));
}

TEST_CASE("gradients equal central finite differences") {
  std::mt19937_64 rng(7);
  const double h = 1e-5;
  double worst = 0.0;
  for (int row = 1; row <= 8; ++row) {
    LagrangianContext ctx = random_context(2, 2, rng, row, 9 - row);
    for (int k = 0; k < 5; ++k) {
      const Point z = random_point(ctx, rng);
      const Gradient g = grad(ctx, z.p, z.d);
      for (int i = 0; i < z.p.theta.size(); ++i) {
        PrimalPoint a = z.p, b = z.p;
        a.theta[i] += h;
        b.theta[i] -= h;
        worst = std::max(worst, std::abs(g.theta[i] - (lagrangian(ctx, a, z.d) - lagrangian(ctx, b, z.d)) / (2 * h)));
      }
      for (int i = 0; i < z.d.phi.size(); ++i) {
        DualPoint a = z.d, b = z.d;
        a.phi[i] += h;
        b.phi[i] -= h;
        worst = std::max(worst, std::abs(g.phi[i] - (lagrangian(ctx, z.p, a) - lagrangian(ctx, z.p, b)) / (2 * h)));
      }
      PrimalPoint pa = z.p, pb = z.p;
      pa.alpha += h;
      pb.alpha -= h;
      worst = std::max(worst, std::abs(g.alpha - (lagrangian(ctx, pa, z.d) - lagrangian(ctx, pb, z.d)) / (2 * h)));
      DualPoint da = z.d, db = z.d;
      da.beta += h;
      db.beta -= h;
      worst = std::max(worst, std::abs(g.beta - (lagrangian(ctx, z.p, da) - lagrangian(ctx, z.p, db)) / (2 * h)));
      CHECK(g.lagrangian == doctest::Approx(lagrangian(ctx, z.p, z.d)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("gradient special values and circuit accounting") {
  std::mt19937_64 rng(8);
  LagrangianContext ctx = random_context(2, 2, rng);
  Point z = random_point(ctx, rng);
  z.d.beta = 0.0;
  const Gradient g = grad(ctx, z.p, z.d);
  CHECK(g.phi.norm() == 0.0);
  CHECK(g.beta == 0.0);
  const int P = ctx.primal_spec().param_count(), Q = ctx.dual_spec().param_count();
  CHECK(g.primal_circuits == ctx.rotated_circuits() * (2 * P + 1));
  CHECK(g.dual_circuits == 2 * Q + 1);

  const CMatrix id = CMatrix::Identity(4, 4);
  LagrangianContext unit = uniform_context(id, CMatrix::Zero(4, 4), 0.0, 2, 1);
  const Point u = random_point(unit, rng);
  const Gradient gu = grad(unit, {u.p.theta, 1.0}, {u.d.phi, 0.0});
  CHECK(gu.alpha == doctest::Approx(2.0).epsilon(1e-13));

  const RVector s = stack_operator(grad(ctx, z.p, random_point(ctx, rng).d));
  CHECK(s.size() == P + Q + 2);
  const Gradient g2 = grad(ctx, z.p, random_point(ctx, rng).d);
  const RVector s2 = stack_operator(g2);
  CHECK(s2.head(P) == g2.theta);
  CHECK(s2[P] == g2.alpha);
  CHECK(s2.segment(P + 1, Q) == -g2.phi);
  CHECK(s2[P + Q + 1] == -g2.beta);
  CHECK_THROWS(grad(ctx, {RVector::Zero(1), 1.0}, z.d));
}

TEST_CASE("sampled F on degenerate inputs") {
  std::mt19937_64 rng(9);
  LagrangianContext ctx = random_context(2, 2, rng);
  const QuantumState psi = prepare(ctx.primal_spec(), uniform_angles(ctx.primal_spec().param_count(), rng));
  SamplingConfig cfg;
  cfg.shots = 20000;

  // PMF concentrated on row 2 reduces F to the expectation of M_2 alone
  RVector pmf = RVector::Zero(4);
  pmf[2] = 1.0;
  const CMatrix m2 = oracle::dense(ctx.problem().constraints[2].matrix);
  const double exact = oracle::double_loop(psi.amplitudes, m2).real();
  const ColorDecomposition d2 = decompose(m2);
  const double sd = std::sqrt(estimator_variance(d2, psi, cfg.shots).variance);
  SeedStream seeds(4);
  CHECK(std::abs(eval_F_sampled(ctx, psi, pmf, cfg, seeds) - exact) <= 5.0 * sd);

  const CMatrix zero = CMatrix::Zero(4, 4);
  LagrangianContext empty = uniform_context(CMatrix::Identity(4, 4), zero, 0.0, 2, 2);
  SeedStream s2(5);
  CHECK(eval_F_sampled(empty, psi, RVector::Constant(4, 0.25), cfg, s2) == 0.0);
}

TEST_CASE("sampled terms are unbiased") {
  std::mt19937_64 rng(10);
  LagrangianContext ctx = random_context(2, 2, rng);
  const Point z = random_point(ctx, rng);
  const QuantumState psi = prepare(ctx.primal_spec(), z.p.theta);
  const RVector pmf = prepare(ctx.dual_spec(), z.d.phi).amplitudes.cwiseAbs2();
  const Terms exact = eval_terms_exact(ctx, psi, pmf);
  for (bool joint : {false, true}) {
    SamplingConfig cfg;
    cfg.shots = 50;
    cfg.joint = joint;
    SeedStream seeds(joint ? 77 : 78);
    const int reps = 2000;
    std::vector<double> f0(reps), f(reps), g(reps);
    for (int r = 0; r < reps; ++r) {
      f0[r] = eval_F0_sampled(ctx, psi, cfg, seeds);
      f[r] = eval_F_sampled(ctx, psi, pmf, cfg, seeds);
      g[r] = eval_G_sampled(ctx, pmf, cfg, seeds);
    }
    auto within = [&](const std::vector<double>& x, double target) {
      double mean = 0.0, var = 0.0;
      for (double v : x) mean += v;
      mean /= reps;
      for (double v : x) var += (v - mean) * (v - mean);
      var /= reps - 1;
      return std::abs(mean - target) <= 5.0 * std::sqrt(var / reps) + 1e-12;
    };
    CHECK(within(f0, exact.f0));
    CHECK(within(f, exact.f));
    CHECK(within(g, exact.g));
  }
}

TEST_CASE("sampled gradient is unbiased entrywise") {
  std::mt19937_64 rng(11);
  LagrangianContext ctx = random_context(1, 2, rng, 2, 2, 1);
  const Point z = random_point(ctx, rng);
  const RVector exact = stack_operator(grad(ctx, z.p, z.d));
  SamplingConfig cfg;
  cfg.shots = 20;
  const int reps = 1000;
  std::vector<RVector> draws;
  for (int r = 0; r < reps; ++r)
    draws.push_back(stack_operator(grad(ctx, z.p, z.d, EvalMode::sampled_with(cfg, derive_seed(3, r)))));
  for (int i = 0; i < exact.size(); ++i) {
    double mean = 0.0, var = 0.0;
    for (const auto& d : draws) mean += d[i];
    mean /= reps;
    for (const auto& d : draws) var += (d[i] - mean) * (d[i] - mean);
    var /= reps - 1;
    CAPTURE(i);
    CHECK(std::abs(mean - exact[i]) <= 5.0 * std::sqrt(var / reps) + 1e-12);
  }
  const Gradient one = grad(ctx, z.p, z.d, EvalMode::sampled_with(cfg, 1));
  CHECK(one.shots > 0);
}

TEST_CASE("context rejects mismatched ansatz sizes") {
  std::mt19937_64 rng(12);
  CHECK_THROWS(LagrangianContext(oracle::random_problem(4, 4, rng), AnsatzSpec::from_table(2, 1, 3),
                                 AnsatzSpec::from_table(2, 1, 2)));
  CHECK_THROWS(LagrangianContext(oracle::random_problem(4, 4, rng), AnsatzSpec::from_table(2, 1, 2),
                                 AnsatzSpec::from_table(2, 1, 1)));
}

}  // TEST_SUITE
