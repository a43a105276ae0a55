#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "qopf/statevector.hpp"

using namespace qopf;

namespace {

constexpr double kPi = std::numbers::pi;

// rotation letters per architecture, 'C' for a linear CX chain
const char* kTable[8] = {"xC", "yC", "zC", "xCyC", "xCzC", "yCzC", "xCyCzC", "xyzC"};

CVector dense_ansatz(int row, int layers, int nq, const RVector& params) {
  CVector psi = CVector::Zero(1 << nq);
  psi[0] = 1.0;
  int k = 0;
  for (int l = 0; l < layers; ++l)
    for (const char* s = kTable[row - 1]; *s; ++s) {
      if (*s == 'C') {
        for (int q = 0; q + 1 < nq; ++q) psi = oracle::cx_matrix(q, q + 1, nq) * psi;
        continue;
      }
      for (int q = 0; q < nq; ++q) {
        const double t = params[k++];
        const CMatrix g = *s == 'x' ? oracle::rx(t) : *s == 'y' ? oracle::ry(t) : oracle::rz(t);
        psi = oracle::on_qubit(g, q, nq) * psi;
      }
    }
  return psi;
}

RVector random_params(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  RVector p(n);
  for (auto& x : p) x = u(rng);
  return p;
}

QuantumState from(const CVector& v) {
  QuantumState s;
  s.n_qubits = log2_exact(v.size());
  s.amplitudes = v;
  return s;
}

}  // namespace

TEST_SUITE("statevector") {

TEST_CASE("single gates") {
  QuantumState s = QuantumState::zero(1);
  s = apply_gate(s, {GateKind::Ry, 0, -1, kPi});
  CHECK(std::abs(s.amplitudes[0]) < 1e-15);
  CHECK(std::abs(s.amplitudes[1] - 1.0) < 1e-15);

  QuantumState two = QuantumState::zero(2);
  two = apply_gate(two, {GateKind::X, 0});
  CHECK(two.amplitudes[1] == cplx(1.0, 0.0));  // |01>: qubit 0 is the low bit

  std::mt19937_64 rng(1);
  const CVector v = oracle::random_state(8, rng);
  QuantumState r = from(v);
  apply_gate_inplace(r, {GateKind::H, 1});
  apply_gate_inplace(r, {GateKind::H, 1});
  CHECK((r.amplitudes - v).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS(apply_gate(QuantumState::zero(2), {GateKind::X, 2}));
  CHECK_THROWS(apply_gate(QuantumState::zero(2), {GateKind::CX, 1, 1}));
}

TEST_CASE("gates agree with dense matrices") {
  std::mt19937_64 rng(2);
  const int nq = 3;
  for (int trial = 0; trial < 10; ++trial) {
    const CVector v = oracle::random_state(8, rng);
    const double t = std::uniform_real_distribution<double>(-4, 4)(rng);
    CMatrix h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    CMatrix s(2, 2);
    s << 1, 0, 0, cplx(0, 1);
    CMatrix x(2, 2);
    x << 0, 1, 1, 0;
    const std::pair<GateOp, CMatrix> cases[] = {
        {{GateKind::Rx, 0, -1, t}, oracle::on_qubit(oracle::rx(t), 0, nq)},
        {{GateKind::Ry, 1, -1, t}, oracle::on_qubit(oracle::ry(t), 1, nq)},
        {{GateKind::Rz, 2, -1, t}, oracle::on_qubit(oracle::rz(t), 2, nq)},
        {{GateKind::H, 2}, oracle::on_qubit(h, 2, nq)},
        {{GateKind::S, 0}, oracle::on_qubit(s, 0, nq)},
        {{GateKind::X, 1}, oracle::on_qubit(x, 1, nq)},
        {{GateKind::CX, 0, 2}, oracle::cx_matrix(2, 0, nq)},
        {{GateKind::CX, 2, 1}, oracle::cx_matrix(1, 2, nq)},
    };
    for (const auto& [g, m] : cases) {
      const QuantumState out = apply_gate(from(v), g);
      CHECK((out.amplitudes - m * v).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("norm is preserved along long random circuits") {
  std::mt19937_64 rng(3);
  QuantumState s = QuantumState::zero(4);
  std::uniform_int_distribution<int> kind(0, 6), qubit(0, 3);
  std::uniform_real_distribution<double> ang(-7, 7);
  for (int k = 0; k < 2000; ++k) {
    GateOp g{static_cast<GateKind>(kind(rng)), qubit(rng), -1, ang(rng)};
    if (g.kind == GateKind::CX) g.control = (g.target + 1 + qubit(rng) % 3) % 4;
    apply_gate_inplace(s, g);
  }
  CHECK(std::abs(s.amplitudes.norm() - 1.0) < 1e-10);
}

TEST_CASE("ansatz parameter counts") {
  CHECK(AnsatzSpec::from_table(2, 20, 6).param_count() == 120);
  CHECK(AnsatzSpec::from_table(6, 10, 6).param_count() == 120);
  CHECK(AnsatzSpec::from_table(2, 35, 9).param_count() == 315);
  CHECK(AnsatzSpec::from_table(7, 1, 3).param_count() == 9);
  CHECK(AnsatzSpec::from_table(8, 2, 2).param_count() == 12);
  CHECK_THROWS(AnsatzSpec::from_table(9, 1, 1));
}

TEST_CASE("zero parameters on Ry-CX leave |0...0>") {
  const AnsatzSpec spec = AnsatzSpec::from_table(2, 3, 4);
  const QuantumState s = prepare(spec, RVector::Zero(spec.param_count()));
  CHECK(s.amplitudes[0] == cplx(1.0, 0.0));
  CHECK(s.amplitudes.tail(15).norm() == 0.0);
  CHECK_THROWS(prepare(spec, RVector::Zero(3)));
}

TEST_CASE("every architecture matches a dense construction") {
  std::mt19937_64 rng(4);
  for (int row = 1; row <= 8; ++row)
    for (int nq : {1, 2, 3}) {
      const AnsatzSpec spec = AnsatzSpec::from_table(row, 2, nq);
      const RVector p = random_params(spec.param_count(), rng);
      const QuantumState s = prepare(spec, p);
      CAPTURE(row);
      CHECK((s.amplitudes - dense_ansatz(row, 2, nq, p)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("exact expectation") {
  const QuantumState zero = QuantumState::zero(1);
  CMatrix z(2, 2);
  z << 1, 0, 0, -1;
  CHECK(exact_expectation(zero, z) == 1.0);

  std::mt19937_64 rng(5);
  const QuantumState s = from(oracle::random_state(8, rng));
  CHECK(exact_expectation(s, CMatrix(CMatrix::Identity(8, 8))) == doctest::Approx(1.0).epsilon(1e-14));
  for (int k = 0; k < 10; ++k) {
    const CMatrix m = oracle::random_hermitian(8, rng);
    const double oracle_value = oracle::double_loop(s.amplitudes, m).real();
    CHECK(std::abs(exact_expectation(s, m) - oracle_value) < 1e-12);
    CHECK(std::abs(exact_expectation(s, oracle::sparse(m)) - oracle_value) < 1e-12);
  }
  CMatrix bad = oracle::random_hermitian(8, rng);
  bad(0, 1) += 1e-6;
  CHECK_THROWS_AS(exact_expectation(s, bad), std::invalid_argument);
  CHECK_THROWS_AS(exact_expectation(s, CMatrix(CMatrix::Identity(4, 4))), std::invalid_argument);
}

TEST_CASE("basis sampling") {
  QuantumState one = QuantumState::zero(1);
  apply_gate_inplace(one, {GateKind::X, 0});
  const auto c1 = sample_basis(one, 100, 1);
  CHECK(c1[0] == 0);
  CHECK(c1[1] == 100);

  QuantumState plus = QuantumState::zero(1);
  apply_gate_inplace(plus, {GateKind::H, 0});
  const auto c = sample_basis(plus, 10000, 7);
  CHECK(c[0] + c[1] == 10000);
  CHECK(std::abs(c[0] / 1e4 - 0.5) <= 0.02);
  CHECK(sample_basis(plus, 10000, 7) == c);
}

TEST_CASE("diagonal observable estimated from samples is unbiased") {
  std::mt19937_64 rng(6);
  const QuantumState s = from(oracle::random_state(8, rng));
  RVector d(8);
  for (auto& x : d) x = std::normal_distribution<double>()(rng);
  const RVector prob = s.amplitudes.cwiseAbs2();
  const double mean = prob.dot(d);
  const double var = prob.dot(d.cwiseAbs2()) - mean * mean;
  const std::int64_t shots = 100000;
  const auto counts = sample_basis(s, shots, 99);
  double est = 0.0;
  for (int i = 0; i < 8; ++i) est += counts[i] * d[i];
  est /= shots;
  CHECK(std::abs(est - mean) <= 5.0 * std::sqrt(var / shots));
}

TEST_CASE("shift points") {
  RVector p(1);
  p << 0.0;
  const auto [plus, minus] = shift_points(p, 0);
  CHECK(plus[0] == kPi / 2);
  CHECK(minus[0] == -kPi / 2);
  CHECK_THROWS(shift_points(p, 1));
}

TEST_CASE("parameter shift equals central differences on every architecture") {
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int row = 1; row <= 8; ++row) {
    const AnsatzSpec spec = AnsatzSpec::from_table(row, 2, 2);
    const CMatrix m = oracle::random_hermitian(4, rng);
    const RVector p = random_params(spec.param_count(), rng);
    auto f = [&](const RVector& x) { return oracle::double_loop(prepare(spec, x).amplitudes, m).real(); };
    for (int i = 0; i < p.size(); ++i) {
      const auto [a, b] = shift_points(p, i);
      const double psr = 0.5 * (f(a) - f(b));
      RVector hp = p, hm = p;
      hp[i] += 1e-5;
      hm[i] -= 1e-5;
      worst = std::max(worst, std::abs(psr - (f(hp) - f(hm)) / 2e-5));
    }
  }
  CHECK(worst < 1e-6);
}

}  // TEST_SUITE
