#include <doctest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "qopf/errors.hpp"
#include "qopf/grid.hpp"
#include "qopf/harness.hpp"
#include "qopf/permutation.hpp"
#include "qopf/qcqp.hpp"

using namespace qopf;

namespace {

const char* kTwoBus = R"(NAME tiny
BUS
1 gen  0   0    0.9 1.1
2 load 0.5 0.165 0.9 1.1
BRANCH
1 2 1 -2 4
GEN
1 0 2 -2 2
COST
1 1
)";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double herm_residual(const SparseCMatrix& m) {
  const CMatrix d = oracle::dense(m);
  return (d - d.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("grid_model") {

TEST_CASE("two-bus case parses with one generator, one load and one line") {
  const NetworkCase c = parse_case(kTwoBus);
  CHECK(c.name == "tiny");
  CHECK(c.size() == 2);
  CHECK(c.generator_buses().size() == 1);
  CHECK(c.load_buses().size() == 1);
  CHECK(c.branches.size() == 1);
  CHECK(c.buses[1].p_demand == 0.5);
  CHECK(c.buses[1].q_demand == 0.165);
  CHECK(c.reference_bus == 0);
}

TEST_CASE("IEEE 57 case has 57 buses") {
  const NetworkCase c = load_case(oracle::data_path("ieee57.case"));
  CHECK(c.size() == 57);
  CHECK(c.generators.size() == 7);
  CHECK(c.branches.size() == 78);
}

TEST_CASE("malformed input is rejected") {
  SUBCASE("self loop") {
    std::string t = kTwoBus;
    t.replace(t.find("1 2 1 -2 4"), 10, "2 2 1 -2 4");
    CHECK_THROWS_AS(parse_case(t), ValidationError);
  }
  SUBCASE("duplicate undirected edge") {
    std::string t = kTwoBus;
    t.replace(t.find("GEN"), 3, "2 1 1 -2 4\nGEN");
    CHECK_THROWS_AS(parse_case(t), ValidationError);
  }
  SUBCASE("disconnected grid") {
    std::string t = kTwoBus;
    t.replace(t.find("BRANCH"), 6, "3 load 0.1 0 0.9 1.1\nBRANCH");
    CHECK_THROWS_WITH_AS(parse_case(t), doctest::Contains("bus 3"), ValidationError);
  }
  SUBCASE("bad number carries its line") {
    std::string t = kTwoBus;
    t.replace(t.find("0.165"), 5, "0.1x5");
    try {
      parse_case(t);
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("quadratic cost") {
    std::string t = kTwoBus;
    t.replace(t.rfind("1 1"), 3, "1 1 0.2");
    CHECK_THROWS_WITH_AS(parse_case(t), doctest::Contains("quadratic"), ParseError);
  }
  SUBCASE("generator on a load bus") {
    std::string t = kTwoBus;
    t += "GEN\n2 0 1 -1 1\nCOST\n2 1\n";
    CHECK_THROWS(parse_case(t));
  }
  SUBCASE("nonpositive v_min") {
    std::string t = kTwoBus;
    t.replace(t.find("0.9 1.1"), 7, "0.0 1.1");
    CHECK_THROWS_AS(parse_case(t), ValidationError);
  }
}

TEST_CASE("write then parse is bit exact") {
  const NetworkCase a = load_case(oracle::data_path("ieee57.case"));
  const NetworkCase b = parse_case(write_case(a), a.name);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.buses[i].p_demand == b.buses[i].p_demand);
    CHECK(a.buses[i].q_demand == b.buses[i].q_demand);
    CHECK(a.buses[i].v_min == b.buses[i].v_min);
    CHECK(a.buses[i].v_max == b.buses[i].v_max);
  }
  REQUIRE(a.branches.size() == b.branches.size());
  for (std::size_t e = 0; e < a.branches.size(); ++e) {
    CHECK(a.branches[e].g_series == b.branches[e].g_series);
    CHECK(a.branches[e].b_series == b.branches[e].b_series);
    CHECK(a.branches[e].i_max == b.branches[e].i_max);
  }
  REQUIRE(a.generators.size() == b.generators.size());
  for (std::size_t g = 0; g < a.generators.size(); ++g) CHECK(a.generators[g].cost == b.generators[g].cost);
}

TEST_CASE("MATPOWER import of case57") {
  std::vector<std::string> warnings;
  const std::string text = read_file(oracle::data_path("case57.m"));
  CHECK_THROWS_AS(import_matpower(text, {}), ParseError);
  MatpowerImportOptions o;
  o.drop_quadratic_cost = true;
  const NetworkCase c = import_matpower(text, o, &warnings, "case57");
  CHECK(c.size() == 57);
  CHECK(c.branches.size() == 78);
  CHECK(c.generators.size() == 7);
  CHECK_FALSE(warnings.empty());
  const QcqpProblem p = assemble_qcqp(c);
  CHECK(p.size() == 422);
}

TEST_CASE("two-bus admittance") {
  const NetworkCase c = parse_case(kTwoBus);
  const CMatrix y = oracle::dense(build_admittance(c));
  CHECK(std::abs(y(0, 0) - cplx(1, -2)) == 0.0);
  CHECK(std::abs(y(1, 1) - cplx(1, -2)) == 0.0);
  CHECK(std::abs(y(0, 1) - cplx(-1, 2)) == 0.0);
  CHECK(std::abs(y(1, 0) - cplx(-1, 2)) == 0.0);
}

TEST_CASE("IEEE 57 admittance has 2 L_e off-diagonal entries and matches hand assembly") {
  const NetworkCase c = load_case(oracle::data_path("ieee57.case"));
  const CMatrix y = oracle::dense(build_admittance(c));
  int off = 0;
  for (int i = 0; i < y.rows(); ++i)
    for (int j = 0; j < y.cols(); ++j)
      if (i != j && y(i, j) != cplx(0.0, 0.0)) ++off;
  CHECK(off == 2 * static_cast<int>(c.branches.size()));
  CHECK((y - oracle::hand_admittance(c)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("injection matrices reproduce the scalar power-flow sums") {
  const NetworkCase c = load_case(oracle::data_path("ieee57.case"));
  const CMatrix y = oracle::hand_admittance(c);
  std::vector<InjectionMatrices> inj;
  for (int n = 0; n < static_cast<int>(c.size()); ++n) inj.push_back(injection_matrices(c, n));
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const CVector v = oracle::random_vector(static_cast<int>(c.size()), rng);
    for (int n = 0; n < static_cast<int>(c.size()); ++n) {
      const double scale = 1.0 + std::abs(oracle::scalar_p(y, v, n)) + std::abs(oracle::scalar_q(y, v, n));
      worst = std::max(worst, std::abs(quadratic_form(inj[n].p, v) - oracle::scalar_p(y, v, n)) / scale);
      worst = std::max(worst, std::abs(quadratic_form(inj[n].q, v) - oracle::scalar_q(y, v, n)) / scale);
    }
  }
  CHECK(worst < 1e-10);
  for (const auto& m : inj) {
    CHECK(herm_residual(m.p) == 0.0);
    CHECK(herm_residual(m.q) == 0.0);
  }
}

TEST_CASE("two-bus M_p1 entries and flat-voltage row sums") {
  const NetworkCase c = parse_case(kTwoBus);
  const CMatrix y = oracle::hand_admittance(c);
  const CMatrix mp = oracle::dense(injection_matrices(c, 0).p);
  CMatrix e = CMatrix::Zero(2, 2);
  e(0, 0) = 1.0;
  const CMatrix expect = 0.5 * (y.adjoint() * e + e * y);
  CHECK((mp - expect).cwiseAbs().maxCoeff() < 1e-15);

  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const CVector v = oracle::random_vector(2, rng);
    CHECK(oracle::double_loop(v, mp).real() == doctest::Approx(oracle::scalar_p(y, v, 0)).epsilon(1e-12));
  }

  const NetworkCase big = load_case(oracle::data_path("ieee57.case"));
  const CMatrix yb = oracle::hand_admittance(big);
  const CVector flat = CVector::Ones(57);
  for (int n = 0; n < 57; n += 7) {
    double row = 0.0;
    for (int m = 0; m < 57; ++m) row += yb(n, m).real();
    CHECK(quadratic_form(injection_matrices(big, n).p, flat) == doctest::Approx(row).epsilon(1e-12));
  }
  CHECK_THROWS(injection_matrices(c, 2));
}

TEST_CASE("auxiliary matrices") {
  const NetworkCase c = parse_case(kTwoBus);
  const AuxiliaryMatrices aux = auxiliary_matrices(c);
  CMatrix v2 = CMatrix::Zero(2, 2);
  v2(1, 1) = 1.0;
  CHECK(oracle::dense(aux.voltage[1]) == v2);
  CMatrix line(2, 2);
  line << 1.0, -1.0, -1.0, 1.0;
  line *= std::sqrt(5.0);
  CHECK((oracle::dense(aux.line[0]) - line).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(oracle::dense(aux.line[0]).trace().real() == doctest::Approx(2.0 * std::sqrt(5.0)));
  CVector same(2);
  same << cplx(0.3, -0.4), cplx(0.3, -0.4);
  CHECK(std::abs(quadratic_form(aux.line[0], same)) < 1e-15);
  CMatrix ref = CMatrix::Zero(2, 2);
  ref(0, 0) = 1.0;
  CHECK(oracle::dense(aux.reference) == ref);
}

TEST_CASE("IEEE 57 assembles 422 rows, pads to 64 x 512") {
  const NetworkCase c = simplify_case(load_case(oracle::data_path("ieee57.case")), 0.33, true);
  const QcqpProblem p = assemble_qcqp(c);
  CHECK(p.n == 57);
  CHECK(p.size() == 422);
  const QcqpProblem q = pad_to_qubits(p);
  CHECK(q.dim == 64);
  CHECK(q.size() == 512);
  CHECK(q.real_constraints() == 422);
  for (int m = 422; m < 512; ++m) {
    CHECK(q.constraints[m].label.kind == ConstraintKind::padding);
    CHECK(q.constraints[m].matrix.nonZeros() == 0);
    CHECK(q.constraints[m].bound == 0.0);
  }
}

TEST_CASE("every matrix is Hermitian and its pattern lies inside the admittance pattern") {
  const NetworkCase c = load_case(oracle::data_path("ieee57.case"));
  const QcqpProblem p = assemble_qcqp(c);
  const CMatrix y = oracle::hand_admittance(c);
  auto inside = [&](const SparseCMatrix& m) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseCMatrix::InnerIterator it(m, k); it; ++it)
        if (it.row() != it.col() && y(it.row(), it.col()) == cplx(0.0, 0.0)) return false;
    return true;
  };
  CHECK(herm_residual(p.m0) <= 1e-12);
  CHECK(inside(p.m0));
  for (const auto& row : p.constraints) {
    CHECK(herm_residual(row.matrix) <= 1e-12);
    CHECK(inside(row.matrix));
    CHECK(std::isfinite(row.bound));
  }
  CHECK_NOTHROW(check_problem(p));
}

TEST_CASE("one load bus gives four balance rows; equalities come in up/low pairs") {
  const QcqpProblem p = assemble_qcqp(parse_case(kTwoBus));
  int balance = 0;
  for (const auto& row : p.constraints)
    if (row.label.kind == ConstraintKind::balance_p || row.label.kind == ConstraintKind::balance_q) ++balance;
  CHECK(balance == 4);
  // the lower half of each pair is the negated upper half
  for (int m = 0; m + 1 < 4; m += 2) {
    CHECK_FALSE(p.constraints[m].label.lower);
    CHECK(p.constraints[m + 1].label.lower);
    CHECK((oracle::dense(p.constraints[m].matrix) + oracle::dense(p.constraints[m + 1].matrix)).norm() == 0.0);
    CHECK(p.constraints[m].bound == -p.constraints[m + 1].bound);
  }
}

TEST_CASE("cost matrix is the cost-weighted sum of generator injections") {
  const NetworkCase c = load_case(oracle::data_path("ieee57.case"));
  const QcqpProblem p = assemble_qcqp(c);
  const CMatrix y = oracle::hand_admittance(c);
  std::mt19937_64 rng(5);
  const CVector v = oracle::random_vector(57, rng);
  double cost = 0.0, offset = 0.0;
  for (const auto& g : c.generators) {
    cost += g.cost * oracle::scalar_p(y, v, g.bus);
    offset += g.cost * c.buses[g.bus].p_demand;
  }
  CHECK(quadratic_form(p.m0, v) == doctest::Approx(cost).epsilon(1e-10));
  CHECK(p.objective_offset == doctest::Approx(offset));
}

TEST_CASE("padding is inert in the Lagrangian") {
  const NetworkCase c = load_case(oracle::data_path("ieee57.case"));
  const QcqpProblem p = assemble_qcqp(c);
  const QcqpProblem q = pad_to_qubits(p);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 10; ++k) {
    const CVector v = oracle::random_vector(57, rng);
    RVector lambda(422);
    for (auto& l : lambda) l = u(rng);
    CVector vz = CVector::Zero(64);
    vz.head(57) = v;
    RVector lz = RVector::Zero(512);
    lz.head(422) = lambda;
    for (int m = 422; m < 512; ++m) lz[m] = u(rng);  // padded multipliers have no effect either
    CHECK(classical_lagrangian(q, vz, lz) == classical_lagrangian(p, v, lambda));
  }
}

TEST_CASE("power-of-two problems are left unchanged by padding") {
  std::mt19937_64 rng(1);
  const QcqpProblem p = oracle::random_problem(4, 8, rng);
  const QcqpProblem q = pad_to_qubits(p);
  CHECK(q.dim == 4);
  CHECK(q.size() == 8);
  CHECK(oracle::dense(q.m0) == oracle::dense(p.m0));
}

TEST_CASE("all split rows hold at a reference optimum") {
  const NetworkCase c = load_case(oracle::data_path("two_bus.case"));
  const InstanceReference ref = brute_force_reference(c);
  const QcqpProblem p = assemble_qcqp(c);
  CVector v(2);
  v << ref.v[0], ref.v[1];
  for (const auto& row : p.constraints) CHECK(quadratic_form(row.matrix, v) - row.bound <= 1e-8);
}

TEST_CASE("problem JSON round trip") {
  const QcqpProblem p = pad_to_qubits(assemble_qcqp(load_case(oracle::data_path("two_bus.case"))));
  const QcqpProblem q = problem_from_json(problem_to_json(p));
  CHECK(q.n == p.n);
  CHECK(q.dim == p.dim);
  CHECK(q.objective_offset == p.objective_offset);
  REQUIRE(q.size() == p.size());
  CHECK(oracle::dense(q.m0) == oracle::dense(p.m0));
  for (int m = 0; m < p.size(); ++m) {
    CHECK(oracle::dense(q.constraints[m].matrix) == oracle::dense(p.constraints[m].matrix));
    CHECK(q.constraints[m].bound == p.constraints[m].bound);
    CHECK(q.constraints[m].label.kind == p.constraints[m].label.kind);
    CHECK(q.constraints[m].label.lower == p.constraints[m].label.lower);
  }
}

}  // TEST_SUITE
