#pragma once

#include <string>
#include <vector>

#include "qopf/case.hpp"
#include "qopf/linalg.hpp"

namespace qopf {

enum class ConstraintKind { balance_p, balance_q, gen_p, gen_q, voltage, reference, line_current, padding };

std::string to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(const std::string& s);

struct ConstraintLabel {
  ConstraintKind kind = ConstraintKind::padding;
  int node = -1;       ///< bus of the row, or branch `from`
  int other = -1;      ///< branch `to` for line rows
  bool lower = false;  ///< negated half of a two-sided bound
  double scale = 1.0;  ///< divisor turning a violation into a normalized one
};

/// v^H M v <= bound.
struct Constraint {
  SparseCMatrix matrix;
  double bound = 0.0;
  ConstraintLabel label;
};

struct QcqpProblem {
  std::string name;
  int n = 0;    ///< grid nodes before padding
  int dim = 0;  ///< current primal dimension
  SparseCMatrix m0;
  double objective_offset = 0.0;  ///< sum of c_n p^d_n dropped from v^H M0 v
  std::vector<Constraint> constraints;
  /// node_index[k] is the entry of v that holds grid node k (identity until permuted).
  std::vector<int> node_index;

  int size() const { return static_cast<int>(constraints.size()); }
  int real_constraints() const;
};

/// Substitute generator injections into the cost and split every two-sided
/// relation into "<=" rows. Row order: load balance (p up/low, q up/low) per
/// load bus, generator p/q limits per generator bus, voltage per bus,
/// reference, line current per branch.
QcqpProblem assemble_qcqp(const NetworkCase& c);

/// Zero-pad the primal dimension and append inert rows up to powers of two.
QcqpProblem pad_to_qubits(const QcqpProblem& p);

/// v^H M0 v + sum_m lambda_m (v^H M_m v - b_m). lambda may be shorter than the
/// constraint list; missing entries count as zero.
double classical_lagrangian(const QcqpProblem& p, const CVector& v, const RVector& lambda);

/// Generation cost of a voltage vector, offset included.
double objective_cost(const QcqpProblem& p, const CVector& v);

/// Throws ValidationError unless every matrix is square of size dim and Hermitian to `tol`.
void check_problem(const QcqpProblem& p, double tol = 1e-12);

/// Serialized as JSON; matrices are lists of [row, col, re, im].
std::string problem_to_json(const QcqpProblem& p);
QcqpProblem problem_from_json(const std::string& text);

}  // namespace qopf
