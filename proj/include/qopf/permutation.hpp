#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "qopf/linalg.hpp"
#include "qopf/qcqp.hpp"

namespace qopf {

/// Symmetric set of (row, col) positions, kept sorted and unique.
struct SparsityPattern {
  int n = 0;
  std::vector<std::pair<int, int>> entries;

  SparsityPattern() = default;
  explicit SparsityPattern(int size) : n(size) {}
  /// Adds (i, j) and (j, i).
  void add(int i, int j);
  void finalize();
  bool contains(int i, int j) const;
};

SparsityPattern pattern_of(const SparseCMatrix& m);
/// Union over M0 and every constraint matrix, diagonal included.
SparsityPattern union_pattern(const QcqpProblem& p);

int bandwidth(const SparsityPattern& p);

/// { i XOR j } over entries. Throws std::invalid_argument unless n is a power of two.
std::set<int> color_set(const SparsityPattern& p);

/// Colors of the block-diagonal measurement matrix diag(M_1, ..., M_M) built from the
/// unpadded n x n blocks of every non-padding row: { (m n + i) XOR (m n + j) }.
std::set<long> measurement_color_set(const QcqpProblem& p);

struct NodePermutation {
  std::vector<int> forward;  ///< new index of each old index
  std::vector<int> inverse;  ///< old index at each new position

  static NodePermutation identity(int n);
  /// Throws std::invalid_argument unless `forward` is a bijection on 0..n-1.
  static NodePermutation from_forward(std::vector<int> forward);
  int size() const { return static_cast<int>(forward.size()); }
};

SparsityPattern permute_pattern(const SparsityPattern& p, const NodePermutation& perm);

/// Reverse Cuthill-McKee from `start`; neighbours visited by ascending degree,
/// ties by ascending index. Throws ValidationError naming an unreached node.
NodePermutation rcm_order(const SparsityPattern& p, int start);

/// Start node used by run `run` of best_rcm.
int rcm_start(int n, std::uint64_t seed, int run);

/// Minimum-bandwidth RCM ordering over `runs` random starts; ties keep the earliest run.
NodePermutation best_rcm(const SparsityPattern& p, int runs, std::uint64_t seed);

/// Keep the first perm.size() positions as given and append identity for the rest.
NodePermutation extend_permutation(const NodePermutation& perm, int dim);

/// Conjugate every matrix by P; bounds, labels and row order stay put.
QcqpProblem permute_problem(const QcqpProblem& p, const NodePermutation& perm);

/// w[forward[i]] = v[i], and back.
CVector permute_vector(const CVector& v, const NodePermutation& perm);
CVector unpermute_vector(const CVector& w, const NodePermutation& perm);

}  // namespace qopf
