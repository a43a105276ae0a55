#include "qopf/permutation.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>

#include "qopf/errors.hpp"

namespace qopf {

void SparsityPattern::add(int i, int j) {
  if (i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("pattern entry out of range");
  entries.emplace_back(i, j);
  if (i != j) entries.emplace_back(j, i);
}

void SparsityPattern::finalize() {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
}

bool SparsityPattern::contains(int i, int j) const {
  return std::binary_search(entries.begin(), entries.end(), std::make_pair(i, j));
}

SparsityPattern pattern_of(const SparseCMatrix& m) {
  SparsityPattern p(static_cast<int>(m.rows()));
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseCMatrix::InnerIterator it(m, k); it; ++it)
      if (it.value() != cplx(0.0, 0.0)) p.add(static_cast<int>(it.row()), static_cast<int>(it.col()));
  p.finalize();
  return p;
}

SparsityPattern union_pattern(const QcqpProblem& problem) {
  SparsityPattern p(problem.dim);
  auto absorb = [&](const SparseCMatrix& m) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseCMatrix::InnerIterator it(m, k); it; ++it)
        if (it.value() != cplx(0.0, 0.0)) p.add(static_cast<int>(it.row()), static_cast<int>(it.col()));
  };
  absorb(problem.m0);
  for (const auto& c : problem.constraints) absorb(c.matrix);
  p.finalize();
  return p;
}

int bandwidth(const SparsityPattern& p) {
  int bw = 0;
  for (const auto& [i, j] : p.entries) bw = std::max(bw, std::abs(i - j));
  return bw;
}

std::set<int> color_set(const SparsityPattern& p) {
  if (!is_pow2(static_cast<std::size_t>(p.n)))
    throw std::invalid_argument("color_set needs a power-of-two dimension, got " + std::to_string(p.n));
  std::set<int> colors;
  for (const auto& [i, j] : p.entries) colors.insert(i ^ j);
  return colors;
}

NodePermutation NodePermutation::identity(int n) {
  NodePermutation p;
  p.forward.resize(n);
  for (int i = 0; i < n; ++i) p.forward[i] = i;
  p.inverse = p.forward;
  return p;
}

NodePermutation NodePermutation::from_forward(std::vector<int> forward) {
  const int n = static_cast<int>(forward.size());
  NodePermutation p;
  p.inverse.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const int f = forward[i];
    if (f < 0 || f >= n || p.inverse[f] != -1) throw std::invalid_argument("permutation is not a bijection");
    p.inverse[f] = i;
  }
  p.forward = std::move(forward);
  return p;
}

SparsityPattern permute_pattern(const SparsityPattern& p, const NodePermutation& perm) {
  if (perm.size() != p.n) throw std::invalid_argument("permutation length does not match pattern");
  SparsityPattern out(p.n);
  out.entries.reserve(p.entries.size());
  for (const auto& [i, j] : p.entries) out.entries.emplace_back(perm.forward[i], perm.forward[j]);
  out.finalize();
  return out;
}

namespace {

std::vector<std::vector<int>> adjacency(const SparsityPattern& p) {
  std::vector<std::vector<int>> adj(p.n);
  for (const auto& [i, j] : p.entries)
    if (i != j) adj[i].push_back(j);
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

NodePermutation rcm_from_adjacency(const std::vector<std::vector<int>>& adj, int start) {
  const int n = static_cast<int>(adj.size());
  if (start < 0 || start >= n) throw std::out_of_range("RCM start node out of range");
  std::vector<char> seen(n, 0);
  std::vector<int> order;
  order.reserve(n);
  std::deque<int> queue{start};
  seen[start] = 1;
  std::vector<int> next;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    order.push_back(u);
    next.clear();
    for (int w : adj[u])
      if (!seen[w]) next.push_back(w);
    std::sort(next.begin(), next.end(), [&](int a, int b) {
      if (adj[a].size() != adj[b].size()) return adj[a].size() < adj[b].size();
      return a < b;
    });
    for (int w : next) {
      seen[w] = 1;
      queue.push_back(w);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw ValidationError("pattern is disconnected: node " + std::to_string(i) + " unreached");
  std::reverse(order.begin(), order.end());
  std::vector<int> forward(n);
  for (int pos = 0; pos < n; ++pos) forward[order[pos]] = pos;
  return NodePermutation::from_forward(std::move(forward));
}

int permuted_bandwidth(const SparsityPattern& p, const NodePermutation& perm) {
  int bw = 0;
  for (const auto& [i, j] : p.entries) bw = std::max(bw, std::abs(perm.forward[i] - perm.forward[j]));
  return bw;
}

}  // namespace

NodePermutation rcm_order(const SparsityPattern& p, int start) { return rcm_from_adjacency(adjacency(p), start); }

int rcm_start(int n, std::uint64_t seed, int run) {
  std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(run)));
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

NodePermutation best_rcm(const SparsityPattern& p, int runs, std::uint64_t seed) {
  if (runs < 1) throw std::invalid_argument("best_rcm needs at least one run");
  const auto adj = adjacency(p);
  NodePermutation best;
  int best_bw = -1;
  for (int r = 0; r < runs; ++r) {
    NodePermutation cand = rcm_from_adjacency(adj, rcm_start(p.n, seed, r));
    const int bw = permuted_bandwidth(p, cand);
    if (best_bw < 0 || bw < best_bw) {
      best_bw = bw;
      best = std::move(cand);
    }
  }
  return best;
}

NodePermutation extend_permutation(const NodePermutation& perm, int dim) {
  if (dim < perm.size()) throw std::invalid_argument("cannot shrink a permutation");
  std::vector<int> forward = perm.forward;
  for (int i = perm.size(); i < dim; ++i) forward.push_back(i);
  return NodePermutation::from_forward(std::move(forward));
}

namespace {

SparseCMatrix conjugate(const SparseCMatrix& m, const NodePermutation& perm) {
  std::vector<Triplet> t;
  t.reserve(m.nonZeros());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseCMatrix::InnerIterator it(m, k); it; ++it)
      t.emplace_back(perm.forward[it.row()], perm.forward[it.col()], it.value());
  SparseCMatrix out(m.rows(), m.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

QcqpProblem permute_problem(const QcqpProblem& p, const NodePermutation& perm) {
  if (perm.size() != p.dim)
    throw std::invalid_argument("permutation length " + std::to_string(perm.size()) + " does not match dimension " +
                                std::to_string(p.dim));
  QcqpProblem out = p;
  out.m0 = conjugate(p.m0, perm);
  for (auto& c : out.constraints) c.matrix = conjugate(c.matrix, perm);
  for (auto& idx : out.node_index) idx = perm.forward[idx];
  return out;
}

CVector permute_vector(const CVector& v, const NodePermutation& perm) {
  if (v.size() != perm.size()) throw std::invalid_argument("vector length does not match permutation");
  CVector w(v.size());
  for (int i = 0; i < perm.size(); ++i) w[perm.forward[i]] = v[i];
  return w;
}

CVector unpermute_vector(const CVector& w, const NodePermutation& perm) {
  if (w.size() != perm.size()) throw std::invalid_argument("vector length does not match permutation");
  CVector v(w.size());
  for (int i = 0; i < perm.size(); ++i) v[i] = w[perm.forward[i]];
  return v;
}

std::set<long> measurement_color_set(const QcqpProblem& p) {
  std::set<long> out;
  const long n = p.n;
  long block = 0;
  for (const auto& row : p.constraints) {
    if (row.label.kind == ConstraintKind::padding) continue;
    const long offset = block++ * n;
    for (int k = 0; k < row.matrix.outerSize(); ++k)
      for (SparseCMatrix::InnerIterator it(row.matrix, k); it; ++it) {
        if (it.row() >= n || it.col() >= n) throw ValidationError("measurement colors: entry outside the grid block");
        out.insert((offset + it.row()) ^ (offset + it.col()));
      }
  }
  return out;
}

}  // namespace qopf
