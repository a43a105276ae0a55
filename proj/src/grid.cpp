#include "qopf/grid.hpp"

#include <stdexcept>
#include <string>

namespace qopf {

SparseCMatrix build_admittance(const NetworkCase& c) {
  const int n = static_cast<int>(c.size());
  std::vector<Triplet> t;
  t.reserve(4 * c.branches.size());
  for (const auto& br : c.branches) {
    const cplx y(br.g_series, br.b_series);
    t.emplace_back(br.from, br.from, y);
    t.emplace_back(br.to, br.to, y);
    t.emplace_back(br.from, br.to, -y);
    t.emplace_back(br.to, br.from, -y);
  }
  SparseCMatrix out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

InjectionMatrices injection_matrices(const SparseCMatrix& y, int node) {
  const int n = static_cast<int>(y.rows());
  if (node < 0 || node >= n) throw std::out_of_range("node " + std::to_string(node) + " out of range");
  // e e^T Y keeps row `node` of Y; Y^H e e^T is its adjoint (a column).
  std::vector<Triplet> tp, tq;
  const cplx half(0.5, 0.0);
  const cplx inv2i(0.0, -0.5);  // 1/(2i)
  for (SparseCMatrix::InnerIterator it(y, node); it; ++it) {
    const int col = static_cast<int>(it.col());
    const cplx row_entry = it.value();             // (e e^T Y)[node][col]
    const cplx col_entry = std::conj(it.value());  // (Y^H e e^T)[col][node]
    tp.emplace_back(node, col, half * row_entry);
    tp.emplace_back(col, node, half * col_entry);
    tq.emplace_back(node, col, -inv2i * row_entry);
    tq.emplace_back(col, node, inv2i * col_entry);
  }
  InjectionMatrices out{SparseCMatrix(n, n), SparseCMatrix(n, n)};
  out.p.setFromTriplets(tp.begin(), tp.end());
  out.q.setFromTriplets(tq.begin(), tq.end());
  out.p.prune(cplx(0.0, 0.0));
  out.q.prune(cplx(0.0, 0.0));
  return out;
}

InjectionMatrices injection_matrices(const NetworkCase& c, int node) {
  return injection_matrices(build_admittance(c), node);
}

AuxiliaryMatrices auxiliary_matrices(const NetworkCase& c) {
  const int n = static_cast<int>(c.size());
  AuxiliaryMatrices out;
  for (int k = 0; k < n; ++k) {
    SparseCMatrix m(n, n);
    m.insert(k, k) = 1.0;
    m.makeCompressed();
    out.voltage.push_back(std::move(m));
  }
  for (const auto& br : c.branches) {
    const double mag = std::abs(cplx(br.g_series, br.b_series));
    std::vector<Triplet> t{{br.from, br.from, mag}, {br.to, br.to, mag}, {br.from, br.to, -mag}, {br.to, br.from, -mag}};
    SparseCMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    out.line.push_back(std::move(m));
  }
  out.reference = SparseCMatrix(n, n);
  out.reference.insert(c.reference_bus, c.reference_bus) = 1.0;
  out.reference.makeCompressed();
  return out;
}

}  // namespace qopf
