#include "qopf/linalg.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qopf {

double hermitian_residual(const SparseCMatrix& m) {
  const SparseCMatrix diff = SparseCMatrix(m - SparseCMatrix(m.adjoint()));
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseCMatrix::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

double hermitian_residual(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double spectral_norm(const SparseCMatrix& m, double rel_tol, int max_iters) {
  if (m.rows() == 0 || m.nonZeros() == 0) return 0.0;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  CVector x(m.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = cplx(normal(rng), normal(rng));
  x.normalize();

  // Power iteration on M^2 avoids the +-lambda oscillation of an indefinite M.
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    CVector y = m * (m * x);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    const double next = std::sqrt(ny);
    x = y / ny;
    if (it > 0 && std::abs(next - estimate) <= rel_tol * next) return next;
    estimate = next;
  }
  return estimate;
}

std::size_t next_pow2(std::size_t n, std::size_t floor) {
  std::size_t p = 1;
  while (p < n || p < floor) p <<= 1;
  return p;
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
  if (!is_pow2(n)) throw std::invalid_argument("dimension " + std::to_string(n) + " is not a power of two");
  int q = 0;
  while ((std::size_t{1} << q) < n) ++q;
  return q;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace qopf
