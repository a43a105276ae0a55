#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qopf {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using SparseCMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<cplx>;

/// v^H M v. Imaginary round-off is discarded; callers pass Hermitian M.
inline double quadratic_form(const SparseCMatrix& m, const CVector& v) {
  return v.dot(m * v).real();
}

/// max |M - M^H| over entries.
double hermitian_residual(const SparseCMatrix& m);
double hermitian_residual(const CMatrix& m);

/// Largest eigenvalue magnitude of a Hermitian matrix by power iteration on M^2.
double spectral_norm(const SparseCMatrix& m, double rel_tol = 1e-8, int max_iters = 10000);

/// Smallest power of two >= n, never below `floor`.
std::size_t next_pow2(std::size_t n, std::size_t floor = 2);
int log2_exact(std::size_t n);
bool is_pow2(std::size_t n);

/// SplitMix64 finaliser used to derive independent per-stream seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace qopf
