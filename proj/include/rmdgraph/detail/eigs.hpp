#pragma once

#include <Eigen/Dense>
#include <cstdlib>
#include <lapacke.h>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rmdgraph::detail {

// Output must not depend on how many BLAS worker threads happen to run, so
// pin the backend to one unless the user already chose a count.
inline const bool blas_threads_pinned = [] {
  setenv("OPENBLAS_NUM_THREADS", "1", 0);
  setenv("OMP_NUM_THREADS", "1", 0);
  return true;
}();

/// K smallest eigenpairs of a dense symmetric matrix (LAPACK dsyevr,
/// index range). Eigenvalues come back ascending; each eigenvector is
/// normalized with its first nonzero-magnitude entry made positive so the
/// result is a deterministic function of the input matrix.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> smallest_eigenpairs(
    const Eigen::MatrixXd& sym, int K) {
  const int n = static_cast<int>(sym.rows());
  if (K < 1 || K > n) throw std::invalid_argument("eigenpair count out of range");
  Eigen::MatrixXd work = sym;        // dsyevr destroys its input
  Eigen::VectorXd all_values(n);     // dsyevr's W wants room for n values
  Eigen::MatrixXd vectors(n, K);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(K));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', n, work.data(), n, 0.0, 0.0, 1, K,
      0.0, &found, all_values.data(), vectors.data(), n, isuppz.data());
  Eigen::VectorXd values = all_values.head(K);
  if (info != 0 || found != K) {
    // Rare convergence failure; fall back to the full decomposition.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("symmetric eigendecomposition failed");
    }
    values = es.eigenvalues().head(K);
    vectors = es.eigenvectors().leftCols(K);
  }
  for (int c = 0; c < K; ++c) {
    for (int r = 0; r < n; ++r) {
      const double v = vectors(r, c);
      if (v > 1e-12) break;
      if (v < -1e-12) {
        vectors.col(c) = -vectors.col(c);
        break;
      }
    }
  }
  return {std::move(values), std::move(vectors)};
}

}  // namespace rmdgraph::detail
