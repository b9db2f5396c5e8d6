#pragma once

#include <functional>

#include <Eigen/Dense>

namespace holoreg {

/// Matrix-free linear operator: out = A * in. The vectors are pre-sized.
using ApplyFn = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

struct ExpmvOptions {
  double tol = 1e-13;   // local error per substep, relative to the vector norm
  int krylov_dim = 36;  // Arnoldi subspace size
  int max_substeps = 1000000;
};

struct ExpmvStats {
  long matvecs = 0;
  long substeps = 0;
};

/// w = exp(t A) v for a general (possibly non-normal, non-Hermitian) operator
/// given as a matvec. Restarted Arnoldi with adaptive substepping; the local
/// error is controlled through the generalized-residual estimate.
Eigen::VectorXcd expmv(const ApplyFn& apply, double t, const Eigen::VectorXcd& v,
                       const ExpmvOptions& opts = {}, ExpmvStats* stats = nullptr);

/// Dense matrix exponential of a small complex matrix.
Eigen::MatrixXcd dense_exp(const Eigen::MatrixXcd& a);

}  // namespace holoreg
