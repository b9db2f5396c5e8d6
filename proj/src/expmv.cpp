#include "holoreg/expmv.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "holoreg/errors.hpp"

namespace holoreg {

Eigen::MatrixXcd dense_exp(const Eigen::MatrixXcd& a) { return a.exp(); }

namespace {

struct ArnoldiResult {
  Eigen::MatrixXcd basis;       // n x (m_eff)
  Eigen::MatrixXcd hessenberg;  // m_eff x m_eff (upper Hessenberg)
  double next_h = 0.0;          // h_{m+1, m}; 0 on happy breakdown
  int m_eff = 0;
};

ArnoldiResult arnoldi(const ApplyFn& apply, const Eigen::VectorXcd& v0, int m,
                      ExpmvStats* stats) {
  const auto n = v0.size();
  ArnoldiResult res;
  res.basis.resize(n, m);
  res.hessenberg = Eigen::MatrixXcd::Zero(m, m);
  res.basis.col(0) = v0;
  Eigen::VectorXcd w(n);
  for (int j = 0; j < m; ++j) {
    apply(res.basis.col(j), w);
    if (stats) ++stats->matvecs;
    // modified Gram-Schmidt with one reorthogonalization pass
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const std::complex<double> hij = res.basis.col(i).dot(w);
        w -= hij * res.basis.col(i);
        if (pass == 0)
          res.hessenberg(i, j) = hij;
        else
          res.hessenberg(i, j) += hij;
      }
    }
    const double hnext = w.norm();
    res.m_eff = j + 1;
    if (j + 1 < m) {
      if (hnext < 1e-14) {
        res.next_h = 0.0;  // happy breakdown: subspace is invariant
        res.basis.conservativeResize(Eigen::NoChange, res.m_eff);
        res.hessenberg.conservativeResize(res.m_eff, res.m_eff);
        return res;
      }
      res.hessenberg(j + 1, j) = hnext;
      res.basis.col(j + 1) = w / hnext;
    } else {
      res.next_h = hnext;
    }
  }
  return res;
}

}  // namespace

Eigen::VectorXcd expmv(const ApplyFn& apply, double t, const Eigen::VectorXcd& v,
                       const ExpmvOptions& opts, ExpmvStats* stats) {
  Eigen::VectorXcd w = v;
  const double beta0 = w.norm();
  if (beta0 == 0.0 || t == 0.0) return w;

  const int m = std::max(2, std::min<int>(opts.krylov_dim, static_cast<int>(v.size())));
  double remaining = t;
  double tau = t;
  long substeps = 0;

  while (remaining > 0.0) {
    const double beta = w.norm();
    if (beta == 0.0) return w;
    const ArnoldiResult ar = arnoldi(apply, w / beta, m, stats);
    const int me = ar.m_eff;

    if (ar.next_h == 0.0) {
      // invariant subspace: the propagation is exact for any step
      Eigen::MatrixXcd f = dense_exp(remaining * ar.hessenberg.topLeftCorner(me, me));
      w = beta * (ar.basis.leftCols(me) * f.col(0));
      if (stats) stats->substeps = ++substeps;
      return w;
    }

    tau = std::min(tau, remaining);
    Eigen::MatrixXcd f;
    while (true) {
      f = dense_exp(tau * ar.hessenberg);
      // generalized residual of the Krylov approximation
      const double err = std::abs(ar.next_h * tau * f(me - 1, 0));
      if (err <= opts.tol || tau <= remaining * 1e-12) break;
      tau *= 0.5;
      if (++substeps > opts.max_substeps)
        throw SimulationError("expmv failed to converge: too many substeps");
    }
    w = beta * (ar.basis * f.col(0));
    remaining -= tau;
    if (++substeps > opts.max_substeps)
      throw SimulationError("expmv failed to converge: too many substeps");
    const double err_now = std::abs(ar.next_h * tau * f(me - 1, 0));
    if (err_now < 0.01 * opts.tol) tau *= 1.4;  // step-size growth when comfortably accurate
  }
  if (stats) stats->substeps += substeps;
  return w;
}

}  // namespace holoreg
