#ifndef SBWALK_COVARIANCE_HPP
#define SBWALK_COVARIANCE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "sbwalk/errors.hpp"
#include "sbwalk/walk.hpp"

namespace sbwalk {

/// E[exp(X^2/(4Lc))] for X ~ N(0, sigma2): (1 - sigma2/(2Lc))^(-1/2).
/// The moment diverges at sigma2 = 2Lc; the extremal admissible variance
/// sigma2 = Lc gives sqrt(2).
inline double gaussian_quadratic_moment(double sigma2, double Lc) {
  if (!(Lc > 0.0))
    throw ValidationError("gaussian_quadratic_moment: Lc must be positive");
  if (sigma2 < 0.0)
    throw ValidationError("gaussian_quadratic_moment: negative variance");
  if (sigma2 >= 2.0 * Lc)
    throw ValidationError(
        "gaussian_quadratic_moment: sigma2 >= 2*L*c, moment diverges");
  return 1.0 / std::sqrt(1.0 - sigma2 / (2.0 * Lc));
}

namespace detail {

// One covariance recursion step without precondition checks, via rank-one
// updates: M' = M - c^-1(v q^T + q v^T) + (c^-2 v^T q + L) v v^T, q = M v.
template <typename DerivedM, typename DerivedV>
Eigen::MatrixXd covariance_step_unchecked(const Eigen::MatrixBase<DerivedM>& M,
                                          const Eigen::MatrixBase<DerivedV>& v,
                                          double c, double L) {
  const Eigen::VectorXd q = M * v;
  const double quad = v.dot(q);
  Eigen::MatrixXd out = M;
  const double inv_c = 1.0 / c;
  out.noalias() -= inv_c * (v * q.transpose());
  out.noalias() -= inv_c * (q * v.transpose());
  out.noalias() += (inv_c * inv_c * quad + L) * (v * v.transpose());
  // Symmetrize to keep round-off from accumulating over long runs.
  out = 0.5 * (out + out.transpose()).eval();
  return out;
}

}  // namespace detail

/// The recursion M' = (I - c^-1 v v^T) M (I - c^-1 v v^T) + L v v^T.
/// Preconditions: c >= 1, M symmetric PSD with M <= L*c*I (1e-9 slack).
/// The result again satisfies 0 <= M' <= L*c*I.
template <typename DerivedM, typename DerivedV>
Eigen::MatrixXd covariance_step(const Eigen::MatrixBase<DerivedM>& M,
                                const Eigen::MatrixBase<DerivedV>& v, double c,
                                double L = kSpreadConstant) {
  if (!(c >= 1.0)) throw ValidationError("covariance_step: requires c >= 1");
  if (!(L > 0.0)) throw ValidationError("covariance_step: requires L > 0");
  if (M.rows() != M.cols() || M.rows() != v.size())
    throw ValidationError("covariance_step: dimension mismatch");
  check_input_vector(v, static_cast<int>(v.size()), 0);
  if ((M.derived() - M.derived().transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("covariance_step: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      M.derived(), Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  if (lo < -1e-9)
    throw ValidationError("covariance_step: matrix is not PSD");
  if (hi > L * c + 1e-9)
    throw ValidationError("covariance_step: matrix exceeds L*c*I");
  return detail::covariance_step_unchecked(M, v, c, L);
}

/// Maintains the certificate matrices M_i alongside a run. Optional
/// instrumentation: the update is O(n^2) per step, so this is for n
/// small enough that n^2 t is affordable.
class CovarianceTracker {
 public:
  CovarianceTracker(int n, double c, double L = kSpreadConstant)
      : M_(Eigen::MatrixXd::Zero(n, n)), c_(c), L_(L) {
    if (!(c >= 1.0)) throw ValidationError("CovarianceTracker: requires c >= 1");
    if (!(L > 0.0)) throw ValidationError("CovarianceTracker: requires L > 0");
  }

  template <typename Derived>
  void update(const Eigen::MatrixBase<Derived>& v) {
    check_input_vector(v, static_cast<int>(M_.rows()), step_ + 1);
    M_ = detail::covariance_step_unchecked(M_, v, c_, L_);
    ++step_;
  }

  const Eigen::MatrixXd& matrix() const { return M_; }
  std::int64_t step() const { return step_; }
  double c() const { return c_; }
  double L() const { return L_; }

  // (min, max) eigenvalue of the current M_i.
  std::pair<double, double> eigenvalue_range() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        M_, Eigen::EigenvaluesOnly);
    return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
  }

  // u^T M_i u, the certified variance of <w_i, u>.
  template <typename Derived>
  double direction_variance(const Eigen::MatrixBase<Derived>& u) const {
    return u.dot(M_ * u);
  }

 private:
  Eigen::MatrixXd M_;
  std::int64_t step_ = 0;
  double c_;
  double L_;
};

}  // namespace sbwalk

#endif  // SBWALK_COVARIANCE_HPP
