#ifndef SBWALK_KOMLOS_HPP
#define SBWALK_KOMLOS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "sbwalk/rng.hpp"
#include "sbwalk/sparse.hpp"
#include "sbwalk/walk.hpp"

namespace sbwalk {

struct KomlosResult {
  std::vector<std::int8_t> x;    // the signing, one entry per column
  double final_sup_norm = 0.0;   // ||Ax||inf, recomputed from x
  double incremental_sup_norm = 0.0;  // same, from the running w
  double threshold = 0.0;        // sqrt(8*c*L*ln n)
  double c = 0.0;
  double delta = 0.0;
  bool failed_midrun = false;    // some step tripped |<w,v_i>| > c
  bool exceeded_final = false;   // final_sup_norm > threshold
  std::optional<std::int64_t> first_fail_step;
  std::int64_t nnz = 0;
  std::int64_t touched_entries = 0;  // sparse entries read/written: 2*nnz
  std::uint64_t seed = 0;
};

/// Input-sparsity walk: sign the columns of A in arithmetic work
/// proportional to nnz(A). Per step only |<w, v_i>| <= c is enforced
/// (c = 30*ln(t/delta)); ||Ax||inf is audited once at the end against
/// sqrt(8*c*L*ln n). A tripped check or an exceeded final bound is
/// reported, never thrown: the caller always receives a complete signing.
inline KomlosResult run_komlos(const SparseColumnMatrix& A, double delta,
                               std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("run_komlos: delta must lie in (0,1)");
  const std::int64_t t = A.cols();
  if (t <= 0) throw ValidationError("run_komlos: matrix has no columns");
  const double c =
      30.0 * (std::log(static_cast<double>(t)) - std::log(delta));
  if (c < 1.0) throw ConfigError("run_komlos: 30*ln(t/delta) < 1");

  KomlosResult result;
  result.c = c;
  result.delta = delta;
  result.threshold =
      std::sqrt(8.0 * c * kSpreadConstant * std::log(static_cast<double>(A.rows())));
  result.nnz = A.nnz();
  result.seed = seed;
  result.x.resize(static_cast<std::size_t>(t));

  Eigen::VectorXd w = Eigen::VectorXd::Zero(A.rows());
  RandomStream rng(seed);
  for (std::int64_t j = 0; j < t; ++j) {
    const SparseVector& col = A.column(j);
    const double inner = sparse_inner(w, col);
    if (std::abs(inner) > c && !result.failed_midrun) {
      result.failed_midrun = true;
      result.first_fail_step = j + 1;
    }
    // Past a tripped check the clamped rule still yields a usable sign.
    double p = 0.5 - inner / (2.0 * c);
    p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    const int sign = draw_sign(p, rng.next_u01());
    sparse_update(w, col, sign);
    result.x[static_cast<std::size_t>(j)] = static_cast<std::int8_t>(sign);
    result.touched_entries += 2 * static_cast<std::int64_t>(col.size());
  }

  result.incremental_sup_norm =
      A.rows() > 0 ? w.lpNorm<Eigen::Infinity>() : 0.0;
  const Eigen::VectorXd recomputed = A.apply_signs(result.x);
  result.final_sup_norm = recomputed.lpNorm<Eigen::Infinity>();
  result.exceeded_final = result.final_sup_norm > result.threshold;
  return result;
}

// delta defaults to t^-2.
inline KomlosResult run_komlos(const SparseColumnMatrix& A, std::uint64_t seed) {
  const double t = static_cast<double>(A.cols());
  return run_komlos(A, 1.0 / (t * t), seed);
}

}  // namespace sbwalk

#endif  // SBWALK_KOMLOS_HPP
