#ifndef SBWALK_BASELINES_HPP
#define SBWALK_BASELINES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "sbwalk/errors.hpp"
#include "sbwalk/rng.hpp"
#include "sbwalk/stats.hpp"
#include "sbwalk/walk.hpp"

namespace sbwalk {

/// Fair-coin signing. Never fails; recorded inner products are informational.
template <VectorStreamLike Source>
WalkTrace random_signing(Source& source, std::int64_t t, std::uint64_t seed) {
  if (t <= 0) throw ValidationError("random_signing: t must be positive");
  RandomStream rng(seed);
  WalkTrace trace;
  trace.seed = seed;
  trace.signs.reserve(static_cast<std::size_t>(t));
  trace.sup_norms.reserve(static_cast<std::size_t>(t));
  trace.inners.reserve(static_cast<std::size_t>(t));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(source.dim());
  for (std::int64_t i = 0; i < t; ++i) {
    const Eigen::VectorXd& v = source.next(source.adaptive() ? &w : nullptr);
    check_input_vector(v, static_cast<int>(w.size()), i + 1);
    const double inner = w.dot(v);
    const int sign = draw_sign(0.5, rng.next_u01());
    w += sign > 0 ? v : -v;
    trace.signs.push_back(static_cast<std::int8_t>(sign));
    trace.sup_norms.push_back(w.template lpNorm<Eigen::Infinity>());
    trace.inners.push_back(inner);
    trace.max_inner = std::max(trace.max_inner, std::abs(inner));
  }
  trace.final_w = std::move(w);
  return trace;
}

inline WalkTrace random_signing(const std::vector<Eigen::VectorXd>& vectors,
                                std::uint64_t seed) {
  VectorListStream stream(vectors);
  return random_signing(stream, static_cast<std::int64_t>(vectors.size()), seed);
}

/// Deterministic greedy signing against the potential
/// Phi(w) = sum_j cosh(lambda * w_j): pick the sign with the smaller new
/// potential, +1 on ties. The comparison uses
///   Phi(w+v) - Phi(w-v) = sum_j [cosh(a_j + b_j) - cosh(a_j - b_j)]
/// with a = lambda*w, b = lambda*v, rescaled by the largest exponent so that
/// no cosh overflows.
inline int greedy_potential_sign(const Eigen::VectorXd& w,
                                 const Eigen::VectorXd& v, double lambda) {
  const Eigen::ArrayXd plus = lambda * (w + v).array();
  const Eigen::ArrayXd minus = lambda * (w - v).array();
  const double m = std::max(plus.abs().maxCoeff(), minus.abs().maxCoeff());
  // 2*cosh(x)/e^m, safe because |x| <= m.
  auto scaled_cosh = [m](double x) {
    const double a = std::abs(x);
    return std::exp(a - m) + std::exp(-a - m);
  };
  double diff = 0.0;
  for (Eigen::Index j = 0; j < plus.size(); ++j)
    diff += scaled_cosh(plus[j]) - scaled_cosh(minus[j]);
  return diff <= 0.0 ? 1 : -1;
}

template <VectorStreamLike Source>
WalkTrace greedy_potential_signing(Source& source, std::int64_t t,
                                   double lambda = 0.1) {
  if (t <= 0) throw ValidationError("greedy_potential_signing: t must be positive");
  if (!(lambda > 0.0))
    throw ValidationError("greedy_potential_signing: lambda must be positive");
  WalkTrace trace;
  trace.seed = 0;
  trace.signs.reserve(static_cast<std::size_t>(t));
  trace.sup_norms.reserve(static_cast<std::size_t>(t));
  trace.inners.reserve(static_cast<std::size_t>(t));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(source.dim());
  for (std::int64_t i = 0; i < t; ++i) {
    const Eigen::VectorXd& v = source.next(source.adaptive() ? &w : nullptr);
    check_input_vector(v, static_cast<int>(w.size()), i + 1);
    const double inner = w.dot(v);
    const int sign = greedy_potential_sign(w, v, lambda);
    w += sign > 0 ? v : -v;
    trace.signs.push_back(static_cast<std::int8_t>(sign));
    trace.sup_norms.push_back(w.template lpNorm<Eigen::Infinity>());
    trace.inners.push_back(inner);
    trace.max_inner = std::max(trace.max_inner, std::abs(inner));
  }
  trace.final_w = std::move(w);
  return trace;
}

inline WalkTrace greedy_potential_signing(
    const std::vector<Eigen::VectorXd>& vectors, double lambda = 0.1) {
  VectorListStream stream(vectors);
  return greedy_potential_signing(stream,
                                  static_cast<std::int64_t>(vectors.size()),
                                  lambda);
}

enum class Objective {
  kFinalSup,   // ||w_t||_inf
  kPrefixSup,  // max_{i<=t} ||w_i||_inf
};

struct BruteForceResult {
  double value = 0.0;
  std::vector<std::int8_t> signs;
};

namespace detail {

inline void brute_force_rec(const std::vector<Eigen::VectorXd>& vectors,
                            Objective objective, std::size_t depth,
                            Eigen::VectorXd& w, double prefix_sup,
                            std::vector<std::int8_t>& signs,
                            BruteForceResult& best) {
  if (depth == vectors.size()) {
    const double value =
        objective == Objective::kFinalSup ? w.lpNorm<Eigen::Infinity>() : prefix_sup;
    // Strict improvement only: the +1-first visit order makes the first
    // optimum the lexicographically smallest one (with +1 before -1).
    if (value < best.value) {
      best.value = value;
      best.signs = signs;
    }
    return;
  }
  // First step is pinned to +1: both objectives are invariant under global
  // negation, so the lex-smallest optimum starts with +1.
  const int last_branch = depth == 0 ? 0 : 1;
  for (int branch = 0; branch <= last_branch; ++branch) {
    const int sign = branch == 0 ? 1 : -1;
    w += sign > 0 ? vectors[depth] : -vectors[depth];
    signs.push_back(static_cast<std::int8_t>(sign));
    brute_force_rec(vectors, objective, depth + 1, w,
                    std::max(prefix_sup, w.lpNorm<Eigen::Infinity>()), signs,
                    best);
    signs.pop_back();
    w -= sign > 0 ? vectors[depth] : -vectors[depth];
  }
}

}  // namespace detail

/// Exhaustive minimum over all 2^t sign patterns (t <= 20). Ties resolve to
/// the lexicographically smallest pattern with +1 ordered before -1.
inline BruteForceResult brute_force_optimal(
    const std::vector<Eigen::VectorXd>& vectors, Objective objective) {
  if (vectors.empty() || vectors.size() > 20)
    throw ValidationError("brute_force_optimal: needs 1 <= t <= 20");
  for (std::size_t i = 1; i < vectors.size(); ++i)
    if (vectors[i].size() != vectors[0].size())
      throw ValidationError("brute_force_optimal: inconsistent dimensions");
  BruteForceResult best;
  best.value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(vectors[0].size());
  std::vector<std::int8_t> signs;
  signs.reserve(vectors.size());
  detail::brute_force_rec(vectors, objective, 0, w, 0.0, signs, best);
  return best;
}

struct MomentEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t used = 0;    // non-failed traces entering the mean
  std::int64_t failed = 0;  // traces excluded because the walk failed
  bool low_sample = false;  // fewer than 1000 usable traces
};

/// Monte-Carlo estimate of E[exp(<w_t,u>^2 / (4*L*c))] over completed walks.
/// Failed walks are excluded and counted separately.
inline MomentEstimate subgaussian_moment_estimate(
    const std::vector<WalkTrace>& traces, const Eigen::VectorXd& u, double Lc) {
  if (!(Lc > 0.0))
    throw ValidationError("subgaussian_moment_estimate: L*c must be positive");
  if (u.norm() > 1.0 + kNormSlack)
    throw ValidationError("subgaussian_moment_estimate: u must be a unit vector");
  std::vector<double> samples;
  samples.reserve(traces.size());
  MomentEstimate out;
  for (const auto& trace : traces) {
    if (trace.failed) {
      ++out.failed;
      continue;
    }
    if (trace.final_w.size() != u.size())
      throw ValidationError("subgaussian_moment_estimate: dimension mismatch");
    const double inner = trace.final_w.dot(u);
    samples.push_back(std::exp(inner * inner / (4.0 * Lc)));
  }
  out.used = static_cast<std::int64_t>(samples.size());
  out.low_sample = out.used < 1000;
  if (samples.empty())
    throw ValidationError("subgaussian_moment_estimate: no usable traces");
  const MeanSe ms = mean_and_se(samples);
  out.estimate = ms.mean;
  out.std_error = ms.std_error;
  return out;
}

}  // namespace sbwalk

#endif  // SBWALK_BASELINES_HPP
