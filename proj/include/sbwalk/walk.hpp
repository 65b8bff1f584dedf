#ifndef SBWALK_WALK_HPP
#define SBWALK_WALK_HPP

#include <Eigen/Dense>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <sstream>
#include <vector>

#include "sbwalk/errors.hpp"
#include "sbwalk/rng.hpp"

namespace sbwalk {

// Spread constant of the covariance recursion; fixed to 2*pi.
inline constexpr double kSpreadConstant = 6.283185307179586476925286766559;

// Slack tolerated on the unit-ball input constraint (decimal parsing round-off).
inline constexpr double kNormSlack = 1e-12;

enum class WalkMode {
  kOnline,            // check |<w,v>| <= c and ||w||inf <= c every step
  kKomlosFinalCheck,  // check |<w,v>| <= c per step; ||.||inf audited at the end
};

/// Bias scale from ln(n); lets embedded coordinate spaces too large for an
/// integer count (dyadic box products) reuse the same rule.
inline double compute_c_from_log(double log_n, std::int64_t t, double delta) {
  if (t <= 0) throw ConfigError("compute_c: t must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("compute_c: delta must lie in (0,1)");
  const double c =
      30.0 * (log_n + std::log(static_cast<double>(t)) - std::log(delta));
  if (c < 1.0) {
    std::ostringstream msg;
    msg << "compute_c: 30*ln(n*t/delta) = " << c
        << " violates the required bound c >= 1 (need n*t/delta > e^(1/30))";
    throw ConfigError(msg.str());
  }
  return c;
}

/// Bias scale c = 30*ln(n*t/delta). Rejects parameter combinations giving
/// c < 1 (the covariance recursion requires c >= 1).
inline double compute_c(std::int64_t n, std::int64_t t, double delta) {
  if (n <= 0) throw ConfigError("compute_c: n must be positive");
  return compute_c_from_log(std::log(static_cast<double>(n)), t, delta);
}

// Parameters of one walk. L is 2*pi unless an experiment overrides it.
struct WalkConfig {
  int n = 0;
  std::int64_t t = 0;
  double delta = 0.0;
  double c = 0.0;
  double L = kSpreadConstant;
  WalkMode mode = WalkMode::kOnline;

  static WalkConfig online(int n, std::int64_t t, double delta) {
    WalkConfig cfg;
    cfg.n = n;
    cfg.t = t;
    cfg.delta = delta;
    cfg.c = compute_c(n, t, delta);
    cfg.validate();
    return cfg;
  }

  // Explicit bias scale (experiments; c must still be >= 1).
  static WalkConfig with_bias(int n, std::int64_t t, double delta, double c,
                              WalkMode mode = WalkMode::kOnline) {
    WalkConfig cfg;
    cfg.n = n;
    cfg.t = t;
    cfg.delta = delta;
    cfg.c = c;
    cfg.mode = mode;
    cfg.validate();
    return cfg;
  }

  void validate() const {
    if (n <= 0) throw ConfigError("WalkConfig: dimension n must be positive");
    if (t <= 0) throw ConfigError("WalkConfig: horizon t must be positive");
    if (!(delta > 0.0 && delta < 1.0))
      throw ConfigError("WalkConfig: delta must lie in (0,1)");
    if (!(c >= 1.0)) throw ConfigError("WalkConfig: bias scale c must be >= 1");
    if (!(L > 0.0)) throw ConfigError("WalkConfig: spread constant L must be positive");
  }
};

// Running sum w_i, completed-step counter and the random-stream position.
struct WalkState {
  Eigen::VectorXd w;
  std::int64_t step = 0;
  std::uint64_t rng_cursor = 0;

  explicit WalkState(int n) : w(Eigen::VectorXd::Zero(n)) {}
};

/// P[eps = +1] from a precomputed inner product <w,v>. Requires |inner| <= c;
/// the exact value already lies in [0,1], the clamp only absorbs float drift
/// at |inner| ~ c.
inline double sign_probability_from_inner(double inner, double c) {
  SBWALK_ASSERT(std::abs(inner) <= c,
                "sign_probability: |<w,v>| > c reached the probability rule");
  const double p = 0.5 - inner / (2.0 * c);
  return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

template <typename DerivedW, typename DerivedV>
double sign_probability(const Eigen::MatrixBase<DerivedW>& w,
                        const Eigen::MatrixBase<DerivedV>& v, double c) {
  return sign_probability_from_inner(w.dot(v), c);
}

// +1 iff u < p (strict; one uniform draw per step, consumed in step order).
inline int draw_sign(double p, double u) { return u < p ? +1 : -1; }

// Result of one step. When failed, the state was left untouched and
// fail_step is the 1-based index of the offending input vector.
struct StepResult {
  bool failed = false;
  std::int64_t fail_step = 0;
  int sign = 0;
  double inner = 0.0;
};

template <typename Derived>
void check_input_vector(const Eigen::MatrixBase<Derived>& v, int n,
                        std::int64_t step_index) {
  if (v.size() != n) {
    std::ostringstream msg;
    msg << "input vector at step " << step_index << " has dimension "
        << v.size() << ", expected " << n;
    throw ValidationError(msg.str());
  }
  const double norm = v.norm();
  if (norm > 1.0 + kNormSlack) {
    std::ostringstream msg;
    msg << "input vector at step " << step_index << " has l2 norm " << norm
        << " > 1";
    throw ValidationError(msg.str());
  }
}

/// One step of the self-balancing walk. Failure (the algorithm's own
/// termination rule) is a value, not an exception; bad input is an exception.
template <typename Derived>
StepResult balance_step(WalkState& state, const Eigen::MatrixBase<Derived>& v,
                        const WalkConfig& config, double u) {
  SBWALK_ASSERT(state.step < config.t, "balance_step past the horizon");
  const std::int64_t step_index = state.step + 1;
  check_input_vector(v, config.n, step_index);

  StepResult result;
  result.inner = state.w.dot(v);
  const bool inner_bad = std::abs(result.inner) > config.c;
  const bool sup_bad = config.mode == WalkMode::kOnline &&
                       state.w.template lpNorm<Eigen::Infinity>() > config.c;
  if (inner_bad || sup_bad) {
    result.failed = true;
    result.fail_step = step_index;
    return result;
  }
  const double p = sign_probability_from_inner(result.inner, config.c);
  result.sign = draw_sign(p, u);
  state.w += static_cast<double>(result.sign) * v;
  ++state.step;
  ++state.rng_cursor;
  return result;
}

// Record of one run. signs has fail_step-1 entries when failed, t otherwise.
struct WalkTrace {
  std::vector<std::int8_t> signs;
  std::vector<double> sup_norms;  // ||w_i||inf after step i
  std::vector<double> inners;     // <w_{i-1}, v_i>
  double max_inner = 0.0;         // max_i |<w_{i-1}, v_i>|
  bool failed = false;
  std::optional<std::int64_t> fail_step;
  std::uint64_t seed = 0;
  Eigen::VectorXd final_w;

  std::int64_t steps() const { return static_cast<std::int64_t>(signs.size()); }

  double max_sup_norm() const {
    double m = 0.0;
    for (double s : sup_norms) m = std::max(m, s);
    return m;
  }
};

/// Anything the runners can pull vectors from: sources and stream adapters.
/// Keeps plain std::vector arguments on the fixed-list overloads instead.
template <typename S>
concept VectorStreamLike = requires(S& s, const Eigen::VectorXd* state) {
  { s.next(state) } -> std::convertible_to<const Eigen::VectorXd&>;
  { s.adaptive() } -> std::convertible_to<bool>;
  { s.dim() } -> std::convertible_to<int>;
};

/// Runs Balance over a stream of t vectors. The source is pulled one vector
/// at a time, after the previous sign has been fixed; adaptive sources see
/// the current running sum, oblivious ones must not.
template <VectorStreamLike Source>
WalkTrace run_balance(Source& source, const WalkConfig& config,
                      std::uint64_t seed) {
  config.validate();
  WalkState state(config.n);
  RandomStream rng(seed);
  WalkTrace trace;
  trace.seed = seed;
  trace.signs.reserve(static_cast<std::size_t>(config.t));
  trace.sup_norms.reserve(static_cast<std::size_t>(config.t));
  trace.inners.reserve(static_cast<std::size_t>(config.t));
  for (std::int64_t i = 0; i < config.t; ++i) {
    const Eigen::VectorXd& v =
        source.next(source.adaptive() ? &state.w : nullptr);
    const double u = rng.next_u01();
    const StepResult step = balance_step(state, v, config, u);
    trace.inners.push_back(step.inner);
    trace.max_inner = std::max(trace.max_inner, std::abs(step.inner));
    if (step.failed) {
      trace.failed = true;
      trace.fail_step = step.fail_step;
      break;
    }
    trace.signs.push_back(static_cast<std::int8_t>(step.sign));
    trace.sup_norms.push_back(state.w.lpNorm<Eigen::Infinity>());
  }
  trace.final_w = state.w;
  state.rng_cursor = rng.cursor();
  return trace;
}

// Fixed-list adapter so tests and file replays can call run_balance directly.
class VectorListStream {
 public:
  explicit VectorListStream(const std::vector<Eigen::VectorXd>& vectors)
      : vectors_(&vectors) {
    SBWALK_ASSERT(!vectors.empty(), "empty vector list");
  }

  int dim() const { return static_cast<int>(vectors_->front().size()); }

  bool adaptive() const { return false; }

  const Eigen::VectorXd& next(const Eigen::VectorXd* state) {
    SBWALK_ASSERT(state == nullptr, "oblivious stream handed algorithm state");
    SBWALK_ASSERT(index_ < vectors_->size(), "stream exhausted");
    return (*vectors_)[index_++];
  }

  void reset() { index_ = 0; }

 private:
  const std::vector<Eigen::VectorXd>* vectors_;
  std::size_t index_ = 0;
};

inline WalkTrace run_balance(const std::vector<Eigen::VectorXd>& vectors,
                             const WalkConfig& config, std::uint64_t seed) {
  SBWALK_ASSERT(static_cast<std::int64_t>(vectors.size()) == config.t,
                "vector list length differs from the configured horizon");
  VectorListStream stream(vectors);
  return run_balance(stream, config, seed);
}

}  // namespace sbwalk

#endif  // SBWALK_WALK_HPP
