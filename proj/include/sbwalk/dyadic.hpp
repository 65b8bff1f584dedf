#ifndef SBWALK_DYADIC_HPP
#define SBWALK_DYADIC_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <vector>

#include "sbwalk/errors.hpp"
#include "sbwalk/rng.hpp"

namespace sbwalk {

/// One coordinate's distribution on [0,1]. quantile(p) = inf{y : F(y) >= p}.
class MarginalDistribution {
 public:
  virtual ~MarginalDistribution() = default;
  virtual double quantile(double p) const = 0;
  virtual double sample(RandomStream& rng) const = 0;
  // Atoms break the quantile construction; distributions with atoms must
  // return false and are rejected by the grid builders.
  virtual bool continuous() const { return true; }
};

class UniformMarginal final : public MarginalDistribution {
 public:
  double quantile(double p) const override { return p; }
  double sample(RandomStream& rng) const override { return rng.next_u01(); }
};

// F(y) = y^a on [0,1], a > 0.
class PowerMarginal final : public MarginalDistribution {
 public:
  explicit PowerMarginal(double exponent) : exponent_(exponent) {
    if (!(exponent > 0.0))
      throw ValidationError("PowerMarginal: exponent must be positive");
  }
  double quantile(double p) const override {
    return std::pow(p, 1.0 / exponent_);
  }
  double sample(RandomStream& rng) const override {
    return quantile(rng.next_u01());
  }

 private:
  double exponent_;
};

// Degenerate distribution used to exercise the atom rejection path.
class PointMassMarginal final : public MarginalDistribution {
 public:
  explicit PointMassMarginal(double at) : at_(at) {
    if (at < 0.0 || at > 1.0)
      throw ValidationError("PointMassMarginal: atom must lie in [0,1]");
  }
  double quantile(double) const override { return at_; }
  double sample(RandomStream&) const override { return at_; }
  bool continuous() const override { return false; }

 private:
  double at_;
};

// Product of independent per-coordinate marginals on [0,1]^d.
class ProductDistribution {
 public:
  explicit ProductDistribution(
      std::vector<std::shared_ptr<const MarginalDistribution>> marginals)
      : marginals_(std::move(marginals)) {
    if (marginals_.empty())
      throw ValidationError("ProductDistribution: needs at least one marginal");
    for (const auto& m : marginals_)
      if (!m) throw ValidationError("ProductDistribution: null marginal");
  }

  int dim() const { return static_cast<int>(marginals_.size()); }
  const MarginalDistribution& marginal(int k) const {
    SBWALK_ASSERT(k >= 0 && k < dim(), "marginal index out of range");
    return *marginals_[static_cast<std::size_t>(k)];
  }
  bool continuous() const {
    for (const auto& m : marginals_)
      if (!m->continuous()) return false;
    return true;
  }

  Eigen::VectorXd sample(RandomStream& rng) const {
    Eigen::VectorXd x(dim());
    for (int k = 0; k < dim(); ++k) x[k] = marginals_[k]->sample(rng);
    return x;
  }

  static ProductDistribution uniform_cube(int d) {
    std::vector<std::shared_ptr<const MarginalDistribution>> ms;
    for (int k = 0; k < d; ++k) ms.push_back(std::make_shared<UniformMarginal>());
    return ProductDistribution(std::move(ms));
  }

  static ProductDistribution power_cube(int d, double exponent) {
    std::vector<std::shared_ptr<const MarginalDistribution>> ms;
    for (int k = 0; k < d; ++k)
      ms.push_back(std::make_shared<PowerMarginal>(exponent));
    return ProductDistribution(std::move(ms));
  }

 private:
  std::vector<std::shared_ptr<const MarginalDistribution>> marginals_;
};

enum class GridSource { kExplicitCdf, kEmpiricalSample };

/// The d x (d*t) quantile table: q(k, j-1) targets inf{y : F_k(y) >= j/(dt)}
/// for j = 1..dt. Rows are nondecreasing with values in [0,1].
struct QuantileGrid {
  int d = 0;
  std::int64_t t = 0;
  Eigen::MatrixXd q;  // d rows, d*t columns
  GridSource source = GridSource::kExplicitCdf;

  void validate() const {
    if (d <= 0 || t <= 0) throw ValidationError("QuantileGrid: d, t must be positive");
    if (q.rows() != d || q.cols() != static_cast<Eigen::Index>(d) * t)
      throw ValidationError("QuantileGrid: table shape must be d x (d*t)");
    for (int k = 0; k < d; ++k) {
      double prev = 0.0;
      for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const double value = q(k, j);
        if (value < 0.0 || value > 1.0)
          throw ValidationError("QuantileGrid: quantile outside [0,1]");
        if (value < prev)
          throw ValidationError("QuantileGrid: row not nondecreasing");
        prev = value;
      }
    }
  }
};

namespace detail {

inline void require_grid_args(int d, std::int64_t t) {
  if (d <= 0) throw ValidationError("quantile grid: d must be positive");
  if (t <= 0) throw ValidationError("quantile grid: t must be positive");
}

inline void require_continuous(const ProductDistribution& dist) {
  if (!dist.continuous())
    throw ValidationError(
        "quantile grid: distribution has atoms; only continuous marginals "
        "are supported");
}

// inf{y : empirical F over `sorted` >= p}; the ceil(p*n)-th order statistic.
inline double empirical_quantile(const std::vector<double>& sorted, double p) {
  const auto n = static_cast<std::int64_t>(sorted.size());
  std::int64_t rank = static_cast<std::int64_t>(
      std::ceil(p * static_cast<double>(n) - 1e-9));
  rank = std::max<std::int64_t>(rank, 1);
  rank = std::min(rank, n);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

}  // namespace detail

/// Exact quantiles from the distribution's own inverse CDF.
inline QuantileGrid build_quantile_grid(const ProductDistribution& dist,
                                        std::int64_t t) {
  detail::require_continuous(dist);
  const int d = dist.dim();
  detail::require_grid_args(d, t);
  QuantileGrid grid;
  grid.d = d;
  grid.t = t;
  grid.source = GridSource::kExplicitCdf;
  const std::int64_t dt = static_cast<std::int64_t>(d) * t;
  grid.q.resize(d, dt);
  for (int k = 0; k < d; ++k)
    for (std::int64_t j = 1; j <= dt; ++j)
      grid.q(k, j - 1) = dist.marginal(k).quantile(
          static_cast<double>(j) / static_cast<double>(dt));
  grid.validate();
  return grid;
}

/// Order-statistic quantiles from m >= 100*d*t samples of the distribution.
inline QuantileGrid build_quantile_grid_sampled(const ProductDistribution& dist,
                                                std::int64_t t, std::int64_t m,
                                                std::uint64_t seed) {
  detail::require_continuous(dist);
  const int d = dist.dim();
  detail::require_grid_args(d, t);
  const std::int64_t budget = 100 * static_cast<std::int64_t>(d) * t;
  if (m < budget) {
    std::ostringstream msg;
    msg << "quantile grid: sample budget m = " << m << " below the required "
        << budget << " (100*d*t)";
    throw ValidationError(msg.str());
  }
  RandomStream rng(seed);
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(d));
  for (auto& column : samples) column.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    const Eigen::VectorXd x = dist.sample(rng);
    for (int k = 0; k < d; ++k) {
      if (x[k] < 0.0 || x[k] > 1.0)
        throw ValidationError("quantile grid: sampler left [0,1]^d");
      samples[static_cast<std::size_t>(k)].push_back(x[k]);
    }
  }
  QuantileGrid grid;
  grid.d = d;
  grid.t = t;
  grid.source = GridSource::kEmpiricalSample;
  const std::int64_t dt = static_cast<std::int64_t>(d) * t;
  grid.q.resize(d, dt);
  for (int k = 0; k < d; ++k) {
    auto& column = samples[static_cast<std::size_t>(k)];
    std::sort(column.begin(), column.end());
    for (std::int64_t j = 1; j <= dt; ++j)
      grid.q(k, j - 1) = detail::empirical_quantile(
          column, static_cast<double>(j) / static_cast<double>(dt));
  }
  grid.validate();
  return grid;
}

/// Offline variant: quantiles of the point set itself (one point per row).
inline QuantileGrid build_quantile_grid_from_points(
    const std::vector<Eigen::VectorXd>& points, int d) {
  detail::require_grid_args(d, static_cast<std::int64_t>(points.size()));
  const std::int64_t t = static_cast<std::int64_t>(points.size());
  std::vector<std::vector<double>> columns(static_cast<std::size_t>(d));
  for (const auto& x : points) {
    if (x.size() != d)
      throw ValidationError("quantile grid: point dimension mismatch");
    for (int k = 0; k < d; ++k) {
      if (x[k] < 0.0 || x[k] > 1.0)
        throw ValidationError("quantile grid: point outside [0,1]^d");
      columns[static_cast<std::size_t>(k)].push_back(x[k]);
    }
  }
  QuantileGrid grid;
  grid.d = d;
  grid.t = t;
  grid.source = GridSource::kEmpiricalSample;
  const std::int64_t dt = static_cast<std::int64_t>(d) * t;
  grid.q.resize(d, dt);
  for (int k = 0; k < d; ++k) {
    auto& column = columns[static_cast<std::size_t>(k)];
    std::sort(column.begin(), column.end());
    for (std::int64_t j = 1; j <= dt; ++j)
      grid.q(k, j - 1) = detail::empirical_quantile(
          column, static_cast<double>(j) / static_cast<double>(dt));
  }
  grid.validate();
  return grid;
}

/// Quantile-aligned grid of 2^K base cells over [0,1] plus the implicit
/// family of aligned dyadic intervals. Members are indexed by heap node ids:
/// id = 2^(K-b) + a for the interval [r2(a*2^b), r2((a+1)*2^b)) at level b,
/// so the root (level K) is id 1 and the base cells (level 0) are ids
/// 2^K .. 2^(K+1)-1. Cells are half-open, the last one closed at 1.
struct DyadicScheme {
  std::vector<double> r;  // 2^K + 1 grid points, r.front() = 0, r.back() = 1
  int K = 0;

  std::int64_t cells() const { return std::int64_t{1} << K; }
  std::int64_t family_size() const { return (std::int64_t{2} << K) - 1; }

  std::int64_t node_id(int level, std::int64_t index) const {
    SBWALK_ASSERT(level >= 0 && level <= K, "node level out of range");
    SBWALK_ASSERT(index >= 0 && index < (std::int64_t{1} << (K - level)),
                  "node index out of range");
    return (std::int64_t{1} << (K - level)) + index;
  }

  int node_level(std::int64_t id) const {
    SBWALK_ASSERT(id >= 1 && id <= family_size(), "node id out of range");
    int depth = 0;
    while ((std::int64_t{2} << depth) <= id) ++depth;
    return K - depth;
  }

  std::int64_t node_index(std::int64_t id) const {
    return id - (std::int64_t{1} << (K - node_level(id)));
  }

  // Inclusive base-cell range [lo, hi] covered by a family member.
  std::pair<std::int64_t, std::int64_t> node_cells(std::int64_t id) const {
    const int level = node_level(id);
    const std::int64_t width = std::int64_t{1} << level;
    const std::int64_t lo = node_index(id) * width;
    return {lo, lo + width - 1};
  }

  // [left, right) endpoints of a family member (right = 1 means closed).
  std::pair<double, double> node_interval(std::int64_t id) const {
    const auto [lo, hi] = node_cells(id);
    return {r[static_cast<std::size_t>(lo)], r[static_cast<std::size_t>(hi + 1)]};
  }

  /// Base cell containing x: the last grid point <= x, clamped so that 1
  /// falls into the final cell (closed-at-1 convention).
  std::int64_t locate_cell(double x) const {
    if (x < 0.0 || x > 1.0)
      throw ValidationError("locate_cell: coordinate outside [0,1]");
    const auto it = std::upper_bound(r.begin(), r.end(), x);
    std::int64_t cell = static_cast<std::int64_t>(it - r.begin()) - 1;
    if (cell >= cells()) cell = cells() - 1;
    SBWALK_ASSERT(cell >= 0, "locate_cell underflow");
    return cell;
  }

  // The K+1 family members containing a base cell, leaf first, root last.
  std::vector<std::int64_t> ancestors(std::int64_t cell) const {
    SBWALK_ASSERT(cell >= 0 && cell < cells(), "cell index out of range");
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(K) + 1);
    for (std::int64_t id = cell + cells(); id >= 1; id >>= 1) out.push_back(id);
    return out;
  }

  /// Minimal set of family members exactly covering the base-cell range
  /// [cell_lo, cell_hi]; empty when the range is empty. At most 2K ids.
  std::vector<std::int64_t> decompose(std::int64_t cell_lo,
                                      std::int64_t cell_hi) const {
    std::vector<std::int64_t> out;
    if (cell_lo > cell_hi) return out;
    SBWALK_ASSERT(cell_lo >= 0 && cell_hi < cells(), "cell range out of bounds");
    std::int64_t lo = cell_lo + cells();
    std::int64_t hi = cell_hi + cells() + 1;
    while (lo < hi) {
      if (lo & 1) out.push_back(lo++);
      if (hi & 1) out.push_back(--hi);
      lo >>= 1;
      hi >>= 1;
    }
    return out;
  }
};

/// Merges all d*(d*t) quantiles into one sorted grid, prepends 0, appends 1
/// when the largest quantile falls short of it, and pads with repeated 1s to
/// the next power-of-two cell count >= d^2*t.
inline DyadicScheme build_dyadic_scheme(const QuantileGrid& grid) {
  grid.validate();
  DyadicScheme scheme;
  auto& r = scheme.r;
  r.reserve(static_cast<std::size_t>(grid.q.size()) + 2);
  r.push_back(0.0);
  for (int k = 0; k < grid.d; ++k)
    for (Eigen::Index j = 0; j < grid.q.cols(); ++j) r.push_back(grid.q(k, j));
  std::sort(r.begin(), r.end());
  if (r.back() < 1.0) r.push_back(1.0);

  const std::int64_t min_cells =
      static_cast<std::int64_t>(grid.d) * grid.d * grid.t;
  std::int64_t cells = static_cast<std::int64_t>(r.size()) - 1;
  std::int64_t target = 1;
  int K = 0;
  while (target < std::max(min_cells, cells)) {
    target <<= 1;
    ++K;
  }
  r.resize(static_cast<std::size_t>(target) + 1, 1.0);
  scheme.K = K;
  return scheme;
}

}  // namespace sbwalk

#endif  // SBWALK_DYADIC_HPP
