#ifndef SBWALK_GEOMETRY_HPP
#define SBWALK_GEOMETRY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sbwalk/dyadic.hpp"
#include "sbwalk/errors.hpp"
#include "sbwalk/rng.hpp"
#include "sbwalk/walk.hpp"

namespace sbwalk {

// Append-only (step, cumulative sum) log of one family member; lets queries
// read the signed sum as of any past step with a binary search.
class NodeHistory {
 public:
  void append(std::int64_t step, std::int64_t cum) {
    SBWALK_ASSERT(entries_.empty() || entries_.back().first < step,
                  "history steps must increase");
    entries_.emplace_back(step, cum);
  }

  std::int64_t current() const {
    return entries_.empty() ? 0 : entries_.back().second;
  }

  std::int64_t at(std::int64_t step) const {
    const auto it = std::upper_bound(
        entries_.begin(), entries_.end(), step,
        [](std::int64_t s, const std::pair<std::int64_t, std::int64_t>& e) {
          return s < e.first;
        });
    return it == entries_.begin() ? 0 : std::prev(it)->second;
  }

  bool empty() const { return entries_.empty(); }

 private:
  std::vector<std::pair<std::int64_t, std::int64_t>> entries_;
};

// One inserted coordinate in a base cell.
struct CellPoint {
  double coord = 0.0;
  std::int8_t sign = 0;
  std::int64_t step = 0;
};

/// Signed counts over every dyadic family member, kept per dimension against
/// one shared merged scheme. Sums are exact integers; a max-|sum| tree
/// augmentation yields the current worst member in O(K) per insert.
class IntervalTracker {
 public:
  IntervalTracker(DyadicScheme scheme, int d)
      : scheme_(std::move(scheme)), d_(d) {
    if (d <= 0) throw ValidationError("IntervalTracker: d must be positive");
    const std::size_t nodes = static_cast<std::size_t>(scheme_.family_size()) + 1;
    sums_.assign(static_cast<std::size_t>(d), std::vector<std::int64_t>(nodes, 0));
    absmax_.assign(static_cast<std::size_t>(d), std::vector<std::int64_t>(nodes, 0));
    histories_.assign(static_cast<std::size_t>(d), std::vector<NodeHistory>(nodes));
    cell_points_.assign(
        static_cast<std::size_t>(d),
        std::vector<std::vector<CellPoint>>(static_cast<std::size_t>(scheme_.cells())));
  }

  const DyadicScheme& scheme() const { return scheme_; }
  int dims() const { return d_; }
  std::int64_t step() const { return step_; }

  // Sum of the signed counts over the K+1 members containing a base cell.
  std::int64_t ancestor_sum(int k, std::int64_t cell) const {
    const auto& sums = sums_[static_cast<std::size_t>(k)];
    std::int64_t total = 0;
    for (std::int64_t id = cell + scheme_.cells(); id >= 1; id >>= 1)
      total += sums[static_cast<std::size_t>(id)];
    return total;
  }

  void insert(const Eigen::VectorXd& x, int sign, std::int64_t step) {
    SBWALK_ASSERT(x.size() == d_, "insert: point dimension mismatch");
    SBWALK_ASSERT(sign == 1 || sign == -1, "insert: sign must be +-1");
    SBWALK_ASSERT(step == step_ + 1, "insert: steps must be consecutive");
    for (int k = 0; k < d_; ++k) {
      const std::int64_t cell = scheme_.locate_cell(x[k]);
      auto& sums = sums_[static_cast<std::size_t>(k)];
      auto& absmax = absmax_[static_cast<std::size_t>(k)];
      auto& histories = histories_[static_cast<std::size_t>(k)];
      cell_points_[static_cast<std::size_t>(k)][static_cast<std::size_t>(cell)]
          .push_back({x[k], static_cast<std::int8_t>(sign), step});
      for (std::int64_t id = cell + scheme_.cells(); id >= 1; id >>= 1) {
        const auto ui = static_cast<std::size_t>(id);
        sums[ui] += sign;
        histories[ui].append(step, sums[ui]);
        std::int64_t m = std::abs(sums[ui]);
        if (2 * id + 1 <= scheme_.family_size())
          m = std::max({m, absmax[static_cast<std::size_t>(2 * id)],
                        absmax[static_cast<std::size_t>(2 * id + 1)]});
        absmax[ui] = m;
      }
    }
    ++step_;
  }

  // Largest |signed sum| over all members and dimensions, right now.
  std::int64_t current_max_abs() const {
    std::int64_t m = 0;
    for (int k = 0; k < d_; ++k)
      m = std::max(m, absmax_[static_cast<std::size_t>(k)][1]);
    return m;
  }

  std::int64_t signed_sum(int k, std::int64_t id) const {
    SBWALK_ASSERT(k >= 0 && k < d_, "dimension out of range");
    SBWALK_ASSERT(id >= 1 && id <= scheme_.family_size(), "node id out of range");
    return sums_[static_cast<std::size_t>(k)][static_cast<std::size_t>(id)];
  }

  std::int64_t signed_sum_at(int k, std::int64_t id, std::int64_t step) const {
    SBWALK_ASSERT(k >= 0 && k < d_, "dimension out of range");
    SBWALK_ASSERT(id >= 1 && id <= scheme_.family_size(), "node id out of range");
    return histories_[static_cast<std::size_t>(k)][static_cast<std::size_t>(id)]
        .at(step);
  }

  const std::vector<CellPoint>& cell_contents(int k, std::int64_t cell) const {
    SBWALK_ASSERT(k >= 0 && k < d_, "dimension out of range");
    SBWALK_ASSERT(cell >= 0 && cell < scheme_.cells(), "cell out of range");
    return cell_points_[static_cast<std::size_t>(k)][static_cast<std::size_t>(cell)];
  }

  // Parent sum == sum of children, exactly, at every internal node.
  bool level_consistent() const {
    for (int k = 0; k < d_; ++k) {
      const auto& sums = sums_[static_cast<std::size_t>(k)];
      for (std::int64_t id = 1; id < scheme_.cells(); ++id)
        if (sums[static_cast<std::size_t>(id)] !=
            sums[static_cast<std::size_t>(2 * id)] +
                sums[static_cast<std::size_t>(2 * id + 1)])
          return false;
    }
    return true;
  }

 private:
  DyadicScheme scheme_;
  int d_ = 0;
  std::int64_t step_ = 0;
  std::vector<std::vector<std::int64_t>> sums_;     // [dim][node id]
  std::vector<std::vector<std::int64_t>> absmax_;   // max |sum| in subtree
  std::vector<std::vector<NodeHistory>> histories_; // [dim][node id]
  std::vector<std::vector<std::vector<CellPoint>>> cell_points_;
};

namespace detail {

inline void check_query_range(double alpha, double beta) {
  if (!(alpha >= 0.0) || !(beta <= 1.0) || !(alpha <= beta))
    throw ValidationError("query: need 0 <= alpha <= beta <= 1");
}

}  // namespace detail

/// Signed count over [alpha, beta) in dimension k as of at_step; beta = 1 is
/// treated as closed so [alpha, 1] covers the whole right end. Sums at most
/// 2(K+1) pieces: the maximal dyadic members strictly inside plus exact
/// scans of the two partial boundary cells.
inline std::int64_t query_interval(const IntervalTracker& tracker, int k,
                                   double alpha, double beta,
                                   std::int64_t at_step) {
  detail::check_query_range(alpha, beta);
  if (k < 0 || k >= tracker.dims())
    throw ValidationError("query: dimension out of range");
  if (alpha == beta || at_step <= 0) return 0;
  const DyadicScheme& scheme = tracker.scheme();
  const bool closed_end = beta == 1.0;
  const std::int64_t lo_cell = scheme.locate_cell(alpha);
  const std::int64_t hi_cell =
      closed_end ? scheme.cells() - 1 : scheme.locate_cell(beta);

  auto scan = [&](std::int64_t cell, double lo, bool use_hi) {
    std::int64_t total = 0;
    for (const CellPoint& p : tracker.cell_contents(k, cell)) {
      if (p.step > at_step) continue;
      if (p.coord < lo) continue;
      if (use_hi && p.coord >= beta) continue;
      total += p.sign;
    }
    return total;
  };

  if (lo_cell == hi_cell) return scan(lo_cell, alpha, !closed_end);
  std::int64_t total = scan(lo_cell, alpha, false) +
                       scan(hi_cell, 0.0, !closed_end);
  for (std::int64_t id : scheme.decompose(lo_cell + 1, hi_cell - 1))
    total += tracker.signed_sum_at(k, id, at_step);
  return total;
}

/// Signed counts over every tuple of per-dimension dyadic family members
/// (the product family of the box construction). Node-id tuples are packed
/// 16 bits per dimension into one 64-bit key, so d <= 4 and K <= 15.
class BoxTracker {
 public:
  BoxTracker(std::vector<DyadicScheme> schemes)
      : schemes_(std::move(schemes)), d_(static_cast<int>(schemes_.size())) {
    if (d_ <= 0 || d_ > 4)
      throw ValidationError("BoxTracker: needs 1 <= d <= 4");
    for (const auto& s : schemes_)
      if (s.K > 15)
        throw ValidationError(
            "BoxTracker: scheme depth K > 15 exceeds the packed-key budget "
            "(d^2*t too large for box mode)");
    cell_points_.resize(static_cast<std::size_t>(d_));
    for (int k = 0; k < d_; ++k)
      cell_points_[static_cast<std::size_t>(k)].resize(
          static_cast<std::size_t>(schemes_[static_cast<std::size_t>(k)].cells()));
  }

  int dims() const { return d_; }
  std::int64_t step() const { return step_; }
  const DyadicScheme& scheme(int k) const {
    SBWALK_ASSERT(k >= 0 && k < d_, "dimension out of range");
    return schemes_[static_cast<std::size_t>(k)];
  }

  // ln of the number of product coordinates, prod_k (2^(K_k+1) - 1).
  double log_family_size() const {
    double total = 0.0;
    for (const auto& s : schemes_)
      total += std::log(static_cast<double>(s.family_size()));
    return total;
  }

  // 1 / sqrt(prod_k (K_k + 1)): the unit-norm scale of one embedded point.
  double embedding_scale() const {
    double count = 1.0;
    for (const auto& s : schemes_) count *= static_cast<double>(s.K + 1);
    return 1.0 / std::sqrt(count);
  }

  std::int64_t ancestor_product_sum(const std::array<std::int64_t, 4>& cells) const {
    std::int64_t total = 0;
    for_each_ancestor_tuple(cells, [&](std::uint64_t key) {
      const auto it = histories_.find(key);
      if (it != histories_.end()) total += it->second.current();
    });
    return total;
  }

  void insert(const Eigen::VectorXd& x, int sign, std::int64_t step) {
    SBWALK_ASSERT(x.size() == d_, "insert: point dimension mismatch");
    SBWALK_ASSERT(sign == 1 || sign == -1, "insert: sign must be +-1");
    SBWALK_ASSERT(step == step_ + 1, "insert: steps must be consecutive");
    std::array<std::int64_t, 4> cells{};
    for (int k = 0; k < d_; ++k) {
      cells[static_cast<std::size_t>(k)] =
          schemes_[static_cast<std::size_t>(k)].locate_cell(x[k]);
      cell_points_[static_cast<std::size_t>(k)]
                  [static_cast<std::size_t>(cells[static_cast<std::size_t>(k)])]
                      .push_back(static_cast<std::int32_t>(points_.size()));
    }
    for_each_ancestor_tuple(cells, [&](std::uint64_t key) {
      NodeHistory& h = histories_[key];
      const std::int64_t cum = h.current() + sign;
      h.append(step, cum);
      heap_.emplace(std::abs(cum), key);
    });
    points_.push_back(x);
    signs_.push_back(static_cast<std::int8_t>(sign));
    ++step_;
  }

  // Largest |signed sum| over all product members, right now. Uses a lazy
  // max-heap: stale entries are popped until the top matches a live sum.
  std::int64_t current_max_abs() const {
    while (!heap_.empty()) {
      const auto [value, key] = heap_.top();
      const auto it = histories_.find(key);
      if (it != histories_.end() && std::abs(it->second.current()) == value)
        return value;
      heap_.pop();
    }
    return 0;
  }

  std::int64_t sum_at(std::uint64_t key, std::int64_t step) const {
    const auto it = histories_.find(key);
    return it == histories_.end() ? 0 : it->second.at(step);
  }

  std::int64_t current_sum(std::uint64_t key) const {
    const auto it = histories_.find(key);
    return it == histories_.end() ? 0 : it->second.current();
  }

  static std::uint64_t pack_key(const std::array<std::int64_t, 4>& ids, int d) {
    std::uint64_t key = 0;
    for (int k = 0; k < d; ++k)
      key |= static_cast<std::uint64_t>(ids[static_cast<std::size_t>(k)])
             << (16 * k);
    return key;
  }

  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::vector<std::int8_t>& signs() const { return signs_; }
  const std::vector<std::int32_t>& cell_members(int k, std::int64_t cell) const {
    SBWALK_ASSERT(k >= 0 && k < d_, "dimension out of range");
    return cell_points_[static_cast<std::size_t>(k)][static_cast<std::size_t>(cell)];
  }

  // Parent sum == left child + right child along every dimension of every
  // stored key (missing children count as zero).
  bool level_consistent() const {
    for (const auto& [key, history] : histories_) {
      for (int k = 0; k < d_; ++k) {
        const std::int64_t id =
            static_cast<std::int64_t>((key >> (16 * k)) & 0xFFFF);
        if (id >= schemes_[static_cast<std::size_t>(k)].cells()) continue;
        const std::uint64_t base =
            key & ~(std::uint64_t{0xFFFF} << (16 * k));
        const std::uint64_t left =
            base | (static_cast<std::uint64_t>(2 * id) << (16 * k));
        const std::uint64_t right =
            base | (static_cast<std::uint64_t>(2 * id + 1) << (16 * k));
        if (history.current() != current_sum(left) + current_sum(right))
          return false;
      }
    }
    return true;
  }

 private:
  template <typename Fn>
  void for_each_ancestor_tuple(const std::array<std::int64_t, 4>& cells,
                               Fn&& fn) const {
    std::array<std::vector<std::int64_t>, 4> ancestors;
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < d_; ++k)
      ancestors[static_cast<std::size_t>(k)] =
          schemes_[static_cast<std::size_t>(k)].ancestors(
              cells[static_cast<std::size_t>(k)]);
    while (true) {
      std::array<std::int64_t, 4> ids{};
      for (int k = 0; k < d_; ++k)
        ids[static_cast<std::size_t>(k)] =
            ancestors[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
      fn(pack_key(ids, d_));
      int k = 0;
      while (k < d_) {
        auto& i = idx[static_cast<std::size_t>(k)];
        if (++i < ancestors[static_cast<std::size_t>(k)].size()) break;
        i = 0;
        ++k;
      }
      if (k == d_) break;
    }
  }

  std::vector<DyadicScheme> schemes_;
  int d_ = 0;
  std::int64_t step_ = 0;
  std::unordered_map<std::uint64_t, NodeHistory> histories_;
  mutable std::priority_queue<std::pair<std::int64_t, std::uint64_t>> heap_;
  std::vector<Eigen::VectorXd> points_;
  std::vector<std::int8_t> signs_;
  std::vector<std::vector<std::vector<std::int32_t>>> cell_points_;
};

/// Signed count over the box prod_k [lo_k, hi_k) as of at_step (hi_k = 1
/// closed). Interior mass comes from at most (2(K+1))^d dyadic product
/// members; points with any coordinate in a partial boundary cell are
/// scanned exactly.
inline std::int64_t query_box(const BoxTracker& tracker,
                              const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi,
                              std::int64_t at_step) {
  const int d = tracker.dims();
  if (lo.size() != d || hi.size() != d)
    throw ValidationError("query_box: bound dimension mismatch");
  if (at_step <= 0) return 0;
  std::array<std::int64_t, 4> lo_cell{};
  std::array<std::int64_t, 4> hi_cell{};
  std::array<bool, 4> closed{};
  for (int k = 0; k < d; ++k) {
    detail::check_query_range(lo[k], hi[k]);
    if (lo[k] == hi[k]) return 0;
    const DyadicScheme& scheme = tracker.scheme(k);
    closed[static_cast<std::size_t>(k)] = hi[k] == 1.0;
    lo_cell[static_cast<std::size_t>(k)] = scheme.locate_cell(lo[k]);
    hi_cell[static_cast<std::size_t>(k)] = closed[static_cast<std::size_t>(k)]
                                               ? scheme.cells() - 1
                                               : scheme.locate_cell(hi[k]);
  }

  // Full interior: the product of each dimension's maximal dyadic cover.
  std::array<std::vector<std::int64_t>, 4> full;
  bool has_interior = true;
  for (int k = 0; k < d; ++k) {
    full[static_cast<std::size_t>(k)] = tracker.scheme(k).decompose(
        lo_cell[static_cast<std::size_t>(k)] + 1,
        hi_cell[static_cast<std::size_t>(k)] - 1);
    if (full[static_cast<std::size_t>(k)].empty()) has_interior = false;
  }
  std::int64_t total = 0;
  if (has_interior) {
    std::array<std::size_t, 4> idx{};
    while (true) {
      std::array<std::int64_t, 4> ids{};
      for (int k = 0; k < d; ++k)
        ids[static_cast<std::size_t>(k)] =
            full[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
      total += tracker.sum_at(BoxTracker::pack_key(ids, d), at_step);
      int k = 0;
      while (k < d) {
        auto& i = idx[static_cast<std::size_t>(k)];
        if (++i < full[static_cast<std::size_t>(k)].size()) break;
        i = 0;
        ++k;
      }
      if (k == d) break;
    }
  }

  // Boundary: any point with some coordinate in a partial cell, scanned
  // exactly (deduplicated across dimensions).
  std::vector<std::int32_t> candidates;
  for (int k = 0; k < d; ++k) {
    const auto& first =
        tracker.cell_members(k, lo_cell[static_cast<std::size_t>(k)]);
    candidates.insert(candidates.end(), first.begin(), first.end());
    if (hi_cell[static_cast<std::size_t>(k)] !=
        lo_cell[static_cast<std::size_t>(k)]) {
      const auto& second =
          tracker.cell_members(k, hi_cell[static_cast<std::size_t>(k)]);
      candidates.insert(candidates.end(), second.begin(), second.end());
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  const auto& points = tracker.points();
  const auto& signs = tracker.signs();
  for (std::int32_t index : candidates) {
    if (static_cast<std::int64_t>(index) >= at_step) continue;  // step = index+1
    const Eigen::VectorXd& p = points[static_cast<std::size_t>(index)];
    bool inside = true;
    for (int k = 0; k < d && inside; ++k) {
      if (p[k] < lo[k]) inside = false;
      if (!closed[static_cast<std::size_t>(k)] && p[k] >= hi[k]) inside = false;
    }
    if (inside) total += signs[static_cast<std::size_t>(index)];
  }
  return total;
}

// --- point embeddings -------------------------------------------------------

// Unit-l2 sparse indicator of the d(K+1) family members containing x. All
// nonzero coordinates equal `scale` = 1/sqrt(d(K+1)).
struct IntervalEmbedding {
  std::vector<std::pair<int, std::int64_t>> support;  // (dimension, node id)
  double scale = 0.0;
  std::int64_t ambient_dim = 0;  // d * (2^(K+1) - 1)
};

inline IntervalEmbedding embed_point_intervals(const Eigen::VectorXd& x,
                                               const DyadicScheme& scheme) {
  const int d = static_cast<int>(x.size());
  if (d <= 0) throw ValidationError("embed: empty point");
  IntervalEmbedding out;
  out.scale = 1.0 / std::sqrt(static_cast<double>(d) * (scheme.K + 1));
  out.ambient_dim = static_cast<std::int64_t>(d) * scheme.family_size();
  out.support.reserve(static_cast<std::size_t>(d) * (scheme.K + 1));
  for (int k = 0; k < d; ++k)
    for (std::int64_t id : scheme.ancestors(scheme.locate_cell(x[k])))
      out.support.emplace_back(k, id);
  return out;
}

// Unit-l2 sparse indicator of the prod_k (K_k+1) product members containing
// x, keyed like BoxTracker.
struct BoxEmbedding {
  std::vector<std::uint64_t> keys;
  double scale = 0.0;
  double log_ambient_dim = 0.0;  // ln prod_k (2^(K_k+1) - 1)
};

inline BoxEmbedding embed_point_boxes(const Eigen::VectorXd& x,
                                      const std::vector<DyadicScheme>& schemes) {
  const int d = static_cast<int>(schemes.size());
  if (d <= 0 || d > 4)
    throw ValidationError("embed_point_boxes: needs 1 <= d <= 4");
  if (x.size() != d)
    throw ValidationError("embed_point_boxes: point dimension mismatch");
  BoxEmbedding out;
  double count = 1.0;
  for (const auto& s : schemes) {
    if (s.K > 15)
      throw ValidationError("embed_point_boxes: scheme depth K > 15");
    count *= static_cast<double>(s.K + 1);
    out.log_ambient_dim += std::log(static_cast<double>(s.family_size()));
  }
  out.scale = 1.0 / std::sqrt(count);
  std::array<std::vector<std::int64_t>, 4> ancestors;
  for (int k = 0; k < d; ++k)
    ancestors[static_cast<std::size_t>(k)] =
        schemes[static_cast<std::size_t>(k)].ancestors(
            schemes[static_cast<std::size_t>(k)].locate_cell(x[k]));
  std::array<std::size_t, 4> idx{};
  out.keys.reserve(static_cast<std::size_t>(count));
  while (true) {
    std::array<std::int64_t, 4> ids{};
    for (int k = 0; k < d; ++k)
      ids[static_cast<std::size_t>(k)] =
          ancestors[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
    out.keys.push_back(BoxTracker::pack_key(ids, d));
    int k = 0;
    while (k < d) {
      auto& i = idx[static_cast<std::size_t>(k)];
      if (++i < ancestors[static_cast<std::size_t>(k)].size()) break;
      i = 0;
      ++k;
    }
    if (k == d) break;
  }
  return out;
}

// --- runners -----------------------------------------------------------------

enum class SigningRule { kBalance, kRandom };

/// Outcome of one geometry run. The walk executes over the embedded
/// coordinate space but keeps its state inside the tracker (exact integer
/// sums), so trace.final_w stays empty here. The bias rule and the failure
/// checks act on the unscaled signed sums against c, which is how the
/// reduction applies the walk to the ±indicator embedding; the unit-scaled
/// view of the same trajectory is reported in trace.sup_norms.
struct IntervalRunResult {
  std::vector<std::int8_t> signs;  // alias of trace.signs, per the interface
  IntervalTracker tracker;
  WalkTrace trace;
  std::vector<std::int64_t> max_abs_per_step;  // unscaled max member |sum|
  double c = 0.0;
  double scale = 0.0;
  std::int64_t embedded_dim = 0;
};

struct BoxRunResult {
  std::vector<std::int8_t> signs;
  BoxTracker tracker;
  WalkTrace trace;
  std::vector<std::int64_t> max_abs_per_step;
  double c = 0.0;
  double scale = 0.0;
  double log_embedded_dim = 0.0;
};

namespace detail {

// Point providers: online sampling from a known distribution, or replay of a
// fixed list. Sampling uses a stream derived from (but distinct from) the
// walk's seed so signs never influence the points.
class SampledPoints {
 public:
  SampledPoints(const ProductDistribution& dist, std::uint64_t seed)
      : dist_(&dist), rng_(splitmix64_mix(seed)) {}
  Eigen::VectorXd operator()(std::int64_t) { return dist_->sample(rng_); }

 private:
  const ProductDistribution* dist_;
  RandomStream rng_;
};

class ReplayPoints {
 public:
  explicit ReplayPoints(const std::vector<Eigen::VectorXd>& points)
      : points_(&points) {}
  const Eigen::VectorXd& operator()(std::int64_t i) const {
    return (*points_)[static_cast<std::size_t>(i - 1)];
  }

 private:
  const std::vector<Eigen::VectorXd>* points_;
};

template <typename Provider>
IntervalRunResult run_interval_core(Provider&& next_point, int d,
                                    std::int64_t t, DyadicScheme scheme,
                                    double delta, std::uint64_t seed,
                                    SigningRule rule) {
  if (t <= 0) throw ValidationError("interval run: t must be positive");
  IntervalRunResult out{std::vector<std::int8_t>{},
                        IntervalTracker(std::move(scheme), d),
                        WalkTrace{},
                        {},
                        0.0,
                        0.0,
                        0};
  const DyadicScheme& sch = out.tracker.scheme();
  out.embedded_dim = static_cast<std::int64_t>(d) * sch.family_size();
  out.c = compute_c(out.embedded_dim, t, delta);
  out.scale = 1.0 / std::sqrt(static_cast<double>(d) * (sch.K + 1));
  WalkTrace& trace = out.trace;
  trace.seed = seed;
  RandomStream rng(seed);
  std::vector<std::int64_t> cells(static_cast<std::size_t>(d));
  for (std::int64_t i = 1; i <= t; ++i) {
    const Eigen::VectorXd& x = next_point(i);
    if (x.size() != d)
      throw ValidationError("interval run: point dimension mismatch");
    std::int64_t raw_inner = 0;
    for (int k = 0; k < d; ++k) {
      cells[static_cast<std::size_t>(k)] = sch.locate_cell(x[k]);
      raw_inner +=
          out.tracker.ancestor_sum(k, cells[static_cast<std::size_t>(k)]);
    }
    const double inner = static_cast<double>(raw_inner);
    trace.inners.push_back(inner);
    trace.max_inner = std::max(trace.max_inner, std::abs(inner));
    const double u = rng.next_u01();
    double p = 0.5;
    if (rule == SigningRule::kBalance) {
      const double sup = static_cast<double>(out.tracker.current_max_abs());
      if (std::abs(inner) > out.c || sup > out.c) {
        trace.failed = true;
        trace.fail_step = i;
        break;
      }
      p = sign_probability_from_inner(inner, out.c);
    }
    const int sign = draw_sign(p, u);
    out.tracker.insert(x, sign, i);
    trace.signs.push_back(static_cast<std::int8_t>(sign));
    out.max_abs_per_step.push_back(out.tracker.current_max_abs());
    trace.sup_norms.push_back(out.scale *
                              static_cast<double>(out.max_abs_per_step.back()));
  }
  out.signs = trace.signs;
  return out;
}

template <typename Provider>
BoxRunResult run_tusnady_core(Provider&& next_point, int d, std::int64_t t,
                              const DyadicScheme& scheme, double delta,
                              std::uint64_t seed, SigningRule rule) {
  if (t <= 0) throw ValidationError("box run: t must be positive");
  BoxRunResult out{std::vector<std::int8_t>{},
                   BoxTracker(std::vector<DyadicScheme>(
                       static_cast<std::size_t>(d), scheme)),
                   WalkTrace{},
                   {},
                   0.0,
                   0.0,
                   0.0};
  out.log_embedded_dim = out.tracker.log_family_size();
  out.c = compute_c_from_log(out.log_embedded_dim, t, delta);
  out.scale = out.tracker.embedding_scale();
  WalkTrace& trace = out.trace;
  trace.seed = seed;
  RandomStream rng(seed);
  for (std::int64_t i = 1; i <= t; ++i) {
    const Eigen::VectorXd& x = next_point(i);
    if (x.size() != d)
      throw ValidationError("box run: point dimension mismatch");
    std::array<std::int64_t, 4> cells{};
    for (int k = 0; k < d; ++k)
      cells[static_cast<std::size_t>(k)] =
          out.tracker.scheme(k).locate_cell(x[k]);
    const std::int64_t raw_inner = out.tracker.ancestor_product_sum(cells);
    const double inner = static_cast<double>(raw_inner);
    trace.inners.push_back(inner);
    trace.max_inner = std::max(trace.max_inner, std::abs(inner));
    const double u = rng.next_u01();
    double p = 0.5;
    if (rule == SigningRule::kBalance) {
      const double sup = static_cast<double>(out.tracker.current_max_abs());
      if (std::abs(inner) > out.c || sup > out.c) {
        trace.failed = true;
        trace.fail_step = i;
        break;
      }
      p = sign_probability_from_inner(inner, out.c);
    }
    const int sign = draw_sign(p, u);
    out.tracker.insert(x, sign, i);
    trace.signs.push_back(static_cast<std::int8_t>(sign));
    out.max_abs_per_step.push_back(out.tracker.current_max_abs());
    trace.sup_norms.push_back(out.scale *
                              static_cast<double>(out.max_abs_per_step.back()));
  }
  out.signs = trace.signs;
  return out;
}

}  // namespace detail

/// Online interval discrepancy with a known distribution: the quantile grid
/// and scheme are built from the exact quantiles before any point arrives,
/// then t points are sampled online and signed.
inline IntervalRunResult run_interval_discrepancy(
    const ProductDistribution& dist, std::int64_t t, double delta,
    std::uint64_t seed, SigningRule rule = SigningRule::kBalance) {
  const QuantileGrid grid = build_quantile_grid(dist, t);
  detail::SampledPoints provider(dist, seed);
  return detail::run_interval_core(provider, dist.dim(), t,
                                   build_dyadic_scheme(grid), delta, seed,
                                   rule);
}

/// Online interval discrepancy over a fixed point list with a prebuilt grid.
inline IntervalRunResult run_interval_discrepancy(
    const std::vector<Eigen::VectorXd>& points, const QuantileGrid& grid,
    double delta, std::uint64_t seed,
    SigningRule rule = SigningRule::kBalance) {
  if (points.empty()) throw ValidationError("interval run: no points");
  detail::ReplayPoints provider(points);
  return detail::run_interval_core(provider, grid.d,
                                   static_cast<std::int64_t>(points.size()),
                                   build_dyadic_scheme(grid), delta, seed,
                                   rule);
}

/// Offline variant: quantiles come from the point set itself.
inline IntervalRunResult run_interval_discrepancy_offline(
    const std::vector<Eigen::VectorXd>& points, int d, double delta,
    std::uint64_t seed, SigningRule rule = SigningRule::kBalance) {
  const QuantileGrid grid = build_quantile_grid_from_points(points, d);
  return run_interval_discrepancy(points, grid, delta, seed, rule);
}

inline BoxRunResult run_tusnady(const ProductDistribution& dist,
                                std::int64_t t, double delta,
                                std::uint64_t seed,
                                SigningRule rule = SigningRule::kBalance) {
  const QuantileGrid grid = build_quantile_grid(dist, t);
  detail::SampledPoints provider(dist, seed);
  return detail::run_tusnady_core(provider, dist.dim(), t,
                                  build_dyadic_scheme(grid), delta, seed, rule);
}

inline BoxRunResult run_tusnady(const std::vector<Eigen::VectorXd>& points,
                                const QuantileGrid& grid, double delta,
                                std::uint64_t seed,
                                SigningRule rule = SigningRule::kBalance) {
  if (points.empty()) throw ValidationError("box run: no points");
  detail::ReplayPoints provider(points);
  return detail::run_tusnady_core(provider, grid.d,
                                  static_cast<std::int64_t>(points.size()),
                                  build_dyadic_scheme(grid), delta, seed, rule);
}

inline BoxRunResult run_tusnady_offline(
    const std::vector<Eigen::VectorXd>& points, int d, double delta,
    std::uint64_t seed, SigningRule rule = SigningRule::kBalance) {
  const QuantileGrid grid = build_quantile_grid_from_points(points, d);
  return run_tusnady(points, grid, delta, seed, rule);
}

// --- brute-force rescan oracles ---------------------------------------------

// Same membership convention as the queries: [alpha, beta), beta = 1 closed.
inline bool in_range(double x, double lo, double hi) {
  if (x < lo) return false;
  return hi == 1.0 ? x <= 1.0 : x < hi;
}

inline std::int64_t count_interval(const std::vector<Eigen::VectorXd>& points,
                                   const std::vector<std::int8_t>& signs,
                                   int k, double alpha, double beta,
                                   std::int64_t at_step) {
  detail::check_query_range(alpha, beta);
  if (alpha == beta) return 0;
  const std::int64_t limit =
      std::min<std::int64_t>(static_cast<std::int64_t>(signs.size()), at_step);
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < limit; ++i)
    if (in_range(points[static_cast<std::size_t>(i)][k], alpha, beta))
      total += signs[static_cast<std::size_t>(i)];
  return total;
}

inline std::int64_t count_box(const std::vector<Eigen::VectorXd>& points,
                              const std::vector<std::int8_t>& signs,
                              const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi,
                              std::int64_t at_step) {
  for (int k = 0; k < lo.size(); ++k) {
    detail::check_query_range(lo[k], hi[k]);
    if (lo[k] == hi[k]) return 0;
  }
  const std::int64_t limit =
      std::min<std::int64_t>(static_cast<std::int64_t>(signs.size()), at_step);
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < limit; ++i) {
    const Eigen::VectorXd& p = points[static_cast<std::size_t>(i)];
    bool inside = true;
    for (int k = 0; k < lo.size() && inside; ++k)
      inside = in_range(p[k], lo[k], hi[k]);
    if (inside) total += signs[static_cast<std::size_t>(i)];
  }
  return total;
}

}  // namespace sbwalk

#endif  // SBWALK_GEOMETRY_HPP
