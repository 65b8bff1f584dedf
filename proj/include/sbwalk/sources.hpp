#ifndef SBWALK_SOURCES_HPP
#define SBWALK_SOURCES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sbwalk/errors.hpp"
#include "sbwalk/rng.hpp"
#include "sbwalk/walk.hpp"

namespace sbwalk {

enum class SourceKind {
  kFixedList,
  kIidSampler,
  kRepeatedBasis,
  kSparseRandom,
  kAdaptiveOrthogonal,
};

enum class IidDistribution {
  kUniformCube,   // coordinates U[-1,1], scaled by 1/sqrt(n)
  kUniformSphere, // uniform on the unit sphere
  kSparseSigns,   // s distinct coordinates set to +-1/sqrt(s)
};

/// Input-sequence generator. Oblivious kinds must be pulled with
/// state == nullptr; the adaptive kind requires the current running sum.
/// The returned reference stays valid until the next call.
class VectorSource {
 public:
  virtual ~VectorSource() = default;
  virtual int dim() const = 0;
  virtual SourceKind kind() const = 0;
  virtual bool adaptive() const { return false; }
  virtual const Eigen::VectorXd& next(const Eigen::VectorXd* state = nullptr) = 0;
  // Restart the sequence from the beginning (same seed, same vectors).
  virtual void reset() = 0;

 protected:
  void require_oblivious_call(const Eigen::VectorXd* state) const {
    if (state != nullptr)
      throw ValidationError(
          "oblivious source was handed algorithm state; the obliviousness "
          "contract forbids it");
  }
};

class FixedListSource final : public VectorSource {
 public:
  explicit FixedListSource(std::vector<Eigen::VectorXd> vectors)
      : vectors_(std::move(vectors)) {
    if (vectors_.empty())
      throw ValidationError("FixedListSource: empty vector list");
    for (const auto& v : vectors_)
      if (v.size() != vectors_.front().size())
        throw ValidationError("FixedListSource: inconsistent dimensions");
  }

  int dim() const override { return static_cast<int>(vectors_.front().size()); }
  SourceKind kind() const override { return SourceKind::kFixedList; }

  const Eigen::VectorXd& next(const Eigen::VectorXd* state) override {
    require_oblivious_call(state);
    SBWALK_ASSERT(index_ < vectors_.size(), "FixedListSource exhausted");
    return vectors_[index_++];
  }

  void reset() override { index_ = 0; }

 private:
  std::vector<Eigen::VectorXd> vectors_;
  std::size_t index_ = 0;
};

// e1 forever.
class RepeatedBasisSource final : public VectorSource {
 public:
  explicit RepeatedBasisSource(int n) : v_(Eigen::VectorXd::Zero(n)) {
    if (n <= 0) throw ValidationError("RepeatedBasisSource: n must be positive");
    v_[0] = 1.0;
  }

  int dim() const override { return static_cast<int>(v_.size()); }
  SourceKind kind() const override { return SourceKind::kRepeatedBasis; }

  const Eigen::VectorXd& next(const Eigen::VectorXd* state) override {
    require_oblivious_call(state);
    return v_;
  }

  void reset() override {}

 private:
  Eigen::VectorXd v_;
};

class IidSamplerSource final : public VectorSource {
 public:
  IidSamplerSource(int n, IidDistribution dist, std::uint64_t seed, int s = 0,
                   SourceKind kind = SourceKind::kIidSampler)
      : n_(n), dist_(dist), seed_(seed), s_(s), kind_(kind), rng_(seed),
        v_(Eigen::VectorXd::Zero(n)), perm_(n) {
    if (n <= 0) throw ValidationError("IidSamplerSource: n must be positive");
    if (dist == IidDistribution::kSparseSigns && (s <= 0 || s > n))
      throw ValidationError("IidSamplerSource: sparsity s must lie in [1,n]");
    for (int i = 0; i < n; ++i) perm_[i] = i;
  }

  int dim() const override { return n_; }
  SourceKind kind() const override { return kind_; }

  const Eigen::VectorXd& next(const Eigen::VectorXd* state) override {
    require_oblivious_call(state);
    switch (dist_) {
      case IidDistribution::kUniformCube: {
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
        for (int i = 0; i < n_; ++i)
          v_[i] = (2.0 * rng_.next_u01() - 1.0) * scale;
        break;
      }
      case IidDistribution::kUniformSphere: {
        double norm2 = 0.0;
        do {
          for (int i = 0; i < n_; ++i) v_[i] = rng_.next_gaussian();
          norm2 = v_.squaredNorm();
        } while (norm2 == 0.0);
        v_ /= std::sqrt(norm2);
        break;
      }
      case IidDistribution::kSparseSigns: {
        v_.setZero();
        const double mag = 1.0 / std::sqrt(static_cast<double>(s_));
        // Partial Fisher-Yates: first s_ entries of perm_ become the support.
        for (int i = 0; i < s_; ++i) {
          const int j =
              i + static_cast<int>(rng_.next_below(static_cast<std::uint64_t>(n_ - i)));
          std::swap(perm_[i], perm_[j]);
          v_[perm_[i]] = rng_.next_u01() < 0.5 ? mag : -mag;
        }
        break;
      }
    }
    return v_;
  }

  void reset() override { rng_ = RandomStream(seed_); }

 private:
  int n_;
  IidDistribution dist_;
  std::uint64_t seed_;
  int s_;
  SourceKind kind_;
  RandomStream rng_;
  Eigen::VectorXd v_;
  std::vector<int> perm_;
};

/// The adaptive adversary of the sqrt(t) lower bound: emits a unit vector
/// orthogonal to the observed running sum. Direction is deterministic: the
/// first basis vector in a fixed cycle with a nonzero rejection from w,
/// projected and normalized.
class AdaptiveOrthogonalSource final : public VectorSource {
 public:
  explicit AdaptiveOrthogonalSource(int n) : n_(n), v_(Eigen::VectorXd::Zero(n)) {
    if (n < 2)
      throw ValidationError(
          "AdaptiveOrthogonalSource: needs n >= 2 to stay orthogonal");
  }

  int dim() const override { return n_; }
  SourceKind kind() const override { return SourceKind::kAdaptiveOrthogonal; }
  bool adaptive() const override { return true; }

  const Eigen::VectorXd& next(const Eigen::VectorXd* state) override {
    if (state == nullptr)
      throw ValidationError(
          "AdaptiveOrthogonalSource: requires the current running sum");
    const Eigen::VectorXd& w = *state;
    SBWALK_ASSERT(w.size() == n_, "adaptive source dimension mismatch");
    const double wn2 = w.squaredNorm();
    for (int attempt = 0; attempt < n_; ++attempt) {
      const int j = cycle_ % n_;
      ++cycle_;
      if (wn2 == 0.0) {
        v_.setZero();
        v_[j] = 1.0;
        return v_;
      }
      v_ = -(w[j] / wn2) * w;
      v_[j] += 1.0;
      const double rn = v_.norm();
      if (rn > 1e-9) {
        v_ /= rn;
        return v_;
      }
    }
    throw std::logic_error("AdaptiveOrthogonalSource: no orthogonal direction");
  }

  void reset() override { cycle_ = 0; }

 private:
  int n_;
  Eigen::VectorXd v_;
  std::int64_t cycle_ = 0;
};

// CLI/config-facing specification of a source.
struct SourceSpec {
  std::string kind = "repeated-basis";  // repeated-basis|iid|sparse|adaptive|file
  int n = 0;
  int s = 0;
  std::string distribution = "cube";  // cube|sphere|sparse
  std::uint64_t seed = 0;
};

inline IidDistribution parse_iid_distribution(const std::string& name) {
  if (name == "cube") return IidDistribution::kUniformCube;
  if (name == "sphere") return IidDistribution::kUniformSphere;
  if (name == "sparse") return IidDistribution::kSparseSigns;
  throw ValidationError("unknown iid distribution: " + name);
}

inline std::unique_ptr<VectorSource> make_source(const SourceSpec& spec) {
  if (spec.kind == "repeated-basis")
    return std::make_unique<RepeatedBasisSource>(spec.n);
  if (spec.kind == "iid")
    return std::make_unique<IidSamplerSource>(
        spec.n, parse_iid_distribution(spec.distribution), spec.seed, spec.s);
  if (spec.kind == "sparse")
    return std::make_unique<IidSamplerSource>(spec.n,
                                              IidDistribution::kSparseSigns,
                                              spec.seed, spec.s,
                                              SourceKind::kSparseRandom);
  if (spec.kind == "adaptive")
    return std::make_unique<AdaptiveOrthogonalSource>(spec.n);
  throw ValidationError("unknown source kind: " + spec.kind);
}

}  // namespace sbwalk

#endif  // SBWALK_SOURCES_HPP
