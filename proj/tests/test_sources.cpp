#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "sbwalk/sources.hpp"

using namespace sbwalk;

TEST_CASE("repeated basis source emits e1 forever and stays oblivious") {
  RepeatedBasisSource source(4);
  CHECK(source.dim() == 4);
  CHECK_FALSE(source.adaptive());
  const Eigen::VectorXd& v = source.next(nullptr);
  CHECK(v[0] == 1.0);
  CHECK(v.norm() == 1.0);
  CHECK(source.next(nullptr)[0] == 1.0);

  Eigen::VectorXd state = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(source.next(&state), ValidationError);
}

TEST_CASE("fixed list source replays and guards obliviousness") {
  std::vector<Eigen::VectorXd> vectors(2, Eigen::VectorXd::Unit(2, 0));
  FixedListSource source(vectors);
  CHECK(source.kind() == SourceKind::kFixedList);
  CHECK_NOTHROW(source.next(nullptr));
  Eigen::VectorXd state = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(source.next(&state), ValidationError);
  source.reset();
  CHECK(source.next(nullptr)[0] == 1.0);
}

TEST_CASE("iid cube sampler: range, norm, determinism, reset") {
  const int n = 9;
  IidSamplerSource source(n, IidDistribution::kUniformCube, 55);
  const double bound = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<Eigen::VectorXd> first;
  for (int i = 0; i < 8; ++i) {
    const Eigen::VectorXd v = source.next(nullptr);
    first.push_back(v);
    CHECK(v.norm() <= 1.0 + 1e-12);
    for (int j = 0; j < n; ++j) {
      CHECK(v[j] >= -bound);
      CHECK(v[j] <= bound);
    }
  }
  source.reset();
  for (int i = 0; i < 8; ++i)
    CHECK((source.next(nullptr) - first[static_cast<std::size_t>(i)]).norm() ==
          0.0);
  IidSamplerSource other(n, IidDistribution::kUniformCube, 56);
  CHECK((other.next(nullptr) - first[0]).norm() > 0.0);
}

TEST_CASE("iid sphere sampler emits exact unit vectors") {
  IidSamplerSource source(6, IidDistribution::kUniformSphere, 3);
  for (int i = 0; i < 16; ++i)
    CHECK(source.next(nullptr).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sparse-sign sampler: s distinct entries of +-1/sqrt(s)") {
  const int n = 32, s = 5;
  IidSamplerSource source(n, IidDistribution::kSparseSigns, 12, s);
  const double value = 1.0 / std::sqrt(static_cast<double>(s));
  for (int i = 0; i < 32; ++i) {
    const Eigen::VectorXd v = source.next(nullptr);
    std::set<int> rows;
    for (int j = 0; j < n; ++j) {
      if (v[j] == 0.0) continue;
      rows.insert(j);
      CHECK(std::abs(v[j]) == doctest::Approx(value).epsilon(1e-15));
    }
    CHECK(rows.size() == s);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("adaptive orthogonal source needs state and yields sqrt(t) growth") {
  AdaptiveOrthogonalSource source(8);
  CHECK(source.adaptive());
  CHECK_THROWS_AS(source.next(nullptr), ValidationError);
  CHECK_THROWS_AS(AdaptiveOrthogonalSource(1), ValidationError);

  // Whatever signs are chosen, each step adds a unit vector orthogonal to w:
  // ||w_t||^2 = t exactly.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(8);
  RandomStream rng(5);
  for (int i = 1; i <= 100; ++i) {
    const Eigen::VectorXd v = source.next(&w);
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v.dot(w)) < 1e-9);
    w += (rng.next_u01() < 0.5 ? 1.0 : -1.0) * v;
    CHECK(w.squaredNorm() == doctest::Approx(static_cast<double>(i)).epsilon(1e-9));
  }
}

TEST_CASE("make_source builds every kind and rejects unknown ones") {
  SourceSpec spec;
  spec.n = 4;

  spec.kind = "repeated-basis";
  CHECK(make_source(spec)->kind() == SourceKind::kRepeatedBasis);

  spec.kind = "iid";
  spec.distribution = "sphere";
  CHECK(make_source(spec)->kind() == SourceKind::kIidSampler);

  spec.kind = "sparse";
  spec.s = 2;
  CHECK(make_source(spec)->kind() == SourceKind::kSparseRandom);

  spec.kind = "adaptive";
  CHECK(make_source(spec)->adaptive());

  spec.kind = "bogus";
  CHECK_THROWS_AS(make_source(spec), ValidationError);

  CHECK_THROWS_AS(parse_iid_distribution("triangle"), ValidationError);
  CHECK(parse_iid_distribution("cube") == IidDistribution::kUniformCube);
}
