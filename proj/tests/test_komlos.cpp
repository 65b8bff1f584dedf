#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "sbwalk/komlos.hpp"
#include "sbwalk/rng.hpp"
#include "sbwalk/sparse.hpp"

using namespace sbwalk;

namespace {

// Random matrix with s-sparse unit columns: s distinct rows, values +-1/sqrt(s).
SparseColumnMatrix random_sparse(int n, std::int64_t t, int s,
                                 std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<SparseVector> columns;
  columns.reserve(static_cast<std::size_t>(t));
  const double value = 1.0 / std::sqrt(static_cast<double>(s));
  std::vector<std::int32_t> rows(static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < t; ++j) {
    for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    SparseVector col;
    for (int i = 0; i < s; ++i) {
      const std::size_t pick =
          static_cast<std::size_t>(i) +
          static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(n - i)));
      std::swap(rows[static_cast<std::size_t>(i)], rows[pick]);
      col.push_back({rows[static_cast<std::size_t>(i)],
                     rng.next_u01() < 0.5 ? value : -value});
    }
    std::sort(col.begin(), col.end(),
              [](const SparseEntry& a, const SparseEntry& b) {
                return a.row < b.row;
              });
    columns.push_back(std::move(col));
  }
  return SparseColumnMatrix(n, std::move(columns));
}

}  // namespace

TEST_CASE("c and the final threshold match the closed forms") {
  // t/delta = 1e9 and n = 100: c = 30 ln(1e9), threshold = sqrt(8cL ln 100).
  const SparseColumnMatrix A = random_sparse(100, 10, 4, 5);
  const KomlosResult r = run_komlos(A, 1e-8, 13);
  CHECK(r.c == doctest::Approx(621.69797510839233).epsilon(1e-14));
  CHECK(r.threshold == doctest::Approx(379.35647073724613).epsilon(1e-13));
}

TEST_CASE("delta defaults to t^-2") {
  const SparseColumnMatrix A = random_sparse(16, 50, 3, 7);
  const KomlosResult r = run_komlos(A, 99);
  CHECK(r.delta == doctest::Approx(1.0 / 2500.0).epsilon(1e-15));
  CHECK(r.c == doctest::Approx(30.0 * std::log(50.0 * 2500.0)).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
  const SparseColumnMatrix A = random_sparse(8, 4, 2, 1);
  CHECK_THROWS_AS(run_komlos(A, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(run_komlos(A, 1.0, 1), ConfigError);
  // t/delta barely above 1 gives c < 1.
  const SparseColumnMatrix B = random_sparse(8, 1, 2, 1);
  CHECK_THROWS_AS(run_komlos(B, 0.99, 1), ConfigError);
}

TEST_CASE("touched-entry counter is exactly 2*nnz") {
  const SparseColumnMatrix A = random_sparse(64, 200, 5, 11);
  REQUIRE(A.nnz() == 1000);
  const KomlosResult r = run_komlos(A, 1e-4, 3);
  CHECK(r.touched_entries == 2 * A.nnz());
  CHECK(r.nnz == A.nnz());
}

TEST_CASE("the signing is complete, deterministic, and audited correctly") {
  const SparseColumnMatrix A = random_sparse(32, 100, 4, 21);
  const KomlosResult a = run_komlos(A, 1e-4, 77);
  const KomlosResult b = run_komlos(A, 1e-4, 77);
  REQUIRE(a.x.size() == 100);
  CHECK(a.x == b.x);
  for (std::int8_t s : a.x) CHECK((s == +1 || s == -1));

  // Recompute ||Ax||inf densely.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(32);
  for (std::int64_t j = 0; j < A.cols(); ++j)
    for (const SparseEntry& e : A.column(j))
      w[e.row] += static_cast<double>(a.x[static_cast<std::size_t>(j)]) * e.value;
  CHECK(a.final_sup_norm ==
        doctest::Approx(w.lpNorm<Eigen::Infinity>()).epsilon(1e-12));
  CHECK(a.incremental_sup_norm ==
        doctest::Approx(a.final_sup_norm).epsilon(1e-12));
  CHECK(a.exceeded_final == (a.final_sup_norm > a.threshold));
  CHECK_FALSE(a.failed_midrun);
  CHECK(a.seed == 77);
}

TEST_CASE("different seeds give different signings") {
  const SparseColumnMatrix A = random_sparse(32, 64, 4, 2);
  const KomlosResult a = run_komlos(A, 1e-4, 1);
  const KomlosResult b = run_komlos(A, 1e-4, 2);
  CHECK(a.x != b.x);
}

TEST_CASE("the walk stays under the audit threshold at realistic sizes") {
  // 20 independent instances; c is generous, failures should be absent.
  int bad = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const SparseColumnMatrix A = random_sparse(64, 512, 8, 100 + i);
    const KomlosResult r = run_komlos(A, trial_seed(9, i));
    if (r.failed_midrun || r.exceeded_final) ++bad;
  }
  CHECK(bad == 0);
}
