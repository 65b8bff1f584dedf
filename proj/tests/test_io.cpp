#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <system_error>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sbwalk/geometry.hpp"
#include "sbwalk/io.hpp"

using namespace sbwalk;

namespace {

class TempFile {
 public:
  explicit TempFile(const std::string& name)
      : path_((std::filesystem::temp_directory_path() /
               ("sbwalk_test_" + name))
                  .string()) {}
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }
  void fill(const std::string& content) const {
    std::ofstream out(path_);
    out << content;
  }
  std::string slurp() const {
    std::ifstream in(path_);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  std::string path_;
};

}  // namespace

TEST_CASE("format_double round-trips doubles exactly") {
  for (double x : {1.0 / 3.0, 0.1, 1e300, 4.9406564584124654e-324, 0.0, -2.5}) {
    const std::string text = format_double(x);
    double parsed = 42.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), parsed);
    CHECK(result.ec == std::errc{});
    CHECK(parsed == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("dense stream: write/read round-trip") {
  TempFile file("dense.txt");
  std::vector<Eigen::VectorXd> vectors;
  Eigen::VectorXd a(2), b(2), c(2);
  a << 1.0 / 3.0, -0.25;
  b << 0.0, 1.0;
  c << 0.70710678118654752, 0.70710678118654752;
  vectors = {a, b, c};
  write_dense_stream(file.path(), vectors);

  const DenseStreamFile got = read_dense_stream(file.path());
  CHECK(got.n == 2);
  CHECK(got.t == 3);
  REQUIRE(got.vectors.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK((got.vectors[static_cast<std::size_t>(i)] -
           vectors[static_cast<std::size_t>(i)])
              .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("dense stream: comments and blank lines are skipped") {
  TempFile file("dense_comments.txt");
  file.fill("# vectors below\n\n2 2\n0.5 0.5\n\n# interlude\n-0.5 0.25\n");
  const DenseStreamFile got = read_dense_stream(file.path());
  CHECK(got.t == 2);
  CHECK(got.vectors[1][0] == -0.5);
}

TEST_CASE("dense stream: malformed inputs fail with location info") {
  TempFile file("dense_bad.txt");

  file.fill("");
  CHECK_THROWS_AS(read_dense_stream(file.path()), ValidationError);

  file.fill("2 0\n");
  CHECK_THROWS_AS(read_dense_stream(file.path()), ValidationError);

  file.fill("2 2\n0.5 0.5\n");  // too few rows
  CHECK_THROWS_AS(read_dense_stream(file.path()), ValidationError);

  file.fill("1 1\n0.5 0.5\n");  // trailing token on a row
  CHECK_THROWS_AS(read_dense_stream(file.path()), ValidationError);

  file.fill("1 1\nabc\n");
  CHECK_THROWS_WITH_AS(read_dense_stream(file.path()), doctest::Contains(":2:"),
                       ValidationError);

  CHECK_THROWS_AS(read_dense_stream("/nonexistent/file.txt"), IoError);
}

TEST_CASE("point files stay inside the unit cube") {
  TempFile file("points.txt");
  file.fill("2 1\n0.5 1.5\n");
  CHECK_THROWS_AS(read_points(file.path()), ValidationError);
  file.fill("2 2\n0.5 0.25\n1 0\n");
  const PointSetFile got = read_points(file.path());
  CHECK(got.d == 2);
  CHECK(got.t == 2);
  CHECK(got.points[1][0] == 1.0);

  TempFile out("points_out.txt");
  write_points(out.path(), got.points);
  const PointSetFile again = read_points(out.path());
  CHECK((again.points[0] - got.points[0]).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("MatrixMarket: round-trip and per-column row sorting") {
  TempFile file("matrix.mtx");
  file.fill(
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment line\n"
      "3 2 4\n"
      "3 1 0.5\n"
      "1 1 0.5\n"
      "2 2 0.6\n"
      "3 2 -0.8\n");
  const SparseColumnMatrix A = read_matrix_market(file.path());
  CHECK(A.rows() == 3);
  CHECK(A.cols() == 2);
  CHECK(A.nnz() == 4);
  // Column 0 was given out of order; the reader sorts by row.
  REQUIRE(A.column(0).size() == 2);
  CHECK(A.column(0)[0].row == 0);
  CHECK(A.column(0)[1].row == 2);

  TempFile out("matrix_out.mtx");
  write_matrix_market(out.path(), A);
  const SparseColumnMatrix B = read_matrix_market(out.path());
  CHECK(B.nnz() == A.nnz());
  CHECK(B.column(1)[1].value == A.column(1)[1].value);
}

TEST_CASE("MatrixMarket: banner and bounds are enforced") {
  TempFile file("bad.mtx");
  file.fill("%%MatrixMarket matrix array real general\n2 2 1\n1 1 0.5\n");
  CHECK_THROWS_AS(read_matrix_market(file.path()), ValidationError);

  file.fill("%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 0.5\n");
  CHECK_THROWS_AS(read_matrix_market(file.path()), ValidationError);  // 1-based

  file.fill("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 0.5\n");
  CHECK_THROWS_AS(read_matrix_market(file.path()), ValidationError);

  file.fill("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 0.9\n2 1 0.9\n");
  CHECK_THROWS_AS(read_matrix_market(file.path()), ValidationError);  // norm > 1
}

TEST_CASE("trace CSV golden output") {
  WalkTrace trace;
  trace.signs = {+1, -1};
  trace.sup_norms = {1.0, 0.5};
  trace.inners = {0.0, 0.25};
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(out.str() ==
        "step,sign,sup_norm,inner_product\n"
        "1,1,1,0\n"
        "2,-1,0.5,0.25\n");
}

TEST_CASE("sign files hold one sign per line") {
  TempFile file("signs.txt");
  write_signs(file.path(), {+1, -1, -1});
  CHECK(file.slurp() == "1\n-1\n-1\n");
}

TEST_CASE("komlos summary JSON is one ordered line") {
  KomlosResult r;
  r.c = 2.5;
  r.threshold = 1.5;
  r.final_sup_norm = 1.0;
  r.failed_midrun = false;
  r.exceeded_final = false;
  r.nnz = 3;
  r.seed = 9;
  CHECK(komlos_summary_json(r) ==
        "{\"c\":2.5,\"threshold\":1.5,\"final_sup_norm\":1.0,"
        "\"failed_midrun\":false,\"exceeded_final\":false,\"nnz\":3,"
        "\"seed\":9}");
}

TEST_CASE("tracker CSV lists every member per dimension") {
  const QuantileGrid grid =
      build_quantile_grid(ProductDistribution::uniform_cube(1), 2);
  IntervalTracker tracker(build_dyadic_scheme(grid), 1);
  Eigen::VectorXd p(1);
  p << 0.1;
  tracker.insert(p, +1, 1);
  std::ostringstream out;
  write_tracker_csv(out, tracker);
  CHECK(out.str() ==
        "level,index,signed_sum\n"
        "# dimension 0\n"
        "1,0,1\n"
        "0,0,1\n"
        "0,1,0\n");
}

TEST_CASE("query list parsing") {
  TempFile file("queries.txt");
  file.fill("# some queries\n0 0.25 0.75 10\n1 0 1 5\n");
  const auto qs = read_interval_queries(file.path());
  REQUIRE(qs.size() == 2);
  CHECK(qs[0].dim == 0);
  CHECK(qs[0].lo == 0.25);
  CHECK(qs[0].hi == 0.75);
  CHECK(qs[0].at == 10);
  CHECK(qs[1].dim == 1);

  file.fill("0 0.25\n");
  CHECK_THROWS_AS(read_interval_queries(file.path()), ValidationError);

  TempFile boxes("box_queries.txt");
  boxes.fill("0.1 0.9 0.2 0.8 16\n");
  const auto bq = read_box_queries(boxes.path(), 2);
  REQUIRE(bq.size() == 1);
  CHECK(bq[0].lo[1] == 0.2);
  CHECK(bq[0].hi[1] == 0.8);
  CHECK(bq[0].at == 16);
  boxes.fill("0.1 0.9 16\n");
  CHECK_THROWS_AS(read_box_queries(boxes.path(), 2), ValidationError);
}
