#ifndef SBWALK_IO_HPP
#define SBWALK_IO_HPP

#include <Eigen/Dense>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sbwalk/errors.hpp"
#include "sbwalk/geometry.hpp"
#include "sbwalk/komlos.hpp"
#include "sbwalk/sparse.hpp"
#include "sbwalk/walk.hpp"

namespace sbwalk {

// Shortest round-trip decimal form; keeps CSV bodies byte-stable.
inline std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

[[noreturn]] inline void parse_fail(const std::string& path, std::int64_t line,
                                    const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw ValidationError(msg.str());
}

// Next line that is neither blank nor a '#'/'%' comment.
inline bool next_data_line(std::istream& in, std::string& line,
                           std::int64_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#' || line[pos] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace detail

// --- dense vector streams ----------------------------------------------------
// Format: first line "n t", then t lines of n whitespace-separated decimals.

struct DenseStreamFile {
  int n = 0;
  std::int64_t t = 0;
  std::vector<Eigen::VectorXd> vectors;
};

inline DenseStreamFile read_dense_stream(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  std::int64_t line_no = 0;
  if (!detail::next_data_line(in, line, line_no))
    detail::parse_fail(path, line_no, "missing \"n t\" header line");
  DenseStreamFile file;
  {
    std::istringstream header(line);
    if (!(header >> file.n >> file.t) || file.n <= 0 || file.t <= 0)
      detail::parse_fail(path, line_no, "header must be two positive integers");
    std::string extra;
    if (header >> extra)
      detail::parse_fail(path, line_no, "trailing tokens after \"n t\"");
  }
  file.vectors.reserve(static_cast<std::size_t>(file.t));
  for (std::int64_t i = 0; i < file.t; ++i) {
    if (!detail::next_data_line(in, line, line_no))
      detail::parse_fail(path, line_no, "expected " + std::to_string(file.t) +
                                            " vectors, file ended early");
    std::istringstream row(line);
    Eigen::VectorXd v(file.n);
    for (int j = 0; j < file.n; ++j)
      if (!(row >> v[j]))
        detail::parse_fail(path, line_no, "expected " + std::to_string(file.n) +
                                              " decimals on the line");
    std::string extra;
    if (row >> extra)
      detail::parse_fail(path, line_no, "trailing tokens after the vector");
    file.vectors.push_back(std::move(v));
  }
  return file;
}

inline void write_dense_stream(const std::string& path,
                               const std::vector<Eigen::VectorXd>& vectors) {
  if (vectors.empty()) throw ValidationError("write_dense_stream: no vectors");
  std::ofstream out = detail::open_output(path);
  const auto n = vectors.front().size();
  out << n << " " << vectors.size() << "\n";
  for (const auto& v : vectors) {
    if (v.size() != n)
      throw ValidationError("write_dense_stream: inconsistent dimensions");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) out << " ";
      out << format_double(v[j]);
    }
    out << "\n";
  }
}

// --- point sets ---------------------------------------------------------------
// Format: first line "d t", then one point (d coordinates) per line.

struct PointSetFile {
  int d = 0;
  std::int64_t t = 0;
  std::vector<Eigen::VectorXd> points;
};

inline PointSetFile read_points(const std::string& path) {
  DenseStreamFile raw = read_dense_stream(path);
  PointSetFile file;
  file.d = raw.n;
  file.t = raw.t;
  file.points = std::move(raw.vectors);
  for (const auto& p : file.points)
    for (Eigen::Index k = 0; k < p.size(); ++k)
      if (p[k] < 0.0 || p[k] > 1.0)
        throw ValidationError("point file " + path +
                              ": coordinates must lie in [0,1]");
  return file;
}

inline void write_points(const std::string& path,
                         const std::vector<Eigen::VectorXd>& points) {
  write_dense_stream(path, points);
}

// --- MatrixMarket coordinate format (1-based indices) -------------------------

inline SparseColumnMatrix read_matrix_market(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::string line;
  std::int64_t line_no = 0;
  if (!std::getline(in, line))
    detail::parse_fail(path, 1, "empty file, expected MatrixMarket banner");
  ++line_no;
  if (line.rfind("%%MatrixMarket", 0) != 0)
    detail::parse_fail(path, line_no, "missing %%MatrixMarket banner");
  {
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (object != "matrix" || format != "coordinate" || field != "real" ||
        symmetry != "general")
      detail::parse_fail(path, line_no,
                         "only \"matrix coordinate real general\" is supported");
  }
  if (!detail::next_data_line(in, line, line_no))
    detail::parse_fail(path, line_no, "missing size line");
  std::int64_t n = 0, t = 0, nnz = 0;
  {
    std::istringstream size(line);
    if (!(size >> n >> t >> nnz) || n <= 0 || t <= 0 || nnz < 0)
      detail::parse_fail(path, line_no, "size line must be \"rows cols nnz\"");
  }
  std::vector<SparseVector> columns(static_cast<std::size_t>(t));
  for (std::int64_t e = 0; e < nnz; ++e) {
    if (!detail::next_data_line(in, line, line_no))
      detail::parse_fail(path, line_no, "expected " + std::to_string(nnz) +
                                            " entries, file ended early");
    std::istringstream entry(line);
    std::int64_t row = 0, col = 0;
    double value = 0.0;
    if (!(entry >> row >> col >> value))
      detail::parse_fail(path, line_no, "entry must be \"row col value\"");
    if (row < 1 || row > n || col < 1 || col > t)
      detail::parse_fail(path, line_no, "entry indices out of bounds");
    columns[static_cast<std::size_t>(col - 1)].push_back(
        {static_cast<std::int32_t>(row - 1), value});
  }
  for (auto& column : columns)
    std::sort(column.begin(), column.end(),
              [](const SparseEntry& a, const SparseEntry& b) {
                return a.row < b.row;
              });
  return SparseColumnMatrix(static_cast<int>(n), std::move(columns));
}

inline void write_matrix_market(const std::string& path,
                                const SparseColumnMatrix& A) {
  std::ofstream out = detail::open_output(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << " " << A.cols() << " " << A.nnz() << "\n";
  for (std::int64_t j = 0; j < A.cols(); ++j)
    for (const SparseEntry& e : A.column(j))
      out << (e.row + 1) << " " << (j + 1) << " " << format_double(e.value)
          << "\n";
}

// --- trace / sign / summary emission ------------------------------------------

inline void write_trace_csv(std::ostream& out, const WalkTrace& trace) {
  out << "step,sign,sup_norm,inner_product\n";
  for (std::size_t i = 0; i < trace.signs.size(); ++i)
    out << (i + 1) << "," << static_cast<int>(trace.signs[i]) << ","
        << format_double(trace.sup_norms[i]) << ","
        << format_double(trace.inners[i]) << "\n";
}

inline void write_signs(const std::string& path,
                        const std::vector<std::int8_t>& signs) {
  std::ofstream out = detail::open_output(path);
  for (std::int8_t s : signs) out << static_cast<int>(s) << "\n";
}

inline std::string komlos_summary_json(const KomlosResult& result) {
  nlohmann::ordered_json summary;
  summary["c"] = result.c;
  summary["threshold"] = result.threshold;
  summary["final_sup_norm"] = result.final_sup_norm;
  summary["failed_midrun"] = result.failed_midrun;
  summary["exceeded_final"] = result.exceeded_final;
  summary["nnz"] = result.nnz;
  summary["seed"] = result.seed;
  return summary.dump();
}

// Per-dimension blocks of "level,index,signed_sum" rows in node-id order.
inline void write_tracker_csv(std::ostream& out,
                              const IntervalTracker& tracker) {
  const DyadicScheme& scheme = tracker.scheme();
  out << "level,index,signed_sum\n";
  for (int k = 0; k < tracker.dims(); ++k) {
    out << "# dimension " << k << "\n";
    for (std::int64_t id = 1; id <= scheme.family_size(); ++id)
      out << scheme.node_level(id) << "," << scheme.node_index(id) << ","
          << tracker.signed_sum(k, id) << "\n";
  }
}

// --- query lists ----------------------------------------------------------------

// One query per line: "dim lo hi at_step"; '#' comments and blanks skipped.
struct IntervalQuery {
  int dim = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t at = 0;
};

inline std::vector<IntervalQuery> read_interval_queries(const std::string& path) {
  std::ifstream in = detail::open_input(path);
  std::vector<IntervalQuery> queries;
  std::string line;
  std::int64_t line_no = 0;
  while (detail::next_data_line(in, line, line_no)) {
    std::istringstream row(line);
    IntervalQuery q;
    if (!(row >> q.dim >> q.lo >> q.hi >> q.at))
      detail::parse_fail(path, line_no, "query line must be \"dim lo hi at\"");
    queries.push_back(q);
  }
  return queries;
}

// One query per line: "lo1 hi1 ... lod hid at_step".
struct BoxQuery {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::int64_t at = 0;
};

inline std::vector<BoxQuery> read_box_queries(const std::string& path, int d) {
  if (d <= 0) throw ValidationError("read_box_queries: d must be positive");
  std::ifstream in = detail::open_input(path);
  std::vector<BoxQuery> queries;
  std::string line;
  std::int64_t line_no = 0;
  while (detail::next_data_line(in, line, line_no)) {
    std::istringstream row(line);
    BoxQuery q;
    q.lo.resize(d);
    q.hi.resize(d);
    for (int k = 0; k < d; ++k)
      if (!(row >> q.lo[k] >> q.hi[k]))
        detail::parse_fail(path, line_no,
                           "query line must be \"lo1 hi1 ... lod hid at\"");
    if (!(row >> q.at))
      detail::parse_fail(path, line_no, "missing at_step field");
    queries.push_back(q);
  }
  return queries;
}

}  // namespace sbwalk

#endif  // SBWALK_IO_HPP
