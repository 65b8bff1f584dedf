#ifndef SBWALK_SPARSE_HPP
#define SBWALK_SPARSE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "sbwalk/errors.hpp"
#include "sbwalk/walk.hpp"

namespace sbwalk {

struct SparseEntry {
  std::int32_t row = 0;
  double value = 0.0;
};

// One column: (row, value) pairs with strictly increasing rows.
using SparseVector = std::vector<SparseEntry>;

inline double sparse_norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& e : v) s += e.value * e.value;
  return std::sqrt(s);
}

/// <w, v> touching only the stored entries of v.
inline double sparse_inner(const Eigen::VectorXd& w, const SparseVector& v) {
  double s = 0.0;
  for (const auto& e : v) {
    if (e.row < 0 || e.row >= w.size())
      throw ValidationError("sparse_inner: row index out of bounds");
    s += w[e.row] * e.value;
  }
  return s;
}

/// w += sign * v on the stored entries only.
inline void sparse_update(Eigen::VectorXd& w, const SparseVector& v, int sign) {
  const double s = static_cast<double>(sign);
  for (const auto& e : v) {
    if (e.row < 0 || e.row >= w.size())
      throw ValidationError("sparse_update: row index out of bounds");
    w[e.row] += s * e.value;
  }
}

/// Column-compressed input matrix for the Komlos walk. Columns keep
/// strictly increasing row indices and l2 norm at most 1 (+1e-12 slack).
class SparseColumnMatrix {
 public:
  SparseColumnMatrix(int n, std::vector<SparseVector> columns)
      : n_(n), columns_(std::move(columns)) {
    if (n_ <= 0) throw ValidationError("SparseColumnMatrix: rows must be positive");
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      validate_column(columns_[j], static_cast<std::int64_t>(j));
      nnz_ += static_cast<std::int64_t>(columns_[j].size());
    }
  }

  int rows() const { return n_; }
  std::int64_t cols() const { return static_cast<std::int64_t>(columns_.size()); }
  std::int64_t nnz() const { return nnz_; }
  const SparseVector& column(std::int64_t j) const { return columns_[j]; }
  const std::vector<SparseVector>& columns() const { return columns_; }

  // A * x for a +-1 signing, fresh accumulation.
  Eigen::VectorXd apply_signs(const std::vector<std::int8_t>& x) const {
    SBWALK_ASSERT(static_cast<std::int64_t>(x.size()) == cols(),
                  "sign vector length differs from column count");
    Eigen::VectorXd result = Eigen::VectorXd::Zero(n_);
    for (std::int64_t j = 0; j < cols(); ++j)
      sparse_update(result, columns_[j], x[j]);
    return result;
  }

 private:
  void validate_column(const SparseVector& col, std::int64_t j) const {
    std::int32_t prev = -1;
    for (const auto& e : col) {
      if (e.row < 0 || e.row >= n_) {
        std::ostringstream msg;
        msg << "column " << j << ": row index " << e.row << " outside [0," << n_
            << ")";
        throw ValidationError(msg.str());
      }
      if (e.row <= prev) {
        std::ostringstream msg;
        msg << "column " << j << ": row indices not strictly increasing";
        throw ValidationError(msg.str());
      }
      prev = e.row;
    }
    const double norm = sparse_norm(col);
    if (norm > 1.0 + kNormSlack) {
      std::ostringstream msg;
      msg << "column " << j << " has l2 norm " << norm << " > 1";
      throw ValidationError(msg.str());
    }
  }

  int n_;
  std::vector<SparseVector> columns_;
  std::int64_t nnz_ = 0;
};

}  // namespace sbwalk

#endif  // SBWALK_SPARSE_HPP
