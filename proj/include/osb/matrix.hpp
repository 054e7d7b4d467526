#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "osb/errors.hpp"

namespace osb {

/// Zero-based (row, column) index into a matrix.
struct Position {
  std::size_t row = 0;
  std::size_t col = 0;
  friend auto operator<=>(const Position&, const Position&) = default;
};

/// Dense nonnegative n x N matrix, row-major, immutable after construction.
///
/// Absolute values are taken on the way in, so every consumer may assume
/// nonnegative entries. The decreasing rearrangement s(1) >= ... >= s(nN) is
/// computed once at construction.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows_ == 0 || cols_ == 0) throw DomainError("matrix dimensions must be positive");
    if (entries_.size() != rows_ * cols_)
      throw DomainError("matrix entry count does not match dimensions");
    for (double& v : entries_) {
      if (!std::isfinite(v)) throw DomainError("matrix entries must be finite");
      v = std::fabs(v);
    }
    rearrangement_ = entries_;
    std::sort(rearrangement_.begin(), rearrangement_.end(), std::greater<>());
  }

  static Matrix zeros(std::size_t rows, std::size_t cols) {
    return Matrix(rows, cols, std::vector<double>(rows * cols, 0.0));
  }

  static Matrix constant(std::size_t rows, std::size_t cols, double value) {
    return Matrix(rows, cols, std::vector<double>(rows * cols, value));
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) throw DomainError("matrix dimensions must be positive");
    std::vector<double> flat;
    flat.reserve(rows.size() * rows.front().size());
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw DomainError("ragged matrix rows");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), rows.front().size(), std::move(flat));
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  [[nodiscard]] double at(Position p) const { return entries_[p.row * cols_ + p.col]; }
  [[nodiscard]] std::span<const double> entries() const { return entries_; }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return std::span<const double>(entries_).subspan(i * cols_, cols_);
  }

  /// s(1..nN), nonincreasing.
  [[nodiscard]] const std::vector<double>& rearrangement() const { return rearrangement_; }

  /// Sum of the `count` largest entries (count clamped to nN).
  [[nodiscard]] double top_sum(std::size_t count) const {
    count = std::min(count, rearrangement_.size());
    return std::accumulate(rearrangement_.begin(), rearrangement_.begin() + static_cast<std::ptrdiff_t>(count), 0.0);
  }

  [[nodiscard]] Matrix scaled(double factor) const {
    std::vector<double> e = entries_;
    for (double& v : e) v *= factor;
    return Matrix(rows_, cols_, std::move(e));
  }

  [[nodiscard]] std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
  std::vector<double> rearrangement_;
};

/// Bijection h from ranks {0..nN-1} onto matrix positions, listing positions
/// from the largest entry to the smallest. rank_of() is its inverse.
class OrderMap {
 public:
  OrderMap() = default;

  OrderMap(std::size_t rows, std::size_t cols, std::vector<Position> order)
      : rows_(rows), cols_(cols), order_(std::move(order)), rank_(rows * cols, rows * cols) {
    if (order_.size() != rows_ * cols_) throw DomainError("order map must list every position once");
    for (std::size_t r = 0; r < order_.size(); ++r) {
      const Position p = order_[r];
      if (p.row >= rows_ || p.col >= cols_) throw DomainError("order map position out of range");
      std::size_t& slot = rank_[p.row * cols_ + p.col];
      if (slot != order_.size()) throw DomainError("order map repeats a position");
      slot = r;
    }
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return order_.size(); }

  /// h(r + 1) in one-based terms.
  [[nodiscard]] Position operator[](std::size_t rank) const { return order_[rank]; }
  [[nodiscard]] std::size_t rank_of(Position p) const { return rank_[p.row * cols_ + p.col]; }
  [[nodiscard]] std::size_t rank_of(std::size_t i, std::size_t j) const { return rank_[i * cols_ + j]; }
  [[nodiscard]] std::span<const Position> positions() const { return order_; }

  /// Entries of `m` are nonincreasing along the whole order.
  [[nodiscard]] bool is_compatible_with(const Matrix& m) const {
    if (m.rows() != rows_ || m.cols() != cols_) return false;
    for (std::size_t r = 0; r + 1 < order_.size(); ++r)
      if (m.at(order_[r]) < m.at(order_[r + 1])) return false;
    return true;
  }

  /// Membership in the class of matrices that are nonincreasing along the first
  /// ell*N ranks and vanish beyond them.
  [[nodiscard]] bool admits(const Matrix& b, std::size_t ell) const {
    if (b.rows() != rows_ || b.cols() != cols_) return false;
    const std::size_t top = std::min(ell * cols_, order_.size());
    for (std::size_t r = 0; r < order_.size(); ++r) {
      const double v = b.at(order_[r]);
      if (r >= top && v != 0.0) return false;
      if (r + 1 < top && v < b.at(order_[r + 1])) return false;
    }
    return true;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Position> order_;
  std::vector<std::size_t> rank_;
};

inline std::vector<double> decreasing_rearrangement(const Matrix& m) { return m.rearrangement(); }

/// k-th largest of |x_i|, k one-based.
inline double kmax(std::span<const double> x, std::size_t k) {
  if (k < 1 || k > x.size()) throw DomainError("kmax: k must lie in 1..n");
  std::vector<double> v(x.size());
  std::transform(x.begin(), x.end(), v.begin(), [](double t) { return std::fabs(t); });
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end(), std::greater<>());
  return v[k - 1];
}

/// Canonical ordering: value descending, ties by (row, col) ascending.
inline OrderMap order_map(const Matrix& m) {
  std::vector<Position> order;
  order.reserve(m.size());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) order.push_back({i, j});
  std::stable_sort(order.begin(), order.end(),
                   [&](Position a, Position b) { return m.at(a) > m.at(b); });
  return OrderMap(m.rows(), m.cols(), std::move(order));
}

/// Replaces the first ell*N entries along h by their mean and zeroes the rest.
inline Matrix averaged_matrix(const Matrix& m, const OrderMap& h, std::size_t ell) {
  if (ell < 1 || ell > m.rows()) throw DomainError("averaged_matrix: ell must lie in 1..n");
  if (h.rows() != m.rows() || h.cols() != m.cols()) throw DomainError("averaged_matrix: order map shape mismatch");
  const std::size_t top = ell * m.cols();
  double sum = 0.0;
  for (std::size_t r = 0; r < top; ++r) sum += m.at(h[r]);
  const double mean = sum / static_cast<double>(top);
  std::vector<double> e(m.size(), 0.0);
  for (std::size_t r = 0; r < top; ++r) e[h[r].row * m.cols() + h[r].col] = mean;
  return Matrix(m.rows(), m.cols(), std::move(e));
}

/// Ones at h(1..count), zeros elsewhere.
inline Matrix indicator_matrix(const OrderMap& h, std::size_t count, std::size_t rows, std::size_t cols) {
  if (h.rows() != rows || h.cols() != cols) throw DomainError("indicator_matrix: order map shape mismatch");
  if (count < 1 || count > rows * cols) throw DomainError("indicator_matrix: m must lie in 1..nN");
  std::vector<double> e(rows * cols, 0.0);
  for (std::size_t r = 0; r < count; ++r) e[h[r].row * cols + h[r].col] = 1.0;
  return Matrix(rows, cols, std::move(e));
}

/// Keeps the ell*N largest entries (along the canonical order) and zeroes the rest.
/// The lower bound only needs to be shown for such matrices.
inline Matrix top_reduced(const Matrix& m, std::size_t ell) {
  if (ell < 1 || ell > m.rows()) throw DomainError("top_reduced: ell must lie in 1..n");
  const OrderMap h = order_map(m);
  std::vector<double> e(m.size(), 0.0);
  for (std::size_t r = 0; r < ell * m.cols(); ++r) e[h[r].row * m.cols() + h[r].col] = m.at(h[r]);
  return Matrix(m.rows(), m.cols(), std::move(e));
}

/// FNV-1a over dimensions and entry bit patterns, rendered as 16 hex digits.
inline std::string matrix_hash(const Matrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  feed(m.rows());
  feed(m.cols());
  for (double v : m.entries()) {
    feed(std::bit_cast<std::uint64_t>(v));
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xfU];
  return out;
}

}  // namespace osb
