#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hagedorn {

/// A d-tuple of non-negative integers. Ordered by total degree |j|, then
/// lexicographically, which is the canonical linearization used everywhere
/// coefficient vectors are stored.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(int dim);
  MultiIndex(std::initializer_list<int> entries);
  explicit MultiIndex(std::vector<int> entries);

  static MultiIndex unit(int dim, int axis);

  int dim() const noexcept { return static_cast<int>(entries_.size()); }
  int order() const noexcept { return order_; }
  int operator[](int axis) const { return entries_[static_cast<std::size_t>(axis)]; }
  std::span<const int> entries() const noexcept { return entries_; }

  void set(int axis, int value);

  /// j! = j_1! j_2! ... j_d!, in floating point.
  double factorial() const;

  MultiIndex operator+(const MultiIndex& other) const;

  std::string to_string() const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.entries_ == b.entries_;
  }
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);

 private:
  std::vector<int> entries_;
  int order_ = 0;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& m) const noexcept;
};

/// All multi-indices with |j| <= max_degree, graded-lex ordered.
std::vector<MultiIndex> enumerate_upto(int dim, int max_degree);

/// All multi-indices with |j| == degree, lex ordered.
std::vector<MultiIndex> enumerate_exact(int dim, int degree);

/// Exact binomial coefficient. Throws SupportOverflow when it does not fit.
std::uint64_t binomial(int n, int k);

/// Number of multi-indices of order k in d dimensions: C(d-1+k, d-1).
std::uint64_t count_exact_degree(int dim, int degree);

/// Number of multi-indices with |j| <= N: C(N+d, d).
std::uint64_t count_upto(int dim, int max_degree);

/// log(n! / m!) for n >= m >= 0 via lgamma.
double log_factorial_ratio(int n, int m);

/// The hockey-stick identity C(q, p-1) = sum_{n=p-1}^{q} C(n-1, p-2) for
/// 2 <= p <= q+1, checked in exact integer arithmetic.
bool hockey_stick_holds(int p, int q);

/// C(d+q+2-n, d-1) * C(d+2, d-1)^n <= C(d+2, d-1)^(q+1), exactly.
bool shell_growth_inequality_holds(int dim, int n, int q);

/// Dense graded-lex table of multi-indices up to a fixed capacity, with
/// neighbor links along every axis. Coefficient vectors of support N are the
/// first count_upto(d, N) slots of any table whose capacity is >= N.
class MultiIndexTable {
 public:
  MultiIndexTable(int dim, int capacity);

  static std::shared_ptr<const MultiIndexTable> make(int dim, int capacity);

  int dim() const noexcept { return dim_; }
  int capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return indices_.size(); }

  const MultiIndex& at(std::size_t pos) const { return indices_[pos]; }
  std::span<const MultiIndex> indices() const noexcept { return indices_; }

  /// Number of slots occupied by indices with |j| <= degree.
  std::size_t size_upto(int degree) const;
  /// First slot of the degree shell.
  std::size_t shell_begin(int degree) const;

  /// Slot of j, or -1 when |j| exceeds the capacity.
  std::ptrdiff_t find(const MultiIndex& j) const;
  std::size_t position(const MultiIndex& j) const;

  /// Slot of j + e_axis, or -1 when that leaves the table.
  std::ptrdiff_t raised(std::size_t pos, int axis) const {
    return up_[pos * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(axis)];
  }
  /// Slot of j - e_axis, or -1 when j_axis == 0.
  std::ptrdiff_t lowered(std::size_t pos, int axis) const {
    return down_[pos * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(axis)];
  }

  int degree_of(std::size_t pos) const { return indices_[pos].order(); }

 private:
  int dim_;
  int capacity_;
  std::vector<MultiIndex> indices_;
  std::vector<std::size_t> shell_offsets_;
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> lookup_;
  std::vector<std::ptrdiff_t> up_;
  std::vector<std::ptrdiff_t> down_;
};

using TablePtr = std::shared_ptr<const MultiIndexTable>;

}  // namespace hagedorn
