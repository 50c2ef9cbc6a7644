#include "hagedorn/multiindex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hagedorn/errors.hpp"

namespace hagedorn {

namespace {
// Exact products of two 64-bit binomials.
__extension__ using u128 = unsigned __int128;
}  // namespace

MultiIndex::MultiIndex(int dim) : entries_(static_cast<std::size_t>(dim), 0) {
  require(dim >= 1, "multi-index dimension must be >= 1");
}

MultiIndex::MultiIndex(std::initializer_list<int> entries)
    : MultiIndex(std::vector<int>(entries)) {}

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  require(!entries_.empty(), "multi-index dimension must be >= 1");
  for (int e : entries_) {
    require(e >= 0, "multi-index entries must be non-negative");
    order_ += e;
  }
}

MultiIndex MultiIndex::unit(int dim, int axis) {
  MultiIndex m(dim);
  m.set(axis, 1);
  return m;
}

void MultiIndex::set(int axis, int value) {
  require(value >= 0, "multi-index entries must be non-negative");
  auto& slot = entries_.at(static_cast<std::size_t>(axis));
  order_ += value - slot;
  slot = value;
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int e : entries_) f *= std::tgamma(static_cast<double>(e) + 1.0);
  return f;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  require(dim() == other.dim(), "multi-index dimension mismatch");
  std::vector<int> sum(entries_);
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += other.entries_[i];
  return MultiIndex(std::move(sum));
}

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(entries_[i]);
  }
  return s + ")";
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.order_ <=> b.order_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.entries_.begin(), a.entries_.end(),
                                                b.entries_.begin(), b.entries_.end());
}

std::size_t MultiIndexHash::operator()(const MultiIndex& m) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int e : m.entries()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

namespace {

void fill_exact(int degree, std::size_t axis, std::vector<int>& work,
                std::vector<MultiIndex>& out) {
  if (axis + 1 == work.size()) {
    work[axis] = degree;
    out.emplace_back(work);
    return;
  }
  for (int e = 0; e <= degree; ++e) {
    work[axis] = e;
    fill_exact(degree - e, axis + 1, work, out);
  }
}

}  // namespace

std::vector<MultiIndex> enumerate_exact(int dim, int degree) {
  require(dim >= 1, "dimension must be >= 1");
  require(degree >= 0, "degree must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(count_exact_degree(dim, degree));
  std::vector<int> work(static_cast<std::size_t>(dim), 0);
  fill_exact(degree, 0, work, out);
  return out;
}

std::vector<MultiIndex> enumerate_upto(int dim, int max_degree) {
  require(dim >= 1, "dimension must be >= 1");
  require(max_degree >= 0, "max degree must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(count_upto(dim, max_degree));
  for (int k = 0; k <= max_degree; ++k) {
    auto shell = enumerate_exact(dim, k);
    out.insert(out.end(), std::make_move_iterator(shell.begin()),
               std::make_move_iterator(shell.end()));
  }
  return out;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  u128 r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n - k + i) / i is exact at every step.
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > std::numeric_limits<std::uint64_t>::max()) {
      raise(ErrorCode::SupportOverflow,
            "binomial(" + std::to_string(n) + "," + std::to_string(k) + ") overflows 64 bits");
    }
  }
  return static_cast<std::uint64_t>(r);
}

std::uint64_t count_exact_degree(int dim, int degree) {
  require(dim >= 1 && degree >= 0, "count_exact_degree needs d >= 1, k >= 0");
  return binomial(dim - 1 + degree, dim - 1);
}

std::uint64_t count_upto(int dim, int max_degree) {
  require(dim >= 1 && max_degree >= 0, "count_upto needs d >= 1, N >= 0");
  return binomial(max_degree + dim, dim);
}

double log_factorial_ratio(int n, int m) {
  require(n >= m && m >= 0, "log_factorial_ratio needs n >= m >= 0");
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(m) + 1.0);
}

bool hockey_stick_holds(int p, int q) {
  require(p >= 2 && p <= q + 1, "hockey-stick identity needs 2 <= p <= q+1");
  std::uint64_t sum = 0;
  for (int n = p - 1; n <= q; ++n) sum += binomial(n - 1, p - 2);
  return sum == binomial(q, p - 1);
}

bool shell_growth_inequality_holds(int dim, int n, int q) {
  require(dim >= 1 && n >= 0 && n <= q, "shell growth inequality needs 0 <= n <= q");
  const u128 base = binomial(dim + 2, dim - 1);
  auto power = [&](int e) {
    u128 r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  };
  const u128 lhs =
      static_cast<u128>(binomial(dim + q + 2 - n, dim - 1)) * power(n);
  return lhs <= power(q + 1);
}

MultiIndexTable::MultiIndexTable(int dim, int capacity)
    : dim_(dim), capacity_(capacity), indices_(enumerate_upto(dim, capacity)) {
  shell_offsets_.reserve(static_cast<std::size_t>(capacity) + 2);
  for (int k = 0; k <= capacity + 1; ++k) {
    shell_offsets_.push_back(k == 0 ? 0 : static_cast<std::size_t>(count_upto(dim, k - 1)));
  }
  lookup_.reserve(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) lookup_.emplace(indices_[i], i);

  const auto d = static_cast<std::size_t>(dim);
  up_.assign(indices_.size() * d, -1);
  down_.assign(indices_.size() * d, -1);
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    std::vector<int> work(indices_[i].entries().begin(), indices_[i].entries().end());
    for (std::size_t ax = 0; ax < d; ++ax) {
      if (indices_[i].order() < capacity) {
        ++work[ax];
        up_[i * d + ax] = static_cast<std::ptrdiff_t>(lookup_.at(MultiIndex(work)));
        --work[ax];
      }
      if (work[ax] > 0) {
        --work[ax];
        down_[i * d + ax] = static_cast<std::ptrdiff_t>(lookup_.at(MultiIndex(work)));
        ++work[ax];
      }
    }
  }
}

std::shared_ptr<const MultiIndexTable> MultiIndexTable::make(int dim, int capacity) {
  return std::make_shared<const MultiIndexTable>(dim, capacity);
}

std::size_t MultiIndexTable::size_upto(int degree) const {
  if (degree < 0) return 0;
  if (degree > capacity_) {
    raise(ErrorCode::SupportOverflow, "degree " + std::to_string(degree) +
                                          " exceeds table capacity " + std::to_string(capacity_));
  }
  return shell_offsets_[static_cast<std::size_t>(degree) + 1];
}

std::size_t MultiIndexTable::shell_begin(int degree) const {
  require(degree >= 0 && degree <= capacity_ + 1, "shell degree out of range");
  return shell_offsets_[static_cast<std::size_t>(degree)];
}

std::ptrdiff_t MultiIndexTable::find(const MultiIndex& j) const {
  if (j.dim() != dim_ || j.order() > capacity_) return -1;
  return static_cast<std::ptrdiff_t>(lookup_.at(j));
}

std::size_t MultiIndexTable::position(const MultiIndex& j) const {
  const auto pos = find(j);
  if (pos < 0) {
    raise(ErrorCode::SupportOverflow,
          "multi-index " + j.to_string() + " outside table capacity " + std::to_string(capacity_));
  }
  return static_cast<std::size_t>(pos);
}

}  // namespace hagedorn
