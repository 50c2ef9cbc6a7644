#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "hagedorn/errors.hpp"
#include "hagedorn/multiindex.hpp"

using namespace hagedorn;

namespace {

// Independent count by brute-force nested enumeration.
std::size_t brute_count(int d, int N, bool exact) {
  std::size_t n = 0;
  std::vector<int> j(static_cast<std::size_t>(d), 0);
  while (true) {
    int s = 0;
    for (int v : j) s += v;
    if (exact ? s == N : s <= N) ++n;
    int ax = 0;
    while (ax < d && ++j[static_cast<std::size_t>(ax)] > N) j[static_cast<std::size_t>(ax++)] = 0;
    if (ax == d) break;
  }
  return n;
}

}  // namespace

TEST_CASE("small enumerations") {
  const auto e = enumerate_upto(1, 2);
  REQUIRE(e.size() == 3);
  CHECK(e[0] == MultiIndex{0});
  CHECK(e[1] == MultiIndex{1});
  CHECK(e[2] == MultiIndex{2});
  CHECK(count_upto(3, 3) == 20);
  CHECK(enumerate_upto(3, 3).size() == 20);
  CHECK(count_exact_degree(3, 3) == 10);
  CHECK(count_exact_degree(1, 7) == 1);
  CHECK(count_exact_degree(2, 3) == 4);
  CHECK(count_exact_degree(3, 4) == 15);
}

TEST_CASE("counts agree with brute force") {
  for (int d = 1; d <= 4; ++d) {
    for (int N = 0; N <= 6; ++N) {
      CHECK(count_upto(d, N) == brute_count(d, N, false));
      CHECK(count_exact_degree(d, N) == brute_count(d, N, true));
      CHECK(enumerate_exact(d, N).size() == count_exact_degree(d, N));
    }
  }
}

TEST_CASE("graded order and prefix property") {
  for (int d = 1; d <= 3; ++d) {
    const auto big = enumerate_upto(d, 6);
    CHECK(std::is_sorted(big.begin(), big.end()));
    CHECK(std::set<MultiIndex>(big.begin(), big.end()).size() == big.size());
    for (std::size_t i = 1; i < big.size(); ++i) CHECK(big[i - 1].order() <= big[i].order());
    const auto small = enumerate_upto(d, 5);
    CHECK(std::equal(small.begin(), small.end(), big.begin()));
  }
}

TEST_CASE("table links") {
  const auto table = MultiIndexTable::make(3, 5);
  CHECK(table->size() == count_upto(3, 5));
  for (std::size_t pos = 0; pos < table->size(); ++pos) {
    const auto& j = table->at(pos);
    CHECK(table->position(j) == pos);
    for (int ax = 0; ax < 3; ++ax) {
      const auto up = table->raised(pos, ax);
      if (j.order() == 5) {
        CHECK(up == -1);
      } else {
        REQUIRE(up >= 0);
        CHECK(table->at(static_cast<std::size_t>(up)) == j + MultiIndex::unit(3, ax));
      }
      const auto down = table->lowered(pos, ax);
      if (j[ax] == 0) {
        CHECK(down == -1);
      } else {
        REQUIRE(down >= 0);
        CHECK(table->raised(static_cast<std::size_t>(down), ax) == static_cast<std::ptrdiff_t>(pos));
      }
    }
  }
  CHECK(table->size_upto(2) == count_upto(3, 2));
  CHECK(table->shell_begin(3) == count_upto(3, 2));
  CHECK(table->find(MultiIndex{3, 3, 0}) == -1);
}

TEST_CASE("binomial identities in exact arithmetic") {
  for (int q = 1; q <= 11; ++q)
    for (int p = 2; p <= q + 1; ++p) CHECK(hockey_stick_holds(p, q));
  for (int d = 1; d <= 4; ++d)
    for (int q = 0; q <= 10; ++q)
      for (int n = 0; n <= q; ++n) CHECK(shell_growth_inequality_holds(d, n, q));
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(60, 30) == 118264581564861424ULL);
  CHECK_THROWS_AS(binomial(200, 100), Error);
}

TEST_CASE("factorials") {
  CHECK(MultiIndex{2, 3}.factorial() == doctest::Approx(12.0));
  CHECK(log_factorial_ratio(10, 7) == doctest::Approx(std::log(720.0)));
  CHECK(log_factorial_ratio(4, 4) == 0.0);
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(MultiIndex({1, -1}), Error);
  CHECK_THROWS_AS(enumerate_upto(0, 2), Error);
  try {
    (void)count_upto(2, -1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}
