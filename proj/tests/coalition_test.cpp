#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <set>

#include "fpshap/coalition.hpp"
#include "fpshap/rng.hpp"

using namespace fpshap;

TEST_CASE("binomial coefficients are exact") {
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(16, 8) == 12870);
  CHECK(binomial(25, 12) == 5200300);
  CHECK(binomial(4, 7) == 0);
  CHECK_THROWS_AS(binomial(63, 1), ArgumentError);
}

TEST_CASE("mask basics") {
  const CoalitionMask m(0b01101, 5);
  CHECK(m.size() == 3);
  CHECK(m.contains(0));
  CHECK(!m.contains(1));
  CHECK(m.complement().bits() == 0b10010);
  CHECK(m.complement().complement() == m);
  CHECK(CoalitionMask::empty(5).is_empty());
  CHECK(CoalitionMask::grand(5).size() == 5);
  CHECK_THROWS_AS(CoalitionMask(0b100, 2), ArgumentError);
}

TEST_CASE("enumerate_coalitions lists all subsets in ascending order") {
  SECTION("p = 2 exhaustive") {
    const auto masks = enumerate_coalitions(2);
    REQUIRE(masks.size() == 4);
    CHECK(masks[0].bits() == 0b00);
    CHECK(masks[1].bits() == 0b01);
    CHECK(masks[2].bits() == 0b10);
    CHECK(masks[3].bits() == 0b11);
  }
  SECTION("p = 5 counts by size") {
    const auto masks = enumerate_coalitions(5);
    REQUIRE(masks.size() == 32);
    int size2 = 0;
    for (const auto& m : masks) size2 += m.size() == 2 ? 1 : 0;
    CHECK(size2 == 10);
    for (std::size_t i = 1; i < masks.size(); ++i) {
      CHECK(masks[i - 1].bits() < masks[i].bits());
    }
  }
  SECTION("p = 3 complements pair sizes 1 and 2 bijectively") {
    const auto masks = enumerate_coalitions(3);
    for (const auto& m : masks) {
      if (m.size() == 1) {
        CHECK(m.complement().size() == 2);
        CHECK(m.complement().complement() == m);
      }
    }
  }
  SECTION("capacity cap") {
    CHECK_THROWS_AS(enumerate_coalitions(26), CapacityError);
    CHECK_THROWS_AS(enumerate_coalitions(1), ArgumentError);
  }
}

TEST_CASE("unrank_subset enumerates each stratum exactly once") {
  const int n = 7;
  for (int k = 1; k < n; ++k) {
    std::set<std::uint32_t> seen;
    const std::uint64_t count = binomial(n, k);
    for (std::uint64_t r = 0; r < count; ++r) {
      const std::uint32_t bits = unrank_subset(r, n, k);
      CHECK(std::popcount(bits) == k);
      seen.insert(bits);
    }
    CHECK(seen.size() == count);
    CHECK_THROWS_AS(unrank_subset(count, n, k), ArgumentError);
  }
}

TEST_CASE("sample_without_replacement draws uniform subsets") {
  Rng rng(123);
  const auto picks = sample_without_replacement(10, 4, rng);
  REQUIRE(picks.size() == 4);
  for (std::size_t i = 1; i < picks.size(); ++i) {
    CHECK(picks[i - 1] < picks[i]);
  }
  CHECK(picks.back() < 10);

  // Empirical inclusion frequency over many draws.
  std::vector<int> hits(10, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    for (const auto v : sample_without_replacement(10, 4, rng)) {
      ++hits[static_cast<std::size_t>(v)];
    }
  }
  for (const int h : hits) {
    CHECK(std::abs(h / static_cast<double>(trials) - 0.4) < 0.02);
  }
}

TEST_CASE("derive_seed gives distinct deterministic streams") {
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  Rng a(derive_seed(9, 1));
  Rng b(derive_seed(9, 1));
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
}
