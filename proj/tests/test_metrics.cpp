#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "audit/errors.hpp"
#include "audit/metrics.hpp"
#include "audit/util.hpp"
#include "oracles.hpp"

using namespace audit;

namespace {

RankedList make_list(std::vector<std::string> items) {
  RankedList list;
  list.items = std::move(items);
  list.k_requested = static_cast<int>(list.items.size());
  return list;
}

}  // namespace

TEST_CASE("metric names round-trip") {
  for (Metric metric : kAllMetrics) {
    CHECK(parse_metric(metric_name(metric)) == metric);
  }
  CHECK_THROWS_AS(parse_metric("ndcg"), ConfigError);
}

TEST_CASE("identical lists score 1 on every metric") {
  auto list = make_list({"a", "b", "c", "d"});
  CHECK(jaccard_at_k(list, list, 4) == doctest::Approx(1.0));
  CHECK(serp_star_at_k(list, list, 4) == doctest::Approx(1.0));
  CHECK(prag_star_at_k(list, list, 4).value() == doctest::Approx(1.0));
}

TEST_CASE("disjoint lists score 0 on every metric") {
  auto a = make_list({"a", "b", "c"});
  auto b = make_list({"x", "y", "z"});
  CHECK(jaccard_at_k(a, b, 3) == doctest::Approx(0.0));
  CHECK(serp_star_at_k(a, b, 3) == doctest::Approx(0.0));
  CHECK(prag_star_at_k(a, b, 3).value() == doctest::Approx(0.0));
}

TEST_CASE("jaccard hand example") {
  auto a = make_list({"a", "b", "c"});
  auto b = make_list({"b", "c", "d"});
  CHECK(jaccard_at_k(a, b, 3) == doctest::Approx(0.5));
}

TEST_CASE("jaccard empty-list conventions") {
  auto empty = make_list({});
  auto full = make_list({"a"});
  CHECK(jaccard_at_k(empty, empty, 5) == doctest::Approx(1.0));
  CHECK(jaccard_at_k(empty, full, 5) == doctest::Approx(0.0));
  CHECK(jaccard_at_k(full, empty, 5) == doctest::Approx(0.0));
}

TEST_CASE("jaccard is symmetric and permutation-invariant") {
  auto a = make_list({"a", "b", "c", "d"});
  auto b = make_list({"c", "a", "x", "b"});
  CHECK(jaccard_at_k(a, b, 4) == doctest::Approx(jaccard_at_k(b, a, 4)));
  auto b_permuted = make_list({"x", "b", "a", "c"});
  CHECK(jaccard_at_k(a, b, 4) == doctest::Approx(jaccard_at_k(a, b_permuted, 4)));
}

TEST_CASE("serp hand example from the contract") {
  auto ref = make_list({"a", "b", "c"});
  auto cand = make_list({"c", "b", "x"});
  // shared {b, c}: weights (3−2+1) + (3−3+1) = 3, denominator 6
  CHECK(serp_star_at_k(ref, cand, 3) == doctest::Approx(0.5));
}

TEST_CASE("serp is asymmetric (witness pair)") {
  auto a = make_list({"a", "b", "c"});
  auto b = make_list({"c", "x", "y"});
  CHECK(serp_star_at_k(a, b, 3) == doctest::Approx(1.0 / 6.0));
  CHECK(serp_star_at_k(b, a, 3) == doctest::Approx(0.5));
}

TEST_CASE("serp normalizes by the actual reference truncation length") {
  auto ref = make_list({"a", "b"});
  auto cand = make_list({"a", "b"});
  // identical two-item lists at k=5 are a perfect match, not 3/15
  CHECK(serp_star_at_k(ref, cand, 5) == doctest::Approx(1.0));
  auto empty = make_list({});
  CHECK(serp_star_at_k(empty, empty, 5) == doctest::Approx(1.0));
  CHECK(serp_star_at_k(empty, cand, 5) == doctest::Approx(0.0));
}

TEST_CASE("prag hand example from the contract") {
  auto ref = make_list({"a", "b", "c"});
  auto cand = make_list({"b", "a", "c"});
  // (a,b) fails, (a,c) holds, (b,c) holds
  CHECK(prag_star_at_k(ref, cand, 3).value() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("prag is asymmetric (witness pair)") {
  auto a = make_list({"a", "b", "c"});
  auto b = make_list({"a", "c"});
  CHECK(prag_star_at_k(a, b, 3).value() == doctest::Approx(2.0 / 3.0));
  CHECK(prag_star_at_k(b, a, 3).value() == doctest::Approx(1.0));
}

TEST_CASE("prag with a sub-2 reference truncation is undefined, not 0") {
  auto single = make_list({"a"});
  auto cand = make_list({"a", "b"});
  CHECK_FALSE(prag_star_at_k(single, cand, 5).has_value());
  CHECK_FALSE(prag_star_at_k(make_list({}), cand, 5).has_value());
  auto longer = make_list({"a", "b", "c"});
  CHECK_FALSE(prag_star_at_k(longer, cand, 1).has_value());
  CHECK(prag_star_at_k(longer, cand, 2).has_value());
}

TEST_CASE("all metrics stay in [0,1] on random pairs") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> pool;
    for (int i = 0; i < 12; ++i) pool.push_back("i" + std::to_string(i));
    std::vector<std::string> a, b;
    for (const auto& item : pool) {
      if (rng.next_below(2)) a.push_back(item);
      if (rng.next_below(2)) b.push_back(item);
    }
    auto ra = make_list(a), rb = make_list(b);
    int k = static_cast<int>(rng.next_below(10)) + 1;
    double j = jaccard_at_k(ra, rb, k);
    double s = serp_star_at_k(ra, rb, k);
    CHECK(j >= 0.0);
    CHECK(j <= 1.0);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    auto p = prag_star_at_k(ra, rb, k);
    if (p) {
      CHECK(*p >= 0.0);
      CHECK(*p <= 1.0);
    }
  }
}

TEST_CASE("oracle spot check: exhaustive small corpus") {
  auto lists = oracle::arrangements(4, 3);
  for (const auto& ref_items : lists) {
    for (const auto& cand_items : lists) {
      auto ref = make_list(ref_items);
      auto cand = make_list(cand_items);
      for (int k = 1; k <= 3; ++k) {
        CHECK(jaccard_at_k(ref, cand, k) ==
              doctest::Approx(oracle::jaccard(ref, cand, k)).epsilon(1e-12));
        CHECK(serp_star_at_k(ref, cand, k) ==
              doctest::Approx(oracle::serp_star(ref, cand, k)).epsilon(1e-12));
        auto mine = prag_star_at_k(ref, cand, k);
        auto theirs = oracle::prag_star(ref, cand, k);
        REQUIRE(mine.has_value() == theirs.has_value());
        if (mine) {
          CHECK(*mine == doctest::Approx(*theirs).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("k_sweep agrees with the single-k entry points") {
  auto ref = make_list({"a", "b", "c", "d", "e"});
  auto cand = make_list({"c", "a", "e", "x", "b"});
  auto scores = k_sweep(ref, cand, {1, 3, 5});
  for (const auto& score : scores) {
    auto direct = similarity_at_k(score.metric, ref, cand, score.k);
    REQUIRE(direct.has_value());
    CHECK(score.value == doctest::Approx(*direct).epsilon(1e-15));
  }
  // prag is undefined at k=1, so that row is absent rather than zero
  int prag_rows = 0;
  for (const auto& score : scores) {
    if (score.metric == Metric::kPragStar) {
      ++prag_rows;
      CHECK(score.k >= 3);
    }
  }
  CHECK(prag_rows == 2);
}

TEST_CASE("k_sweep on identical lists is all ones") {
  auto list = make_list({"a", "b", "c", "d", "e"});
  for (const auto& score : k_sweep(list, list, {2, 4, 5})) {
    CHECK(score.value == doctest::Approx(1.0));
  }
}

TEST_CASE("k_sweep validates its ks") {
  auto list = make_list({"a", "b"});
  CHECK_THROWS_AS(k_sweep(list, list, {}), ConfigError);
  CHECK_THROWS_AS(k_sweep(list, list, {3, 1}), ConfigError);
}
