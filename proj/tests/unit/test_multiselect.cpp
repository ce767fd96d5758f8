#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mlsort/errors.hpp"
#include "mlsort/multiselect.hpp"
#include "oracle.hpp"

using namespace mlsort;

namespace {

std::vector<Element> seq(std::initializer_list<std::uint64_t> keys,
                         std::uint32_t pe) {
  std::vector<Element> out;
  std::uint32_t pos = 0;
  for (auto k : keys) out.push_back({k, pe, pos++});
  return out;
}

std::size_t sum(const std::vector<std::size_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{0});
}

const SeedSpec kSeed{17, "select"};

}  // namespace

TEST_CASE("single element selection") {
  Machine m(1);
  std::vector<std::vector<Element>> d{seq({7}, 0)};
  auto res = multiselect(m, {0, 1}, oracle::spans(d), 1, kSeed);
  CHECK(res.splitter.key == 7);
  CHECK(res.splits == std::vector<std::size_t>{1});
}

TEST_CASE("interleaved sequences") {
  Machine m(2);
  std::vector<std::vector<Element>> d{seq({1, 3, 5}, 0), seq({2, 4, 6}, 1)};
  auto res = multiselect(m, {0, 2}, oracle::spans(d), 3, kSeed);
  CHECK(res.splitter.key == 3);
  CHECK(res.splits == std::vector<std::size_t>{2, 1});

  auto many = multiselect_many(m, {0, 2}, oracle::spans(d), {2, 4}, kSeed);
  REQUIRE(many.size() == 2);
  CHECK(many[0].splitter.key == 2);
  CHECK(many[1].splitter.key == 4);

  auto ends = multiselect_many(m, {0, 2}, oracle::spans(d), {1, 6}, kSeed);
  CHECK(ends[0].splitter.key == 1);
  CHECK(ends[1].splitter.key == 6);

  CHECK(multiselect_many(m, {0, 2}, oracle::spans(d), {}, kSeed).empty());
}

TEST_CASE("empty local sequence") {
  Machine m(2);
  std::vector<std::vector<Element>> d{{}, seq({1, 2}, 1)};
  auto res = multiselect(m, {0, 2}, oracle::spans(d), 2, kSeed);
  CHECK(res.splitter.key == 2);
  CHECK(res.splits == std::vector<std::size_t>{0, 2});
}

TEST_CASE("selection errors") {
  Machine m(2);
  std::vector<std::vector<Element>> d{seq({1, 3}, 0), seq({2}, 1)};
  CHECK_THROWS_AS(multiselect(m, {0, 2}, oracle::spans(d), 0, kSeed),
                  PreconditionError);
  CHECK_THROWS_AS(multiselect(m, {0, 2}, oracle::spans(d), 4, kSeed),
                  PreconditionError);
  CHECK_THROWS_AS(multiselect_many(m, {0, 2}, oracle::spans(d), {2, 2}, kSeed),
                  PreconditionError);
  CHECK_THROWS_AS(multiselect_many(m, {0, 2}, oracle::spans(d), {3, 1}, kSeed),
                  PreconditionError);
  std::vector<std::vector<Element>> bad{seq({3, 1}, 0), seq({2}, 1)};
  CHECK_THROWS_AS(multiselect(m, {0, 2}, oracle::spans(bad), 1, kSeed),
                  PreconditionError);
}

TEST_CASE("selection agrees with the sorted union") {
  Rng rng(SeedSpec{99, "select-instances"});
  for (int inst = 0; inst < 500; ++inst) {
    const int p = 1 + static_cast<int>(rng.below(16));
    std::vector<std::vector<Element>> d(p);
    for (int i = 0; i < p; ++i) {
      d[i] = oracle::random_elements(rng, i, rng.below(65), 1 + rng.below(200));
    }
    const auto all = oracle::sorted_union(d);
    if (all.empty()) continue;
    Machine m(p, {}, inst % 2 ? Exec::Parallel : Exec::Serial);
    const SeedSpec seed{static_cast<std::uint64_t>(inst), "inst"};
    const int cap = 8 * (static_cast<int>(std::log2(all.size())) + 1);

    std::vector<std::uint64_t> ranks(all.size());
    std::iota(ranks.begin(), ranks.end(), 1);
    auto many = multiselect_many(m, {0, p}, oracle::spans(d), ranks, seed);
    for (std::uint64_t k = 1; k <= all.size(); ++k) {
      const auto& res = many[k - 1];
      CHECK(res.splitter == all[k - 1]);
      CHECK(sum(res.splits) == k);
      CHECK(res.rounds <= cap);
      for (int i = 0; i < p; ++i) {
        CHECK(res.splits[i] == oracle::count_le(d[i], res.splitter));
      }
    }
    // Lockstep execution gives exactly the per-rank answers.
    const std::uint64_t k = 1 + rng.below(all.size());
    auto single = multiselect(m, {0, p}, oracle::spans(d), k, seed);
    CHECK(single.splitter == many[k - 1].splitter);
    CHECK(single.splits == many[k - 1].splits);
  }
}

TEST_CASE("groups of a layout select independently") {
  Rng rng(SeedSpec{4, "layout"});
  const int p = 8;
  std::vector<std::vector<Element>> d(p);
  for (int i = 0; i < p; ++i) d[i] = oracle::random_elements(rng, i, 10, 50);
  Machine m(p);
  const Layout layout = Layout::split(p, 2);
  auto res = multiselect_groups(m, layout, oracle::spans(d), {{1, 20, 40}, {7}},
                                kSeed);
  for (int g = 0; g < 2; ++g) {
    std::vector<std::vector<Element>> part(d.begin() + 4 * g,
                                           d.begin() + 4 * g + 4);
    const auto all = oracle::sorted_union(part);
    for (const auto& r : res[g]) CHECK(r.splitter == all[r.rank - 1]);
  }
}

TEST_CASE("one vector collective triple per round") {
  Machine m(4, {10.0, 1.0});
  Rng rng(SeedSpec{8, "cost"});
  std::vector<std::vector<Element>> d(4);
  for (int i = 0; i < 4; ++i) d[i] = oracle::random_elements(rng, i, 20, 1000);
  auto res = multiselect_many(m, {0, 4}, oracle::spans(d), {10, 40, 70}, kSeed);
  int rounds = 0;
  for (const auto& r : res) rounds = std::max(rounds, r.rounds);
  // Each round: three collectives with 3 words and ceil(log2 4) = 2 startups.
  CHECK(m.ledger().modeled_time() == doctest::Approx(rounds * 3 * (3 + 20)));
}
