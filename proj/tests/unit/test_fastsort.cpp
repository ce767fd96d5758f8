#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "mlsort/errors.hpp"
#include "mlsort/fastsort.hpp"
#include "oracle.hpp"

using namespace mlsort;

namespace {

// Seven keys scattered over a 3x4 grid; letters a..g are keys 0..6.
std::vector<std::vector<Element>> grid_fixture() {
  std::vector<std::vector<Element>> d(12);
  auto put = [&](int row, int col, std::initializer_list<char> keys) {
    const int pe = row * 4 + col;
    std::uint32_t pos = 0;
    for (char k : keys) {
      d[pe].push_back({static_cast<std::uint64_t>(k - 'a'),
                       static_cast<std::uint32_t>(pe), pos++});
    }
  };
  put(0, 0, {'c'});
  put(0, 3, {'f'});
  put(1, 1, {'a'});
  put(1, 2, {'e'});
  put(2, 1, {'g'});
  put(2, 3, {'b', 'd'});
  return d;
}

std::map<std::uint64_t, std::uint64_t> rank_by_key(
    const std::vector<std::vector<RankedElement>>& ranked) {
  std::map<std::uint64_t, std::uint64_t> out;
  for (const auto& v : ranked) {
    for (const auto& r : v) out[r.element.key] = r.global_rank;
  }
  return out;
}

void check_against_oracle(const std::vector<std::vector<Element>>& d,
                          const std::vector<std::vector<RankedElement>>& ranked) {
  const auto all = oracle::sorted_union(d);
  std::vector<int> seen(all.size(), 0);
  std::size_t count = 0;
  for (std::size_t pe = 0; pe < d.size(); ++pe) {
    CHECK(ranked[pe].size() == d[pe].size());
    for (const auto& r : ranked[pe]) {
      REQUIRE(r.global_rank < all.size());
      CHECK(all[r.global_rank] == r.element);
      ++seen[r.global_rank];
      ++count;
    }
  }
  CHECK(count == all.size());
  for (int s : seen) CHECK(s == 1);
}

}  // namespace

TEST_CASE("grid shapes") {
  CHECK(grid_shape(16) == GridShape{4, 4});
  CHECK(grid_shape(8) == GridShape{4, 2});
  CHECK(grid_shape(1) == GridShape{1, 1});
  CHECK(grid_shape(2) == GridShape{2, 1});
  CHECK_THROWS_AS(grid_shape(12), UnsupportedTopology);
  CHECK_THROWS_AS(grid_shape(0), UnsupportedTopology);
}

TEST_CASE("golden ranks on a 3x4 grid") {
  Machine m(12);
  const auto d = grid_fixture();
  const auto ranked = fast_rank_sort_grid(m, m.all(), {3, 4}, d);
  const auto ranks = rank_by_key(ranked);
  for (std::uint64_t k = 0; k < 7; ++k) CHECK(ranks.at(k) == k);

  const auto picked = extract_by_ranks(m, m.all(), ranked, {{1, 3, 5}});
  REQUIRE(picked[0].size() == 3);
  CHECK(picked[0][0].key == 'b' - 'a');
  CHECK(picked[0][1].key == 'd' - 'a');
  CHECK(picked[0][2].key == 'f' - 'a');
}

TEST_CASE("single PE ranks by local sort") {
  Machine m(1);
  std::vector<std::vector<Element>> d{{{3, 0, 0}, {1, 0, 1}, {2, 0, 2}}};
  const auto ranks = rank_by_key(fast_rank_sort(m, m.all(), d));
  CHECK(ranks.at(3) == 2);
  CHECK(ranks.at(1) == 0);
  CHECK(ranks.at(2) == 1);
}

TEST_CASE("ranks match a sequential sort") {
  Rng rng(SeedSpec{12, "fastsort"});
  {
    Machine m(4);
    std::vector<std::vector<Element>> d(4);
    for (int i = 0; i < 4; ++i) d[i] = oracle::random_elements(rng, i, 2, 100, false);
    check_against_oracle(d, fast_rank_sort(m, m.all(), d));
  }
  const int sizes[] = {1, 4, 16, 64};
  for (int inst = 0; inst < 200; ++inst) {
    const int p = sizes[inst % 4];
    std::vector<std::vector<Element>> d(p);
    for (int i = 0; i < p; ++i) {
      d[i] = oracle::random_elements(rng, i, rng.below(9), 1 + rng.below(30), false);
    }
    Machine m(p, {}, inst % 2 ? Exec::Parallel : Exec::Serial);
    check_against_oracle(d, fast_rank_sort(m, m.all(), d, 8));
  }
}

TEST_CASE("groups of a layout rank independently") {
  Rng rng(SeedSpec{13, "fastsort-layout"});
  std::vector<std::vector<Element>> d(16);
  for (int i = 0; i < 16; ++i) d[i] = oracle::random_elements(rng, i, 3, 40, false);
  Machine m(16);
  const auto ranked = fast_rank_sort(m, Layout::split(16, 4), d);
  for (int g = 0; g < 4; ++g) {
    std::vector<std::vector<Element>> part(d.begin() + 4 * g, d.begin() + 4 * g + 4);
    std::vector<std::vector<RankedElement>> rpart(ranked.begin() + 4 * g,
                                                  ranked.begin() + 4 * g + 4);
    check_against_oracle(part, rpart);
  }
}

TEST_CASE("extraction") {
  Rng rng(SeedSpec{14, "extract"});
  std::vector<std::vector<Element>> d(4);
  for (int i = 0; i < 4; ++i) d[i] = oracle::random_elements(rng, i, 5, 1000, false);
  const auto all = oracle::sorted_union(d);
  Machine m(4);
  const auto ranked = fast_rank_sort(m, m.all(), d);
  CHECK(extract_by_ranks(m, m.all(), ranked, {{0}})[0] ==
        std::vector<Element>{all[0]});
  std::vector<std::uint64_t> every(all.size());
  for (std::size_t i = 0; i < every.size(); ++i) every[i] = i;
  CHECK(extract_by_ranks(m, m.all(), ranked, {every})[0] == all);
  CHECK_THROWS_AS(extract_by_ranks(m, m.all(), ranked, {{20}}), PreconditionError);
}

TEST_CASE("per-PE bound is enforced") {
  Machine m(2);
  std::vector<std::vector<Element>> d{{{1, 0, 0}, {2, 0, 1}, {3, 0, 2}}, {}};
  CHECK_THROWS_AS(fast_rank_sort(m, m.all(), d, 2), PreconditionError);
  Machine twelve(12);
  std::vector<std::vector<Element>> e(12);
  CHECK_THROWS_AS(fast_rank_sort(twelve, twelve.all(), e), UnsupportedTopology);
}

TEST_CASE("gossip volume per PE shrinks with the grid") {
  // Fixed n, growing p: words charged per PE follow n / sqrt(p).
  const std::size_t n = 4096;
  double prev = 0;
  for (int p : {4, 16, 64}) {
    Rng rng(SeedSpec{15, "volume"});
    std::vector<std::vector<Element>> d(p);
    for (int i = 0; i < p; ++i) d[i] = oracle::random_elements(rng, i, n / p, 1 << 20, false);
    Machine m(p, {0.0, 1.0});
    fast_rank_sort(m, m.all(), d);
    const double words = m.ledger().modeled_time();
    if (prev > 0) CHECK(words < prev);
    CHECK(words <= 4.0 * n / std::sqrt(static_cast<double>(p)));
    prev = words;
  }
}
