#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

#include "mlsort/errors.hpp"
#include "mlsort/random.hpp"
#include "mlsort/simnet.hpp"

using namespace mlsort;

namespace {

std::vector<std::uint64_t> words(int n, std::uint64_t v = 0) {
  return std::vector<std::uint64_t>(n, v);
}

void check_conservation(const CostLedger& ledger) {
  const auto sum = [](const auto& v) {
    return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
  };
  CHECK(sum(ledger.sent_words()) == sum(ledger.recv_words()));
  CHECK(sum(ledger.sent_msgs()) == sum(ledger.recv_msgs()));
}

}  // namespace

TEST_CASE("single message exchange") {
  Machine m(2, {10.0, 1.0});
  std::vector<Outbox<std::uint64_t>> out(2);
  out[0].push_back({1, words(3, 7)});
  auto res = m.exchange<std::uint64_t>(m.all(), std::move(out));
  CHECK(res.stats.participants == 2);
  CHECK(res.stats.max_words == 3);
  CHECK(res.stats.max_msgs == 1);
  CHECK(res.stats.modeled_cost == doctest::Approx(3 + 10));
  REQUIRE(res.inboxes[1].size() == 1);
  CHECK(res.inboxes[1][0].src == 0);
  CHECK(res.inboxes[1][0].payload == words(3, 7));
  check_conservation(m.ledger());
}

TEST_CASE("all-to-all without counting self messages") {
  Machine m(4);
  auto res = m.run_superstep<std::uint64_t>(m.all(), [](int pe) {
    Outbox<std::uint64_t> box;
    for (int d = 0; d < 4; ++d) box.push_back({d, {std::uint64_t(pe)}});
    return box;
  });
  CHECK(res.stats.max_words == 3);
  CHECK(res.stats.max_msgs == 3);
  for (int pe = 0; pe < 4; ++pe) {
    REQUIRE(res.inboxes[pe].size() == 4);
    for (int s = 0; s < 4; ++s) CHECK(res.inboxes[pe][s].src == s);
  }
  check_conservation(m.ledger());
}

TEST_CASE("empty superstep and star pattern") {
  Machine m(5, {1.0, 1.0});
  auto empty = m.exchange<std::uint64_t>(m.all(), {});
  CHECK(empty.stats.max_words == 0);
  CHECK(empty.stats.max_msgs == 0);
  CHECK(m.ledger().modeled_time() == 0.0);

  auto star = m.run_superstep<std::uint64_t>(m.all(), [](int pe) {
    return Outbox<std::uint64_t>{{0, {std::uint64_t(pe)}}};
  });
  CHECK(star.stats.max_msgs == 4);
  CHECK(m.ledger().exchanges().back().recv_msgs[0] == 4);
  check_conservation(m.ledger());
}

TEST_CASE("segments to one destination form one message") {
  Machine m(3);
  std::vector<Outbox<std::uint64_t>> out(3);
  out[0].push_back({2, words(2)});
  out[0].push_back({1, words(1)});
  out[0].push_back({2, words(4)});
  auto res = m.exchange<std::uint64_t>(m.all(), std::move(out));
  const auto& rec = m.ledger().exchanges().back();
  CHECK(rec.sent_msgs[0] == 2);
  CHECK(rec.recv_msgs[2] == 1);
  CHECK(rec.recv_words[2] == 6);
  CHECK(res.inboxes[2].size() == 2);
}

TEST_CASE("addressing errors") {
  Machine m(4);
  std::vector<Outbox<std::uint64_t>> out(4);
  out[0].push_back({2, words(1)});
  CHECK_THROWS_AS(m.exchange<std::uint64_t>(Layout::split(4, 2), std::move(out)),
                  AddressingError);
  std::vector<Outbox<std::uint64_t>> out2(4);
  out2[1].push_back({7, words(1)});
  CHECK_THROWS_AS(m.exchange<std::uint64_t>(m.all(), std::move(out2)),
                  AddressingError);
  const std::vector<std::uint64_t> payload{1, 2};
  CHECK_THROWS_AS(m.broadcast<std::uint64_t>(PeGroup{0, 2}, 3, payload),
                  AddressingError);
}

TEST_CASE("broadcast costs") {
  const std::vector<std::uint64_t> five(5, 1);
  {
    Machine m(1, {10.0, 1.0});
    m.broadcast<std::uint64_t>(PeGroup{0, 1}, 0, five);
    CHECK(m.ledger().modeled_time() == 0.0);
  }
  {
    Machine m(8, {10.0, 1.0});
    auto got = m.broadcast<std::uint64_t>(PeGroup{0, 8}, 3, five);
    CHECK(got == five);
    CHECK(m.ledger().modeled_time() == doctest::Approx(5 + 30));
  }
  {
    Machine m(3, {10.0, 1.0});
    m.broadcast<std::uint64_t>(PeGroup{0, 3}, 0, {});
    CHECK(m.ledger().modeled_time() == doctest::Approx(20));
  }
}

TEST_CASE("vector prefix sums and reductions") {
  Machine m(4);
  {
    std::vector<std::vector<std::uint64_t>> v{{1}, {2}, {3}};
    v.resize(4);
    auto ps = m.prefix_sum_vec(Layout::single({0, 3}), v);
    CHECK(ps.exclusive[0] == std::vector<std::uint64_t>{0});
    CHECK(ps.exclusive[1] == std::vector<std::uint64_t>{1});
    CHECK(ps.exclusive[2] == std::vector<std::uint64_t>{3});
    CHECK(ps.totals[0] == std::vector<std::uint64_t>{6});
  }
  {
    std::vector<std::vector<std::uint64_t>> v{{1, 2}, {10, 20}, {}, {}};
    auto ps = m.prefix_sum_vec(Layout::single({0, 2}), v);
    CHECK(ps.exclusive[0] == std::vector<std::uint64_t>{0, 0});
    CHECK(ps.exclusive[1] == std::vector<std::uint64_t>{1, 2});
    CHECK(ps.totals[0] == std::vector<std::uint64_t>{11, 22});
  }
  {
    std::vector<std::vector<std::uint64_t>> v{{1}, {2}, {3}, {4}};
    auto mx = m.allreduce_vec(m.all(), v, [](auto a, auto b) {
      return std::max(a, b);
    });
    CHECK(mx[0] == std::vector<std::uint64_t>{4});
  }
  {
    std::vector<std::vector<std::uint64_t>> v{{1}, {2, 3}, {}, {}};
    CHECK_THROWS_AS(m.prefix_sum_vec(Layout::single({0, 2}), v),
                    PreconditionError);
  }
}

TEST_CASE("prefix sums telescope within every group") {
  Machine m(12);
  Rng rng(SeedSpec{5, "telescope"});
  std::vector<std::vector<std::uint64_t>> v(12);
  for (auto& x : v) {
    x.resize(3);
    for (auto& e : x) e = rng.below(100);
  }
  const Layout layout = Layout::split(12, 3);
  auto ps = m.prefix_sum_vec(layout, v);
  for (int g = 0; g < 3; ++g) {
    const PeGroup grp = layout.group(g);
    for (int i = 0; i < grp.size; ++i) {
      const int pe = grp.member(i);
      std::vector<std::uint64_t> next(3);
      for (int j = 0; j < 3; ++j) next[j] = ps.exclusive[pe][j] + v[pe][j];
      if (i + 1 < grp.size) {
        CHECK(next == ps.exclusive[pe + 1]);
      } else {
        CHECK(next == ps.totals[g]);
      }
    }
  }
}

TEST_CASE("gossip merge equals the sorted union") {
  auto seq = [](std::initializer_list<std::uint64_t> keys, std::uint32_t pe) {
    std::vector<Element> out;
    std::uint32_t pos = 0;
    for (auto k : keys) out.push_back({k, pe, pos++});
    return out;
  };
  {
    Machine m(1);
    std::vector<std::vector<Element>> in{seq({3, 9}, 0)};
    CHECK(m.gossip_merge(m.all(), in)[0] == in[0]);
    CHECK(m.ledger().modeled_time() == 0.0);
  }
  {
    Machine m(2);
    std::vector<std::vector<Element>> in{seq({1, 3}, 0), seq({2, 4}, 1)};
    auto out = m.gossip_merge(m.all(), in)[0];
    std::vector<std::uint64_t> keys;
    for (auto& e : out) keys.push_back(e.key);
    CHECK(keys == std::vector<std::uint64_t>{1, 2, 3, 4});
  }
  {
    Machine m(4, {0.0, 1.0});
    Rng rng(SeedSpec{3, "gossip"});
    std::vector<std::vector<Element>> in(4);
    std::vector<Element> all;
    for (std::uint32_t pe = 0; pe < 4; ++pe) {
      for (std::uint32_t i = 0; i < 3; ++i) {
        in[pe].push_back({rng.below(10), pe, i});
      }
      std::sort(in[pe].begin(), in[pe].end());
      all.insert(all.end(), in[pe].begin(), in[pe].end());
    }
    std::sort(all.begin(), all.end());
    CHECK(m.gossip_merge(m.all(), in)[0] == all);
    // Every PE receives the 9 elements it did not contribute.
    CHECK(m.ledger().modeled_time() == doctest::Approx(9));
  }
  {
    Machine m(2);
    std::vector<std::vector<Element>> in{seq({5, 1}, 0), seq({2}, 1)};
    CHECK_THROWS_AS(m.gossip_merge(m.all(), in), PreconditionError);
  }
}

TEST_CASE("ledger is independent of the execution mode") {
  auto run = [](Exec exec) {
    Machine m(16, {3.0, 1.0}, exec);
    for (int round = 0; round < 3; ++round) {
      m.run_superstep<std::uint64_t>(m.all(), [round](int pe) {
        Rng rng(SeedSpec{static_cast<std::uint64_t>(round), "pe"}.sub(std::to_string(pe)));
        Outbox<std::uint64_t> box;
        for (int k = 0; k < 4; ++k) {
          box.push_back({static_cast<int>(rng.below(16)),
                         std::vector<std::uint64_t>(rng.below(5), pe)});
        }
        return box;
      });
    }
    return m.ledger();
  };
  const auto a = run(Exec::Serial);
  const auto b = run(Exec::Parallel);
  CHECK(a.sent_words() == b.sent_words());
  CHECK(a.recv_msgs() == b.recv_msgs());
  CHECK(a.modeled_time() == b.modeled_time());
  check_conservation(a);
}
