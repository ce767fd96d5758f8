#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "mlsort/element.hpp"
#include "mlsort/errors.hpp"
#include "mlsort/ledger.hpp"
#include "mlsort/merge.hpp"
#include "mlsort/parallel.hpp"

namespace mlsort {

// Contiguous PE range [first, first + size).
struct PeGroup {
  int first = 0;
  int size = 1;

  int last() const { return first + size - 1; }
  bool contains(int pe) const { return pe >= first && pe < first + size; }
  int member(int i) const { return first + i; }
  int rank_of(int pe) const { return pe - first; }
};

// `count` equal-size contiguous groups starting at PE `first`. All groups of
// one recursion level form a layout; they act concurrently.
struct Layout {
  int first = 0;
  int group_size = 1;
  int count = 1;

  static Layout single(PeGroup g) { return {g.first, g.size, 1}; }
  static Layout split(int p, int groups) { return {0, p / groups, groups}; }

  int groups() const { return count; }
  int pes() const { return group_size * count; }
  PeGroup group(int g) const { return {first + g * group_size, group_size}; }
  bool contains(int pe) const { return pe >= first && pe < first + pes(); }
  // Group index of pe, or -1 when pe lies outside the layout.
  int group_of(int pe) const {
    return contains(pe) ? (pe - first) / group_size : -1;
  }
};

int ceil_log2(std::uint64_t x);
bool is_power_of_two(std::uint64_t x);

// Number of machine words one item occupies on the wire. An element counts as
// one word; descriptor structs declare `static constexpr std::size_t kWords`.
template <class T>
constexpr std::uint64_t wire_words() {
  if constexpr (std::is_same_v<T, Element>) {
    return 1;
  } else if constexpr (requires { T::kWords; }) {
    return T::kWords;
  } else {
    return (sizeof(T) + 7) / 8;
  }
}

// A message may be split into several segments; all segments to the same
// destination in one superstep travel as a single message.
template <class T>
struct Message {
  int dest = 0;
  std::vector<T> payload;
};
template <class T>
using Outbox = std::vector<Message<T>>;

template <class T>
struct Received {
  int src = 0;
  std::vector<T> payload;
};
template <class T>
using Inbox = std::vector<Received<T>>;

template <class T>
struct ExchangeResult {
  std::vector<Inbox<T>> inboxes;  // indexed by global PE
  ExchStats stats;
};

template <class T>
struct PrefixSums {
  std::vector<std::vector<T>> exclusive;  // indexed by global PE
  std::vector<std::vector<T>> totals;     // indexed by group
};

// Deterministic bulk-synchronous runtime for p virtual PEs. Collectives are
// charged their closed-form costs; exchanges move real data and are priced
// from the observed traffic.
class Machine {
 public:
  explicit Machine(int p, CostParams cost = {}, Exec exec = Exec::Parallel);

  int size() const { return p_; }
  Exec exec() const { return exec_; }
  const CostParams& cost() const { return cost_; }
  CostLedger& ledger() { return ledger_; }
  const CostLedger& ledger() const { return ledger_; }
  Layout all() const { return {0, p_, 1}; }

  // Runs fn(pe) for every PE of the layout; these are the local steps.
  template <class Fn>
  void for_each_pe(const Layout& layout, Fn&& fn) const {
    parallel_for(exec_, static_cast<std::size_t>(layout.pes()),
                 [&](std::size_t i) { fn(layout.first + static_cast<int>(i)); });
  }

  // Local step producing outboxes, then delivery.
  template <class T, class Step>
  ExchangeResult<T> run_superstep(const Layout& layout, Step&& step,
                                  Traffic traffic = Traffic::Data) {
    std::vector<Outbox<T>> out(p_);
    for_each_pe(layout, [&](int pe) { out[pe] = step(pe); });
    return exchange<T>(layout, std::move(out), traffic);
  }

  // Delivers outboxes[pe] for every pe in the layout. Receivers see messages
  // ordered by sender index. Self-messages are delivered but not counted;
  // empty segments are dropped.
  template <class T>
  ExchangeResult<T> exchange(const Layout& layout,
                             std::vector<Outbox<T>> outboxes,
                             Traffic traffic = Traffic::Data);

  // beta*words + alpha*ceil(log2 P) for one vector collective executed by
  // every group of the layout at once.
  void charge_collective(const Layout& layout, std::uint64_t words);
  // Same, for concurrent collectives over arbitrary member sets of size
  // set_size (grid rows or columns).
  void charge_collective(int set_size, std::uint64_t words);

  template <class T, class Op>
  std::vector<std::vector<T>> allreduce_vec(
      const Layout& layout, const std::vector<std::vector<T>>& per_pe, Op op);

  template <class T>
  PrefixSums<T> prefix_sum_vec(const Layout& layout,
                               const std::vector<std::vector<T>>& per_pe);

  // Returns the payload that every member of `group` ends up holding.
  template <class T>
  std::vector<T> broadcast(const PeGroup& group, int root,
                           std::span<const T> payload);

  // Allgather with merging over each member set; result per set. Sets of
  // power-of-two size are priced as the hypercube algorithm.
  std::vector<std::vector<Element>> gossip_merge_sets(
      const std::vector<std::vector<int>>& sets,
      const std::vector<std::vector<Element>>& per_pe);

  // One merged sequence per layout group.
  std::vector<std::vector<Element>> gossip_merge(
      const Layout& layout, const std::vector<std::vector<Element>>& per_pe);

 private:
  void check_layout(const Layout& layout) const;

  int p_;
  CostParams cost_;
  Exec exec_;
  CostLedger ledger_;
};

// ---------------------------------------------------------------------------

template <class T>
ExchangeResult<T> Machine::exchange(const Layout& layout,
                                    std::vector<Outbox<T>> outboxes,
                                    Traffic traffic) {
  check_layout(layout);
  if (static_cast<int>(outboxes.size()) != p_) outboxes.resize(p_);

  ExchangeRecord rec;
  rec.traffic = traffic;
  rec.sent_words.assign(p_, 0);
  rec.recv_words.assign(p_, 0);
  rec.sent_msgs.assign(p_, 0);
  rec.recv_msgs.assign(p_, 0);

  ExchangeResult<T> result;
  result.inboxes.resize(p_);
  constexpr std::uint64_t words = wire_words<T>();

  std::vector<int> last_sender(p_, -1);
  for (int src = 0; src < p_; ++src) {
    auto& box = outboxes[src];
    if (box.empty()) continue;
    if (!layout.contains(src)) {
      throw AddressingError("PE " + std::to_string(src) +
                            " sends outside the active layout");
    }
    const PeGroup g = layout.group(layout.group_of(src));
    for (auto& msg : box) {
      if (!g.contains(msg.dest)) {
        throw AddressingError("message from PE " + std::to_string(src) +
                              " to PE " + std::to_string(msg.dest) +
                              " outside group [" + std::to_string(g.first) +
                              ", " + std::to_string(g.last()) + "]");
      }
      if (msg.payload.empty()) continue;
      const int dst = msg.dest;
      if (dst != src) {
        const std::uint64_t w = msg.payload.size() * words;
        rec.sent_words[src] += w;
        rec.recv_words[dst] += w;
        if (last_sender[dst] != src) {
          ++rec.sent_msgs[src];
          ++rec.recv_msgs[dst];
        }
      }
      last_sender[dst] = src;
      result.inboxes[dst].push_back({src, std::move(msg.payload)});
    }
  }

  ExchStats& s = result.stats;
  s.participants = layout.group_size;
  for (int pe = 0; pe < p_; ++pe) {
    s.max_words = std::max({s.max_words, rec.sent_words[pe], rec.recv_words[pe]});
    s.max_msgs = std::max<std::uint64_t>(
        {s.max_msgs, rec.sent_msgs[pe], rec.recv_msgs[pe]});
  }
  s.modeled_cost = static_cast<double>(s.max_words) * cost_.beta +
                   static_cast<double>(s.max_msgs) * cost_.alpha;
  rec.stats = s;
  ledger_.record(std::move(rec));
  return result;
}

template <class T, class Op>
std::vector<std::vector<T>> Machine::allreduce_vec(
    const Layout& layout, const std::vector<std::vector<T>>& per_pe, Op op) {
  check_layout(layout);
  std::vector<std::vector<T>> out(layout.groups());
  std::uint64_t len = 0;
  for (int g = 0; g < layout.groups(); ++g) {
    const PeGroup grp = layout.group(g);
    const auto& head = per_pe[grp.first];
    std::vector<T> acc = head;
    for (int i = 1; i < grp.size; ++i) {
      const auto& v = per_pe[grp.member(i)];
      if (v.size() != acc.size()) {
        throw PreconditionError("allreduce: mismatched vector lengths");
      }
      for (std::size_t j = 0; j < v.size(); ++j) acc[j] = op(acc[j], v[j]);
    }
    len = std::max<std::uint64_t>(len, acc.size());
    out[g] = std::move(acc);
  }
  charge_collective(layout, len * wire_words<T>());
  return out;
}

template <class T>
PrefixSums<T> Machine::prefix_sum_vec(
    const Layout& layout, const std::vector<std::vector<T>>& per_pe) {
  check_layout(layout);
  PrefixSums<T> out;
  out.exclusive.resize(p_);
  out.totals.resize(layout.groups());
  std::uint64_t len = 0;
  for (int g = 0; g < layout.groups(); ++g) {
    const PeGroup grp = layout.group(g);
    const std::size_t l = per_pe[grp.first].size();
    std::vector<T> run(l, T{});
    for (int i = 0; i < grp.size; ++i) {
      const int pe = grp.member(i);
      const auto& v = per_pe[pe];
      if (v.size() != l) {
        throw PreconditionError("prefix sum: mismatched vector lengths");
      }
      out.exclusive[pe] = run;
      for (std::size_t j = 0; j < l; ++j) run[j] += v[j];
    }
    len = std::max<std::uint64_t>(len, l);
    out.totals[g] = std::move(run);
  }
  charge_collective(layout, len * wire_words<T>());
  return out;
}

template <class T>
std::vector<T> Machine::broadcast(const PeGroup& group, int root,
                                  std::span<const T> payload) {
  if (!group.contains(root)) {
    throw AddressingError("broadcast root " + std::to_string(root) +
                          " outside group");
  }
  charge_collective(Layout::single(group), payload.size() * wire_words<T>());
  return {payload.begin(), payload.end()};
}

}  // namespace mlsort
