#include "mlsort/delivery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mlsort/errors.hpp"
#include "mlsort/feistel.hpp"

namespace mlsort {
namespace {

using u128 = unsigned __int128;

// Descriptor of a large piece or delegated part: subgroup, offset, length.
struct PartDescriptor {
  static constexpr std::size_t kWords = 3;
  std::uint32_t subgroup = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
};

// Reply with the placement of one part.
struct PlacementReply {
  static constexpr std::size_t kWords = 3;
  int dest = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
};

// Member of a q-PE subgroup holding m elements that receives number e.
int receiver_of(std::uint64_t e, std::uint64_t m, int q) {
  return static_cast<int>((static_cast<u128>(e + 1) * q + m - 1) / m) - 1;
}

struct Context {
  Machine& machine;
  Layout parent;
  int r;
  int q;  // subgroup size
  const Pieces& pieces;
  const DeliveryOptions& options;
  DeliveryPlan& plan;

  int dest(int g, int j, int t) const {
    return parent.group(g).first + j * q + t;
  }

  // Cuts number range [start, start + len) of piece (pe, j), which begins at
  // piece offset `offset`, along the receiver boundaries.
  void cut(int g, int pe, int j, std::size_t offset, std::uint64_t start,
           std::uint64_t len) const {
    const std::uint64_t m = plan.totals[g][j];
    std::uint64_t e = start;
    while (e < start + len) {
      const int t = receiver_of(e, m, q);
      const std::uint64_t next = receiver_boundary(m, q, t + 1);
      const std::uint64_t l = std::min(start + len, next) - e;
      plan.slices[pe][j].push_back(
          {dest(g, j, t), offset + static_cast<std::size_t>(e - start),
           static_cast<std::size_t>(l), e});
      e += l;
    }
  }

  std::uint64_t size(int pe, int j) const { return pieces[pe][j].size(); }
};

std::vector<std::vector<std::uint64_t>> piece_sizes(const Context& c) {
  std::vector<std::vector<std::uint64_t>> sizes(c.machine.size());
  for (int pe = c.parent.first; pe < c.parent.first + c.parent.pes(); ++pe) {
    sizes[pe].resize(c.r);
    for (int j = 0; j < c.r; ++j) sizes[pe][j] = c.size(pe, j);
  }
  return sizes;
}

// Exclusive prefix sums of piece sizes for subgroup j of group g, with the
// senders taken in the order given by `order` (local PE indices).
std::vector<std::uint64_t> ordered_starts(const Context& c, int g, int j,
                                          const std::vector<int>& order) {
  const PeGroup grp = c.parent.group(g);
  std::vector<std::uint64_t> start(grp.size);
  std::uint64_t run = 0;
  for (int i : order) {
    start[i] = run;
    run += c.size(grp.member(i), j);
  }
  return start;
}

std::vector<int> feistel_order(int n, const SeedSpec& seed) {
  const FeistelPermutation perm(static_cast<std::uint64_t>(n), seed);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[perm.apply(i)] = i;
  return order;
}

void plan_prefix(Context& c, bool permuted) {
  const int P = c.parent.group_size;
  parallel_for(c.machine.exec(), static_cast<std::size_t>(c.parent.groups() * c.r),
               [&](std::size_t idx) {
    const int g = static_cast<int>(idx) / c.r;
    const int j = static_cast<int>(idx) % c.r;
    std::vector<int> order(P);
    if (permuted) {
      order = feistel_order(P, c.options.seed.sub("perm/g" + std::to_string(g) +
                                                   "/j" + std::to_string(j)));
    } else {
      std::iota(order.begin(), order.end(), 0);
    }
    const auto start = ordered_starts(c, g, j, order);
    const PeGroup grp = c.parent.group(g);
    for (int i = 0; i < P; ++i) {
      const int pe = grp.member(i);
      c.cut(g, pe, j, 0, start[i], c.size(pe, j));
    }
  });
}

void plan_deterministic(Context& c, DeliveryResult& result) {
  const int P = c.parent.group_size;
  Machine& machine = c.machine;

  // Small piece enumeration and sizes: one vector prefix sum of length 2r.
  machine.charge_collective(c.parent, 2 * static_cast<std::uint64_t>(c.r));

  std::vector<Outbox<PartDescriptor>> to_coord(machine.size());
  std::vector<std::vector<std::vector<int>>> large(c.parent.groups());

  for (int g = 0; g < c.parent.groups(); ++g) {
    const PeGroup grp = c.parent.group(g);
    std::uint64_t n = 0;
    for (int j = 0; j < c.r; ++j) n += c.plan.totals[g][j];
    const std::uint64_t limit =
        c.options.max_piece ? c.options.max_piece : (n + P - 1) / P;
    large[g].resize(c.r);
    for (int i = 0; i < P; ++i) {
      for (int j = 0; j < c.r; ++j) {
        const std::uint64_t x = c.size(grp.member(i), j);
        if (x > limit) {
          throw PreconditionError("piece of " + std::to_string(x) +
                                  " elements exceeds the bound " +
                                  std::to_string(limit));
        }
      }
    }
    for (int j = 0; j < c.r; ++j) {
      const std::uint64_t m = c.plan.totals[g][j];
      const std::uint64_t tau = m / (2 * static_cast<std::uint64_t>(P));
      std::vector<std::uint64_t> fill(c.q, 0);
      std::uint64_t small = 0;
      for (int i = 0; i < P; ++i) {
        const int pe = grp.member(i);
        const std::uint64_t x = c.size(pe, j);
        if (x == 0) continue;
        if (x <= tau) {
          const int t = static_cast<int>(small++ / c.r);
          c.plan.slices[pe][j].push_back({c.dest(g, j, t), 0,
                                          static_cast<std::size_t>(x),
                                          receiver_boundary(m, c.q, t) + fill[t]});
          fill[t] += x;
          result.small_load[c.dest(g, j, t)] += x;
        } else {
          large[g][j].push_back(i);
          to_coord[pe].push_back(
              {c.dest(g, j, i / c.r), {{static_cast<std::uint32_t>(j), 0, x}}});
        }
      }
      // Merge of residual capacity sums with large piece sums.
      int t = 0;
      for (int i : large[g][j]) {
        const int pe = grp.member(i);
        std::uint64_t x = c.size(pe, j);
        std::size_t offset = 0;
        while (x > 0) {
          const std::uint64_t cap =
              receiver_boundary(m, c.q, t + 1) - receiver_boundary(m, c.q, t);
          if (fill[t] == cap) {
            ++t;
            continue;
          }
          const std::uint64_t l = std::min(x, cap - fill[t]);
          c.plan.slices[pe][j].push_back({c.dest(g, j, t), offset,
                                          static_cast<std::size_t>(l),
                                          receiver_boundary(m, c.q, t) + fill[t]});
          fill[t] += l;
          offset += l;
          x -= l;
        }
      }
    }
  }

  machine.exchange<PartDescriptor>(c.parent, std::move(to_coord), Traffic::Control);
  // Batcher merge of the two sorted sequences inside each subgroup.
  if (c.q > 1) {
    machine.ledger().charge(machine.cost().alpha * ceil_log2(c.q), 0);
  }
  std::vector<Outbox<PlacementReply>> replies(machine.size());
  for (int g = 0; g < c.parent.groups(); ++g) {
    const PeGroup grp = c.parent.group(g);
    for (int j = 0; j < c.r; ++j) {
      for (int i : large[g][j]) {
        const int pe = grp.member(i);
        Message<PlacementReply> msg{pe, {}};
        for (const auto& s : c.plan.slices[pe][j]) {
          msg.payload.push_back({s.dest, s.offset, s.length});
        }
        replies[c.dest(g, j, i / c.r)].push_back(std::move(msg));
      }
    }
  }
  machine.exchange<PlacementReply>(c.parent, std::move(replies), Traffic::Control);
}

struct Part {
  int origin = 0;  // local PE index
  std::size_t offset = 0;
  std::uint64_t length = 0;
  bool delegated = false;
};

void plan_randomized(Context& c, DeliveryResult& result) {
  const int P = c.parent.group_size;
  Machine& machine = c.machine;
  const int G = c.parent.groups();
  const double a = c.options.delegation_factor > 0
                       ? c.options.delegation_factor
                       : default_delegation_factor(c.r, P);

  // Group sizes for s, then the count of large parts for their numbering.
  machine.charge_collective(c.parent, 1);
  machine.charge_collective(c.parent, 1);

  std::vector<Outbox<PartDescriptor>> to_delegate(machine.size());
  // items[pe][j]: parts coordinated by pe for subgroup j.
  std::vector<std::vector<std::vector<Part>>> items(machine.size());
  result.delegated.assign(G, 0);

  for (int g = 0; g < G; ++g) {
    const PeGroup grp = c.parent.group(g);
    for (int i = 0; i < P; ++i) items[grp.member(i)].resize(c.r);
    std::uint64_t n = 0;
    for (int j = 0; j < c.r; ++j) n += c.plan.totals[g][j];
    const auto s = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(a * static_cast<double>(n) /
                                      (static_cast<double>(c.r) * P)));

    std::vector<Part> large;
    std::vector<int> large_subgroup;
    for (int i = 0; i < P; ++i) {
      const int pe = grp.member(i);
      for (int j = 0; j < c.r; ++j) {
        const std::uint64_t x = c.size(pe, j);
        const std::uint64_t whole = x > s ? x / s : 0;
        for (std::uint64_t k = 0; k < whole; ++k) {
          large.push_back({i, static_cast<std::size_t>(k * s), s, true});
          large_subgroup.push_back(j);
        }
        if (x > whole * s) {
          items[pe][j].push_back({i, static_cast<std::size_t>(whole * s),
                                  x - whole * s, false});
        }
      }
    }
    result.delegated[g] = large.size();
    if (large.empty()) continue;
    const FeistelPermutation pi(large.size(),
                                c.options.seed.sub("delegate/g" + std::to_string(g)));
    for (std::size_t k = 0; k < large.size(); ++k) {
      const int d = grp.member(static_cast<int>(pi.apply(k) % P));
      const Part& part = large[k];
      const int j = large_subgroup[k];
      items[d][j].push_back(part);
      to_delegate[grp.member(part.origin)].push_back(
          {d, {{static_cast<std::uint32_t>(j), part.offset, part.length}}});
    }
  }
  machine.exchange<PartDescriptor>(c.parent, std::move(to_delegate), Traffic::Control);

  // Coordinators shuffle their parts, then number them by a prefix sum over
  // coordinators in permuted order.
  machine.for_each_pe(c.parent, [&](int pe) {
    Rng rng(c.options.seed.sub("reorder/pe" + std::to_string(pe)));
    for (auto& list : items[pe]) {
      for (std::size_t k = list.size(); k > 1; --k) {
        std::swap(list[k - 1], list[rng.below(k)]);
      }
    }
  });
  machine.charge_collective(c.parent, static_cast<std::uint64_t>(c.r));

  std::vector<Outbox<PlacementReply>> replies(machine.size());
  for (int g = 0; g < G; ++g) {
    const PeGroup grp = c.parent.group(g);
    for (int j = 0; j < c.r; ++j) {
      const auto order = feistel_order(
          P, c.options.seed.sub("perm/g" + std::to_string(g) + "/j" +
                                std::to_string(j)));
      std::uint64_t run = 0;
      for (int ci : order) {
        const int coord = grp.member(ci);
        for (const Part& part : items[coord][j]) {
          const int origin = grp.member(part.origin);
          const std::size_t before = c.plan.slices[origin][j].size();
          c.cut(g, origin, j, part.offset, run, part.length);
          run += part.length;
          if (part.delegated) {
            Message<PlacementReply> msg{origin, {}};
            for (std::size_t k = before; k < c.plan.slices[origin][j].size(); ++k) {
              const auto& sl = c.plan.slices[origin][j][k];
              msg.payload.push_back({sl.dest, sl.offset, sl.length});
            }
            replies[coord].push_back(std::move(msg));
          }
        }
      }
    }
  }
  machine.exchange<PlacementReply>(c.parent, std::move(replies), Traffic::Control);
}

}  // namespace

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::Simple: return "simple";
    case Scheme::Permuted: return "permuted";
    case Scheme::Deterministic: return "deterministic";
    case Scheme::Randomized: return "randomized";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::Simple, Scheme::Permuted, Scheme::Deterministic,
                   Scheme::Randomized}) {
    if (scheme_name(s) == name) return s;
  }
  throw ConfigError("unknown delivery scheme '" + std::string(name) + "'");
}

double default_delegation_factor(int r, int group_size) {
  const double l = std::log(static_cast<double>(r) * group_size / 2.0);
  if (l <= 0) return 1.0;
  const double bound = 0.5 * (std::sqrt(1.0 + r / l) - 1.0);
  return std::max(1.0, std::floor(bound));
}

std::uint64_t receiver_boundary(std::uint64_t m, int q, int t) {
  return static_cast<std::uint64_t>(static_cast<u128>(t) * m /
                                    static_cast<unsigned>(q));
}

DeliveryResult deliver(Machine& machine, const Layout& parent, int r,
                       Pieces pieces, const DeliveryOptions& options) {
  if (r < 1 || parent.group_size % r != 0) {
    throw PreconditionError("group of " + std::to_string(parent.group_size) +
                            " PEs cannot split into " + std::to_string(r) +
                            " subgroups");
  }
  const int p = machine.size();
  pieces.resize(p);
  for (int pe = parent.first; pe < parent.first + parent.pes(); ++pe) {
    if (static_cast<int>(pieces[pe].size()) != r) {
      throw PreconditionError("PE " + std::to_string(pe) + " holds " +
                              std::to_string(pieces[pe].size()) +
                              " pieces, expected " + std::to_string(r));
    }
  }

  DeliveryResult result;
  DeliveryPlan& plan = result.plan;
  plan.slices.resize(p);
  for (int pe = parent.first; pe < parent.first + parent.pes(); ++pe) {
    plan.slices[pe].resize(r);
  }
  result.small_load.assign(p, 0);
  Context c{machine, parent, r, parent.group_size / r, pieces, options, plan};

  // Subgroup totals come out of the piece-size prefix sum.
  const auto sums = machine.prefix_sum_vec(parent, piece_sizes(c));
  plan.totals = sums.totals;

  switch (options.scheme) {
    case Scheme::Simple: plan_prefix(c, false); break;
    case Scheme::Permuted: plan_prefix(c, true); break;
    case Scheme::Deterministic: plan_deterministic(c, result); break;
    case Scheme::Randomized: plan_randomized(c, result); break;
  }

  std::vector<Outbox<Element>> out(p);
  machine.for_each_pe(parent, [&](int pe) {
    for (int j = 0; j < r; ++j) {
      auto& list = plan.slices[pe][j];
      std::sort(list.begin(), list.end(), [](const Slice& x, const Slice& y) {
        return x.offset < y.offset;
      });
      const auto& src = pieces[pe][j];
      std::size_t covered = 0;
      for (const auto& s : list) {
        if (s.offset != covered) throw InvariantError("slices do not tile a piece");
        covered += s.length;
        out[pe].push_back({s.dest, {src.begin() + static_cast<std::ptrdiff_t>(s.offset),
                                    src.begin() + static_cast<std::ptrdiff_t>(s.offset + s.length)}});
      }
      if (covered != src.size()) throw InvariantError("slices do not cover a piece");
    }
  });
  auto exchanged = machine.exchange<Element>(parent, std::move(out));

  result.runs.resize(p);
  for (int pe = 0; pe < p; ++pe) {
    for (auto& rec : exchanged.inboxes[pe]) {
      result.runs[pe].push_back(std::move(rec.payload));
    }
  }
  return result;
}

}  // namespace mlsort
