#include "mlsort/ledger.hpp"

#include <algorithm>
#include <map>

namespace mlsort {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::SplitterSelection:
      return "splitter_selection";
    case Phase::BucketProcessing:
      return "bucket_processing";
    case Phase::DataDelivery:
      return "data_delivery";
    case Phase::LocalSorting:
      return "local_sorting";
  }
  return "unknown";
}

CostLedger::CostLedger(int p)
    : sent_words_(p, 0), recv_words_(p, 0), sent_msgs_(p, 0), recv_msgs_(p, 0) {}

void CostLedger::charge(double cost, std::uint64_t words_per_pe) {
  modeled_time_ += cost;
  auto& totals = phases_[static_cast<std::size_t>(phase_)];
  totals.modeled_time += cost;
  totals.max_words = std::max(totals.max_words, words_per_pe);
}

void CostLedger::record(ExchangeRecord rec) {
  rec.level = level_;
  rec.phase = phase_;
  for (std::size_t pe = 0; pe < rec.sent_words.size(); ++pe) {
    sent_words_[pe] += rec.sent_words[pe];
    recv_words_[pe] += rec.recv_words[pe];
    sent_msgs_[pe] += rec.sent_msgs[pe];
    recv_msgs_[pe] += rec.recv_msgs[pe];
  }
  modeled_time_ += rec.stats.modeled_cost;
  auto& totals = phases_[static_cast<std::size_t>(phase_)];
  totals.modeled_time += rec.stats.modeled_cost;
  totals.max_words = std::max(totals.max_words, rec.stats.max_words);
  totals.max_msgs = std::max(totals.max_msgs, rec.stats.max_msgs);
  exchanges_.push_back(std::move(rec));
}

std::vector<LevelMessageStats> CostLedger::level_stats(Traffic traffic) const {
  // Several exchanges of one class in one level are separate supersteps; the
  // per-level bound is per superstep, so keep the maximum.
  std::map<int, LevelMessageStats> by_level;
  for (const auto& rec : exchanges_) {
    if (rec.traffic != traffic) continue;
    auto& s = by_level[rec.level];
    s.level = rec.level;
    for (std::size_t pe = 0; pe < rec.sent_msgs.size(); ++pe) {
      s.max_sent_msgs = std::max(s.max_sent_msgs, rec.sent_msgs[pe]);
      s.max_recv_msgs = std::max(s.max_recv_msgs, rec.recv_msgs[pe]);
      s.max_sent_words = std::max(s.max_sent_words, rec.sent_words[pe]);
      s.max_recv_words = std::max(s.max_recv_words, rec.recv_words[pe]);
    }
  }
  std::vector<LevelMessageStats> out;
  for (auto& [level, s] : by_level) out.push_back(s);
  return out;
}

}  // namespace mlsort
