#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mlsort {

// The four phases every level of both sorters is split into.
enum class Phase : std::uint8_t {
  SplitterSelection = 0,
  BucketProcessing = 1,
  DataDelivery = 2,
  LocalSorting = 3,
};
inline constexpr std::size_t kPhaseCount = 4;
std::string_view phase_name(Phase phase);

// Data traffic carries elements; control traffic carries piece descriptors
// and replies (delegation, coordinator assignment).
enum class Traffic : std::uint8_t { Data, Control };

struct CostParams {
  double alpha = 100.0;  // per message startup
  double beta = 1.0;     // per machine word
};

// Outcome of one exchange: P participants, h = max words sent or received
// by any PE, r = max messages sent or received by any PE, cost h*beta+r*alpha.
struct ExchStats {
  int participants = 0;
  std::uint64_t max_words = 0;
  std::uint64_t max_msgs = 0;
  double modeled_cost = 0.0;
};

struct ExchangeRecord {
  int level = 0;
  Phase phase = Phase::DataDelivery;
  Traffic traffic = Traffic::Data;
  ExchStats stats;
  std::vector<std::uint64_t> sent_words, recv_words;
  std::vector<std::uint32_t> sent_msgs, recv_msgs;
};

struct PhaseTotals {
  double modeled_time = 0.0;
  std::uint64_t max_words = 0;
  std::uint64_t max_msgs = 0;
};

// Per level maxima over PEs for one traffic class.
struct LevelMessageStats {
  int level = 0;
  std::uint32_t max_sent_msgs = 0;
  std::uint32_t max_recv_msgs = 0;
  std::uint64_t max_sent_words = 0;
  std::uint64_t max_recv_words = 0;
};

class CostLedger {
 public:
  explicit CostLedger(int p = 0);

  int pes() const { return static_cast<int>(sent_words_.size()); }

  void set_context(int level, Phase phase) {
    level_ = level;
    phase_ = phase;
  }
  int level() const { return level_; }
  Phase phase() const { return phase_; }

  // Charges a closed-form collective cost to the current phase.
  void charge(double cost, std::uint64_t words_per_pe);
  void record(ExchangeRecord rec);

  double modeled_time() const { return modeled_time_; }
  const PhaseTotals& phase_totals(Phase phase) const {
    return phases_[static_cast<std::size_t>(phase)];
  }
  const std::vector<ExchangeRecord>& exchanges() const { return exchanges_; }

  const std::vector<std::uint64_t>& sent_words() const { return sent_words_; }
  const std::vector<std::uint64_t>& recv_words() const { return recv_words_; }
  const std::vector<std::uint64_t>& sent_msgs() const { return sent_msgs_; }
  const std::vector<std::uint64_t>& recv_msgs() const { return recv_msgs_; }

  // Levels that saw at least one exchange of the given class, ascending.
  std::vector<LevelMessageStats> level_stats(Traffic traffic) const;

 private:
  std::vector<std::uint64_t> sent_words_, recv_words_, sent_msgs_, recv_msgs_;
  double modeled_time_ = 0.0;
  std::array<PhaseTotals, kPhaseCount> phases_{};
  std::vector<ExchangeRecord> exchanges_;
  int level_ = 0;
  Phase phase_ = Phase::LocalSorting;
};

// Sets the ledger context for a scope and restores the previous one.
class PhaseScope {
 public:
  PhaseScope(CostLedger& ledger, int level, Phase phase)
      : ledger_(ledger), level_(ledger.level()), phase_(ledger.phase()) {
    ledger_.set_context(level, phase);
  }
  ~PhaseScope() { ledger_.set_context(level_, phase_); }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  CostLedger& ledger_;
  int level_;
  Phase phase_;
};

}  // namespace mlsort
