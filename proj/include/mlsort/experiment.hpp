#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlsort/delivery.hpp"
#include "mlsort/ledger.hpp"
#include "mlsort/simnet.hpp"

namespace mlsort {

enum class Algorithm { Ams, Rlm };
std::string_view algorithm_name(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

enum class Distribution { Uniform, Sorted, Reverse, Zipf, Equal };

struct InputSpec {
  Distribution kind = Distribution::Uniform;
  double theta = 1.0;  // zipf exponent
  bool operator==(const InputSpec&) const = default;
};
std::string distribution_name(const InputSpec& spec);
// uniform, sorted, reverse, equal or zipf:THETA.
InputSpec parse_distribution(std::string_view text);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::Ams;
  int p = 4;
  std::uint64_t n_per_pe = 1000;
  int levels = 1;
  std::vector<int> groups;  // empty picks the default plan
  double a = 0.0;
  int b = 16;
  double epsilon = 0.25;
  Scheme scheme = Scheme::Deterministic;
  std::uint64_t seed = 1;
  int reps = 1;
  InputSpec input;
  CostParams cost;
  bool verify = true;
  std::uint64_t verify_cap = 10'000'000;  // total elements
  bool timing = false;                    // report wall time
  Exec exec = Exec::Parallel;
};

// ConfigError on invalid settings.
void validate_config(const ExperimentConfig& config);

// Input of one run; PE i gets n_per_pe elements drawn from seed.sub("pe{i}").
std::vector<std::vector<Element>> generate_input(const InputSpec& spec, int p,
                                                 std::uint64_t n_per_pe,
                                                 const SeedSpec& seed);

struct LevelMetrics {
  int level = 0;
  int groups = 0;
  std::uint64_t min_load = 0;
  std::uint64_t max_load = 0;
  double imbalance = 0.0;  // max_load / (n/p) - 1
  // Data traffic, maxima over PEs.
  std::uint32_t max_sent_msgs = 0;
  std::uint32_t max_recv_msgs = 0;
  std::uint64_t max_sent_words = 0;
  std::uint64_t max_recv_words = 0;
  // Control traffic, maxima over PEs.
  std::uint32_t control_max_msgs = 0;
  bool imbalance_warning = false;
};

enum class Verdict { Pass, Fail, Skipped };
std::string_view verdict_name(Verdict verdict);

struct MetricsRecord {
  ExperimentConfig config;
  int rep = 0;
  std::uint64_t n = 0;
  std::vector<int> plan;  // group counts actually used
  double a = 0.0;         // oversampling factor actually used
  double modeled_time = 0.0;
  std::array<PhaseTotals, kPhaseCount> phases{};
  std::vector<LevelMetrics> levels;
  // Sum over levels of the largest per-PE data message count.
  std::uint64_t level_msgs_sum = 0;
  double max_load_ratio = 0.0;  // final max load / (n/p)
  Verdict verdict = Verdict::Skipped;
  std::optional<double> wall_ms;
};

// One repetition. Inputs come from stream "input-rep{rep}" and the
// algorithm from "algo-rep{rep}", both under config.seed.
MetricsRecord run_once(const ExperimentConfig& config, int rep);

// All repetitions in repetition order.
std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config);

struct SweepAxis {
  std::string param;
  std::vector<std::string> values;
};

// "param=v1,v2,...". An empty value list is allowed.
SweepAxis parse_axis(std::string_view text);

// Sets one parameter from its textual value. The pseudo parameter "ab"
// keeps a (1 when unset) and sets b = max(1, round(value / a)).
void apply_param(ExperimentConfig& config, std::string_view param,
                 std::string_view value);

// One run_experiment per axis value, concatenated.
std::vector<MetricsRecord> sweep(const ExperimentConfig& base,
                                 const SweepAxis& axis);

// One line of JSON, no trailing newline.
std::string to_jsonl(const MetricsRecord& record);
std::string csv_header();
std::string to_csv(const MetricsRecord& record);

}  // namespace mlsort
