#include "mlsort/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "mlsort/ams.hpp"
#include "mlsort/errors.hpp"
#include "mlsort/rlm.hpp"

namespace mlsort {

namespace {

constexpr std::uint64_t kZipfUniverse = 1 << 16;

std::string trim_number(double x) {
  std::ostringstream out;
  out << x;
  return out.str();
}

template <class T>
T parse_integer(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(std::string(what) + ": not an integer: " + std::string(text));
  }
  return value;
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ConfigError(std::string(what) + ": not a number: " + std::string(text));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<double> zipf_cdf(double theta) {
  std::vector<double> cdf(kZipfUniverse);
  double sum = 0.0;
  for (std::uint64_t k = 0; k < kZipfUniverse; ++k) {
    sum += 1.0 / std::pow(static_cast<double>(k + 1), theta);
    cdf[k] = sum;
  }
  for (auto& c : cdf) c /= sum;
  return cdf;
}

bool verify_output(const std::vector<std::vector<Element>>& input,
                   const std::vector<std::vector<Element>>& output) {
  std::vector<Element> expected, got;
  for (const auto& v : input) expected.insert(expected.end(), v.begin(), v.end());
  for (const auto& v : output) got.insert(got.end(), v.begin(), v.end());
  std::sort(expected.begin(), expected.end());
  return got == expected;
}

}  // namespace

std::string_view algorithm_name(Algorithm algo) {
  return algo == Algorithm::Ams ? "ams" : "rlm";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "ams") return Algorithm::Ams;
  if (name == "rlm") return Algorithm::Rlm;
  throw ConfigError("unknown algorithm: " + std::string(name));
}

std::string distribution_name(const InputSpec& spec) {
  switch (spec.kind) {
    case Distribution::Uniform:
      return "uniform";
    case Distribution::Sorted:
      return "sorted";
    case Distribution::Reverse:
      return "reverse";
    case Distribution::Equal:
      return "equal";
    case Distribution::Zipf:
      return "zipf:" + trim_number(spec.theta);
  }
  return "uniform";
}

InputSpec parse_distribution(std::string_view text) {
  if (text == "uniform") return {Distribution::Uniform};
  if (text == "sorted") return {Distribution::Sorted};
  if (text == "reverse") return {Distribution::Reverse};
  if (text == "equal") return {Distribution::Equal};
  if (text.starts_with("zipf:")) {
    const double theta = parse_double(text.substr(5), "zipf exponent");
    if (theta <= 0.0) throw ConfigError("zipf exponent must be positive");
    return {Distribution::Zipf, theta};
  }
  throw ConfigError("unknown distribution: " + std::string(text));
}

std::string_view verdict_name(Verdict verdict) {
  switch (verdict) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Skipped:
      return "skipped";
  }
  return "skipped";
}

void validate_config(const ExperimentConfig& c) {
  if (c.p < 1) throw ConfigError("p must be positive");
  if (c.reps < 0) throw ConfigError("reps must be non-negative");
  if (c.cost.alpha < 0 || c.cost.beta < 0) throw ConfigError("costs must be non-negative");
  if (c.n_per_pe > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("n_per_pe too large");
  }
  if (c.algorithm == Algorithm::Ams) {
    AmsParams params;
    params.levels = c.levels;
    params.groups = c.groups;
    params.a = c.a;
    params.b = c.b;
    params.epsilon = c.epsilon;
    params.scheme = c.scheme;
    validate_ams_params(params, c.p);
  } else {
    if (c.levels < 1) throw ConfigError("levels must be positive");
    if (!c.groups.empty()) {
      if (static_cast<int>(c.groups.size()) != c.levels) {
        throw ConfigError("groups must list one count per level");
      }
      validate_level_plan(LevelPlan{c.groups}, c.p);
    }
  }
}

std::vector<std::vector<Element>> generate_input(const InputSpec& spec, int p,
                                                 std::uint64_t n_per_pe,
                                                 const SeedSpec& seed) {
  std::vector<std::vector<Element>> data(p);
  const std::uint64_t n = n_per_pe * static_cast<std::uint64_t>(p);
  const auto cdf = spec.kind == Distribution::Zipf ? zipf_cdf(spec.theta)
                                                   : std::vector<double>{};
  parallel_for(Exec::Parallel, static_cast<std::size_t>(p), [&](std::size_t i) {
    Rng rng(seed.sub("pe" + std::to_string(i)));
    std::vector<std::uint64_t> keys(n_per_pe);
    for (std::uint64_t j = 0; j < n_per_pe; ++j) {
      const std::uint64_t global = i * n_per_pe + j;
      switch (spec.kind) {
        case Distribution::Uniform:
          keys[j] = rng.next();
          break;
        case Distribution::Sorted:
          keys[j] = global;
          break;
        case Distribution::Reverse:
          keys[j] = n - 1 - global;
          break;
        case Distribution::Equal:
          keys[j] = 0;
          break;
        case Distribution::Zipf:
          keys[j] = static_cast<std::uint64_t>(
              std::upper_bound(cdf.begin(), cdf.end() - 1, rng.unit()) - cdf.begin());
          break;
      }
    }
    data[i] = tag_elements(keys, static_cast<std::uint32_t>(i));
  });
  return data;
}

MetricsRecord run_once(const ExperimentConfig& config, int rep) {
  validate_config(config);
  const auto tag = "-rep" + std::to_string(rep);
  auto input = generate_input(config.input, config.p, config.n_per_pe,
                              SeedSpec{config.seed, "input" + tag});
  const SeedSpec algo_seed{config.seed, "algo" + tag};

  MetricsRecord rec;
  rec.config = config;
  rec.rep = rep;
  rec.n = config.n_per_pe * static_cast<std::uint64_t>(config.p);

  Machine machine(config.p, config.cost, config.exec);
  const bool keep_input = config.verify && rec.n <= config.verify_cap;
  const auto start = std::chrono::steady_clock::now();
  SortResult sorted;
  std::vector<AmsLevelReport> reports;
  if (config.algorithm == Algorithm::Ams) {
    AmsParams params;
    params.levels = config.levels;
    params.groups = config.groups;
    params.a = config.a;
    params.b = config.b;
    params.epsilon = config.epsilon;
    params.scheme = config.scheme;
    params.seed = algo_seed;
    auto result = ams_sort(machine, keep_input ? input : std::move(input), params);
    sorted = std::move(result.sort);
    reports = std::move(result.reports);
    rec.a = result.a;
    for (const auto& r : reports) rec.plan.push_back(r.r);
  } else {
    RlmOptions options;
    options.plan = config.groups.empty() ? make_level_plan(config.p, config.levels)
                                         : LevelPlan{config.groups};
    options.scheme = config.scheme;
    options.seed = algo_seed;
    rec.plan = options.plan.r;
    sorted = rlm_sort(machine, keep_input ? input : std::move(input), options);
  }
  const auto stop = std::chrono::steady_clock::now();
  if (config.timing) {
    rec.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  }

  const auto& ledger = machine.ledger();
  rec.modeled_time = ledger.modeled_time();
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    rec.phases[i] = ledger.phase_totals(static_cast<Phase>(i));
  }
  const double avg = rec.n == 0 ? 1.0 : static_cast<double>(rec.n) / config.p;
  const auto data_stats = ledger.level_stats(Traffic::Data);
  const auto ctrl_stats = ledger.level_stats(Traffic::Control);
  for (const auto& load : sorted.levels) {
    LevelMetrics lm;
    lm.level = load.level;
    lm.groups = load.groups;
    lm.min_load = load.min_load;
    lm.max_load = load.max_load;
    lm.imbalance = static_cast<double>(load.max_load) / avg - 1.0;
    for (const auto& s : data_stats) {
      if (s.level != load.level) continue;
      lm.max_sent_msgs = s.max_sent_msgs;
      lm.max_recv_msgs = s.max_recv_msgs;
      lm.max_sent_words = s.max_sent_words;
      lm.max_recv_words = s.max_recv_words;
    }
    for (const auto& s : ctrl_stats) {
      if (s.level == load.level) lm.control_max_msgs = std::max(s.max_sent_msgs, s.max_recv_msgs);
    }
    for (const auto& r : reports) {
      if (r.level == load.level) lm.imbalance_warning = r.imbalance_warning;
    }
    rec.level_msgs_sum += std::max(lm.max_sent_msgs, lm.max_recv_msgs);
    rec.levels.push_back(lm);
  }
  std::uint64_t final_max = 0;
  for (const auto& v : sorted.data) final_max = std::max<std::uint64_t>(final_max, v.size());
  rec.max_load_ratio = rec.n == 0 ? 0.0 : static_cast<double>(final_max) / avg;

  if (keep_input) {
    rec.verdict = globally_sorted(sorted.data) && verify_output(input, sorted.data)
                      ? Verdict::Pass
                      : Verdict::Fail;
  }
  return rec;
}

std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  std::vector<MetricsRecord> out;
  for (int rep = 0; rep < config.reps; ++rep) out.push_back(run_once(config, rep));
  return out;
}

SweepAxis parse_axis(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("axis must look like param=v1,v2,...");
  }
  SweepAxis axis;
  axis.param = std::string(text.substr(0, eq));
  for (auto v : split(text.substr(eq + 1), ',')) {
    if (v.empty()) throw ConfigError("empty axis value");
    axis.values.emplace_back(v);
  }
  return axis;
}

void apply_param(ExperimentConfig& c, std::string_view param, std::string_view value) {
  if (param == "algo") {
    c.algorithm = parse_algorithm(value);
  } else if (param == "p" || param == "pes") {
    c.p = parse_integer<int>(value, param);
  } else if (param == "n_per_pe" || param == "n-per-pe") {
    c.n_per_pe = parse_integer<std::uint64_t>(value, param);
  } else if (param == "k" || param == "levels") {
    c.levels = parse_integer<int>(value, param);
    c.groups.clear();
  } else if (param == "groups") {
    c.groups.clear();
    for (auto g : split(value, ',')) c.groups.push_back(parse_integer<int>(g, param));
    c.levels = static_cast<int>(c.groups.size());
  } else if (param == "a") {
    c.a = parse_double(value, param);
  } else if (param == "b") {
    c.b = parse_integer<int>(value, param);
  } else if (param == "ab") {
    if (c.a == 0.0) c.a = 1.0;
    const double ab = parse_double(value, param);
    c.b = std::max(1, static_cast<int>(std::lround(ab / c.a)));
  } else if (param == "eps" || param == "epsilon") {
    c.epsilon = parse_double(value, param);
  } else if (param == "delivery") {
    c.scheme = parse_scheme(value);
  } else if (param == "seed") {
    c.seed = parse_integer<std::uint64_t>(value, param);
  } else if (param == "reps") {
    c.reps = parse_integer<int>(value, param);
  } else if (param == "dist") {
    c.input = parse_distribution(value);
  } else if (param == "alpha") {
    c.cost.alpha = parse_double(value, param);
  } else if (param == "beta") {
    c.cost.beta = parse_double(value, param);
  } else {
    throw ConfigError("unknown parameter: " + std::string(param));
  }
}

std::vector<MetricsRecord> sweep(const ExperimentConfig& base, const SweepAxis& axis) {
  std::vector<MetricsRecord> out;
  for (const auto& v : axis.values) {
    ExperimentConfig c = base;
    apply_param(c, axis.param, v);
    auto recs = run_experiment(c);
    out.insert(out.end(), std::make_move_iterator(recs.begin()),
               std::make_move_iterator(recs.end()));
  }
  return out;
}

std::string to_jsonl(const MetricsRecord& rec) {
  using nlohmann::ordered_json;
  const auto& c = rec.config;
  ordered_json j;
  j["schema"] = 1;
  j["algo"] = algorithm_name(c.algorithm);
  j["p"] = c.p;
  j["n_per_pe"] = c.n_per_pe;
  j["n"] = rec.n;
  j["levels"] = rec.plan.size();
  j["groups"] = rec.plan;
  if (c.algorithm == Algorithm::Ams) {
    j["a"] = rec.a;
    j["b"] = c.b;
    j["eps"] = c.epsilon;
  }
  j["delivery"] = scheme_name(c.scheme);
  j["dist"] = distribution_name(c.input);
  j["seed"] = c.seed;
  j["rep"] = rec.rep;
  j["alpha"] = c.cost.alpha;
  j["beta"] = c.cost.beta;
  j["modeled_time"] = rec.modeled_time;
  ordered_json phases;
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    const auto& t = rec.phases[i];
    phases[std::string(phase_name(static_cast<Phase>(i)))] = {
        {"modeled_time", t.modeled_time},
        {"max_words", t.max_words},
        {"max_msgs", t.max_msgs}};
  }
  j["phases"] = phases;
  ordered_json levels = ordered_json::array();
  for (const auto& l : rec.levels) {
    levels.push_back({{"level", l.level},
                      {"groups", l.groups},
                      {"min_load", l.min_load},
                      {"max_load", l.max_load},
                      {"imbalance", l.imbalance},
                      {"max_sent_msgs", l.max_sent_msgs},
                      {"max_recv_msgs", l.max_recv_msgs},
                      {"max_sent_words", l.max_sent_words},
                      {"max_recv_words", l.max_recv_words},
                      {"control_max_msgs", l.control_max_msgs},
                      {"imbalance_warning", l.imbalance_warning}});
  }
  j["level_stats"] = levels;
  j["level_msgs_sum"] = rec.level_msgs_sum;
  j["max_load_ratio"] = rec.max_load_ratio;
  j["verdict"] = verdict_name(rec.verdict);
  if (rec.wall_ms) j["wall_ms"] = *rec.wall_ms;
  return j.dump();
}

std::string csv_header() {
  std::string h =
      "algo,p,n_per_pe,levels,groups,a,b,eps,delivery,dist,seed,rep,alpha,beta,"
      "modeled_time";
  for (std::size_t i = 0; i < kPhaseCount; ++i) {
    const std::string name(phase_name(static_cast<Phase>(i)));
    h += "," + name + "_time," + name + "_max_words," + name + "_max_msgs";
  }
  h += ",level_msgs_sum,max_load_ratio,verdict";
  return h;
}

std::string to_csv(const MetricsRecord& rec) {
  const auto& c = rec.config;
  std::ostringstream out;
  out.precision(17);
  std::string groups;
  for (std::size_t i = 0; i < rec.plan.size(); ++i) {
    groups += (i ? "x" : "") + std::to_string(rec.plan[i]);
  }
  out << algorithm_name(c.algorithm) << ',' << c.p << ',' << c.n_per_pe << ','
      << rec.plan.size() << ',' << groups << ',' << rec.a << ',' << c.b << ','
      << c.epsilon << ',' << scheme_name(c.scheme) << ',' << distribution_name(c.input)
      << ',' << c.seed << ',' << rec.rep << ',' << c.cost.alpha << ',' << c.cost.beta
      << ',' << rec.modeled_time;
  for (const auto& t : rec.phases) {
    out << ',' << t.modeled_time << ',' << t.max_words << ',' << t.max_msgs;
  }
  out << ',' << rec.level_msgs_sum << ',' << rec.max_load_ratio << ','
      << verdict_name(rec.verdict);
  return out.str();
}

}  // namespace mlsort
