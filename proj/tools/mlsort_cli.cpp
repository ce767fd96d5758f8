#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>

#include "mlsort/errors.hpp"
#include "mlsort/experiment.hpp"

using namespace mlsort;

namespace {

struct Options {
  std::string algo = "ams";
  int pes = 4;
  std::uint64_t n_per_pe = 1000;
  int levels = 1;
  std::vector<int> groups;
  double a = 0.0;
  int b = 16;
  double eps = 0.25;
  std::string delivery = "deterministic";
  std::uint64_t seed = 1;
  int reps = 1;
  std::string dist = "uniform";
  double alpha = 100.0;
  double beta = 1.0;
  std::string out;
  std::string format = "jsonl";
  bool verify = true;
  std::uint64_t verify_cap = 10'000'000;
  bool timing = false;
  bool serial = false;
  std::string axis;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--algo", o.algo, "ams or rlm")->capture_default_str();
  cmd->add_option("--pes", o.pes, "number of simulated PEs")->capture_default_str();
  cmd->add_option("--n-per-pe", o.n_per_pe, "elements per PE")->capture_default_str();
  cmd->add_option("--levels", o.levels, "recursion levels k")->capture_default_str();
  cmd->add_option("--groups", o.groups, "group count per level, e.g. 8,8")
      ->delimiter(',');
  cmd->add_option("--a", o.a, "oversampling factor, 0 for the default")
      ->capture_default_str();
  cmd->add_option("--b", o.b, "overpartitioning factor")->capture_default_str();
  cmd->add_option("--eps", o.eps, "imbalance target")->capture_default_str();
  cmd->add_option("--delivery", o.delivery,
                  "simple, permuted, deterministic or randomized")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
  cmd->add_option("--reps", o.reps, "repetitions")->capture_default_str();
  cmd->add_option("--dist", o.dist, "uniform, sorted, reverse, equal or zipf:THETA")
      ->capture_default_str();
  cmd->add_option("--alpha", o.alpha, "cost per message")->capture_default_str();
  cmd->add_option("--beta", o.beta, "cost per word")->capture_default_str();
  cmd->add_option("--out", o.out, "output file, stdout when omitted");
  cmd->add_option("--format", o.format, "jsonl or csv")->capture_default_str();
  cmd->add_flag("--verify,!--no-verify", o.verify, "check output against a sequential sort");
  cmd->add_option("--verify-cap", o.verify_cap, "largest n that is verified")
      ->capture_default_str();
  cmd->add_flag("--timing", o.timing, "add wall time to each record");
  cmd->add_flag("--serial", o.serial, "run per-PE work on one thread");
}

ExperimentConfig make_config(const Options& o) {
  ExperimentConfig c;
  c.algorithm = parse_algorithm(o.algo);
  c.p = o.pes;
  c.n_per_pe = o.n_per_pe;
  c.levels = o.groups.empty() ? o.levels : static_cast<int>(o.groups.size());
  c.groups = o.groups;
  c.a = o.a;
  c.b = o.b;
  c.epsilon = o.eps;
  c.scheme = parse_scheme(o.delivery);
  c.seed = o.seed;
  c.reps = o.reps;
  c.input = parse_distribution(o.dist);
  c.cost = {o.alpha, o.beta};
  c.verify = o.verify;
  c.verify_cap = o.verify_cap;
  c.timing = o.timing;
  c.exec = o.serial ? Exec::Serial : Exec::Parallel;
  if (o.format != "jsonl" && o.format != "csv") {
    throw ConfigError("unknown format: " + o.format);
  }
  return c;
}

int emit(const Options& o, const std::vector<MetricsRecord>& records) {
  std::unique_ptr<std::ofstream> file;
  if (!o.out.empty()) {
    file = std::make_unique<std::ofstream>(o.out);
    if (!*file) {
      std::cerr << "cannot open " << o.out << "\n";
      return 1;
    }
  }
  std::ostream& out = file ? *file : std::cout;
  const bool csv = o.format == "csv";
  if (csv) out << csv_header() << "\n";
  bool failed = false;
  for (const auto& rec : records) {
    out << (csv ? to_csv(rec) : to_jsonl(rec)) << "\n";
    failed |= rec.verdict == Verdict::Fail;
  }
  if (failed) {
    std::cerr << "verification failed\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated multi-level distributed sorting experiments"};
  app.require_subcommand(1);
  Options o;
  auto* sort_cmd = app.add_subcommand("sort", "run one configuration");
  add_common(sort_cmd, o);
  auto* sweep_cmd = app.add_subcommand("sweep", "run a configuration over one parameter axis");
  add_common(sweep_cmd, o);
  sweep_cmd->add_option("--axis", o.axis, "param=v1,v2,... (params: algo p n_per_pe k "
                                          "groups a b ab eps delivery seed reps dist "
                                          "alpha beta)")
      ->required();
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  try {
    const auto config = make_config(o);
    validate_config(config);
    std::vector<MetricsRecord> records;
    if (*sweep_cmd) {
      records = sweep(config, parse_axis(o.axis));
    } else {
      records = run_experiment(config);
    }
    return emit(o, records);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const UnsupportedTopology& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
}
