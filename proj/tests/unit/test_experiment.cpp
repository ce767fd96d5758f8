#include <doctest.h>

#include <json.hpp>

#include "mlsort/errors.hpp"
#include "mlsort/experiment.hpp"
#include "mlsort/sorter.hpp"
#include "oracle.hpp"

using namespace mlsort;

TEST_CASE("names round trip") {
  for (auto algo : {Algorithm::Ams, Algorithm::Rlm}) {
    CHECK(parse_algorithm(algorithm_name(algo)) == algo);
  }
  for (const char* d : {"uniform", "sorted", "reverse", "equal", "zipf:1.5"}) {
    CHECK(distribution_name(parse_distribution(d)) == d);
  }
  CHECK_THROWS_AS(parse_algorithm("quick"), ConfigError);
  CHECK_THROWS_AS(parse_distribution("zipf:"), ConfigError);
  CHECK_THROWS_AS(parse_distribution("zipf:-1"), ConfigError);
  CHECK_THROWS_AS(parse_distribution("normal"), ConfigError);
}

TEST_CASE("input generators") {
  const SeedSpec seed{3, "gen"};
  const auto sorted = generate_input({Distribution::Sorted}, 4, 5, seed);
  CHECK(globally_sorted(sorted));
  CHECK(sorted[3][4].key == 19);
  const auto reverse = generate_input({Distribution::Reverse}, 4, 5, seed);
  CHECK(reverse[0][0].key == 19);
  CHECK(reverse[3][4].key == 0);
  for (const auto& v : generate_input({Distribution::Equal}, 3, 4, seed)) {
    for (const auto& e : v) CHECK(e.key == 0);
  }
  const auto zipf = generate_input({Distribution::Zipf, 1.2}, 4, 500, seed);
  std::size_t zeros = 0;
  for (const auto& v : zipf) {
    for (const auto& e : v) {
      CHECK(e.key < (1u << 16));
      zeros += e.key == 0;
    }
  }
  // The most frequent key of zipf(1.2) on 2^16 values has mass above 0.15.
  CHECK(zeros > 200);
  const auto u1 = generate_input({}, 4, 50, seed);
  CHECK(u1 == generate_input({}, 4, 50, seed));
  CHECK(u1 != generate_input({}, 4, 50, SeedSpec{4, "gen"}));
  for (std::uint32_t pe = 0; pe < 4; ++pe) {
    for (std::uint32_t i = 0; i < 50; ++i) {
      CHECK(u1[pe][i].origin_pe == pe);
      CHECK(u1[pe][i].origin_pos == i);
    }
  }
}

TEST_CASE("run examples") {
  ExperimentConfig ams;
  ams.p = 8;
  ams.n_per_pe = 1000;
  ams.seed = 1;
  const auto rec = run_once(ams, 0);
  CHECK(rec.verdict == Verdict::Pass);
  CHECK(rec.n == 8000);
  CHECK(rec.plan == std::vector<int>{8});
  CHECK(rec.modeled_time > 0);

  ExperimentConfig rlm;
  rlm.algorithm = Algorithm::Rlm;
  rlm.p = 4;
  rlm.n_per_pe = 250;
  rlm.input = {Distribution::Sorted};
  const auto r = run_once(rlm, 0);
  CHECK(r.verdict == Verdict::Pass);
  REQUIRE(r.levels.size() == 1);
  CHECK(r.levels[0].min_load == 250);
  CHECK(r.levels[0].max_load == 250);
  CHECK(r.max_load_ratio == 1.0);

  ExperimentConfig bad;
  bad.b = 0;
  CHECK_THROWS_AS(run_experiment(bad), ConfigError);
  ExperimentConfig badk;
  badk.algorithm = Algorithm::Rlm;
  badk.p = 6;
  badk.levels = 2;
  badk.groups = {4, 2};
  CHECK_THROWS_AS(run_experiment(badk), ConfigError);
}

TEST_CASE("verification is skipped above the cap") {
  ExperimentConfig c;
  c.n_per_pe = 100;
  c.verify_cap = 399;
  CHECK(run_once(c, 0).verdict == Verdict::Skipped);
  c.verify_cap = 400;
  CHECK(run_once(c, 0).verdict == Verdict::Pass);
  c.verify = false;
  CHECK(run_once(c, 0).verdict == Verdict::Skipped);
}

TEST_CASE("all distributions and schemes verify") {
  for (auto algo : {Algorithm::Ams, Algorithm::Rlm}) {
    for (const char* d : {"uniform", "sorted", "reverse", "equal", "zipf:1"}) {
      for (auto s : {Scheme::Simple, Scheme::Permuted, Scheme::Deterministic,
                     Scheme::Randomized}) {
        ExperimentConfig c;
        c.algorithm = algo;
        c.p = 8;
        c.levels = 2;
        c.n_per_pe = 60;
        c.scheme = s;
        c.input = parse_distribution(d);
        CAPTURE(d);
        CHECK(run_once(c, 1).verdict == Verdict::Pass);
      }
    }
  }
}

TEST_CASE("parameters and sweeps") {
  ExperimentConfig c;
  apply_param(c, "ab", "64");
  CHECK(c.a == 1.0);
  CHECK(c.b == 64);
  apply_param(c, "a", "4");
  apply_param(c, "ab", "16");
  CHECK(c.b == 4);
  apply_param(c, "groups", "2,2");
  CHECK(c.levels == 2);
  CHECK(c.groups == std::vector<int>{2, 2});
  apply_param(c, "levels", "1");
  CHECK(c.groups.empty());
  CHECK_THROWS_AS(apply_param(c, "colour", "1"), ConfigError);
  CHECK_THROWS_AS(apply_param(c, "b", "x"), ConfigError);
  CHECK_THROWS_AS(parse_axis("b"), ConfigError);
  CHECK_THROWS_AS(parse_axis("b=1,,2"), ConfigError);

  ExperimentConfig base;
  base.p = 4;
  base.n_per_pe = 100;
  base.reps = 2;
  const auto recs = sweep(base, parse_axis("ab=16,64,256"));
  REQUIRE(recs.size() == 6);
  CHECK(recs[0].config.b == 16);
  CHECK(recs[1].rep == 1);
  CHECK(recs[5].config.b == 256);
  CHECK(sweep(base, parse_axis("p=")).empty());
  const auto weak = sweep(base, parse_axis("p=4,16"));
  REQUIRE(weak.size() == 4);
  CHECK(weak[3].n == 1600);
}

TEST_CASE("metrics serialization") {
  ExperimentConfig c;
  c.p = 16;
  c.levels = 2;
  c.n_per_pe = 200;
  const auto line = to_jsonl(run_once(c, 0));
  CHECK(line == to_jsonl(run_once(c, 0)));
  c.exec = Exec::Serial;
  CHECK(line == to_jsonl(run_once(c, 0)));
  CHECK(line.find('\n') == std::string::npos);
  const auto j = nlohmann::json::parse(line);
  CHECK(j["schema"] == 1);
  CHECK(j["verdict"] == "pass");
  CHECK(j["phases"].size() == 4);
  CHECK(j["level_stats"].size() == 2);
  CHECK(j["groups"] == nlohmann::json::array({4, 4}));
  CHECK_FALSE(j.contains("wall_ms"));
  c.timing = true;
  CHECK(nlohmann::json::parse(to_jsonl(run_once(c, 0))).contains("wall_ms"));

  const auto header = csv_header();
  const auto row = to_csv(run_once(c, 0));
  CHECK(std::count(header.begin(), header.end(), ',') ==
        std::count(row.begin(), row.end(), ','));
}
