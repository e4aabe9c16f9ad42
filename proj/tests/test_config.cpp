#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "mfschrod/config.hpp"
#include "mfschrod/csv.hpp"
#include "mfschrod/errors.hpp"
#include "mfschrod/experiments.hpp"

using namespace mfs;

TEST_SUITE_BEGIN("cliio");

TEST_CASE("config round trip: parse, serialize, reparse") {
  const std::string text =
      "[problem]\n"
      "id = test2a\n"
      "eps = 0.03125\n"
      "# a comment\n"
      "[uq]\n"
      "M = 50\n"
      "tol = 1e-10\n";
  const ResolvedConfig a = parse_config(text);
  const ResolvedConfig b = parse_config(a.serialize());
  CHECK(a == b);
  CHECK(a.get("problem.id") == "test2a");
  CHECK(a.get_real("problem.eps") == doctest::Approx(0.03125));
  CHECK(a.get_int("uq.M") == 50);
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  CHECK_THROWS_WITH_AS(parse_config("[uq]\nK_max = 10\n"),
                       doctest::Contains("uq.k_max"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("problem.epz = 0.5\n"),
                       doctest::Contains("problem.eps"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[uq]\nM = ten\n"),
                       doctest::Contains("integer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[uq]\nM = 5\nM = 6\n"),
                       doctest::Contains("duplicate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("uq.M: 5\n"),
                       doctest::Contains("key = value"), ConfigError);
}

TEST_CASE("line numbers anchor the error messages") {
  CHECK_THROWS_WITH_AS(parse_config("[uq]\nM = 5\nbogus_key = 1\n"),
                       doctest::Contains("line 3"), ConfigError);
}

TEST_CASE("overrides apply with the same validation") {
  ResolvedConfig cfg = parse_config("[problem]\nid = test1\neps = 0.25\n");
  apply_override(cfg, "uq.M=77");
  CHECK(cfg.get_int("uq.M") == 77);
  CHECK_THROWS_AS(apply_override(cfg, "uq.M"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "uq.K_max=3"), ConfigError);
}

TEST_CASE("config hash is stable and value-sensitive") {
  const ResolvedConfig a = parse_config("[uq]\nM = 5\n");
  const ResolvedConfig b = parse_config("uq.M = 5\n");
  const ResolvedConfig c = parse_config("[uq]\nM = 6\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("CFL-incompatible explicit dt is rejected with the bound") {
  const std::string text =
      "[problem]\n"
      "id = test1\n"
      "eps = 0.25\n"
      "d1 = 1\n"
      "t_final = 0.1\n"
      "[fidelity.low]\n"
      "kind = ls\n"
      "nx = 100\n"
      "np = 8\n"
      "dt = 0.05\n";  // far above dx/(2 max|p|) = 0.02/4
  CHECK_THROWS_WITH_AS(make_setup(parse_config(text)),
                       doctest::Contains("CFL bound"), ConfigError);
}

TEST_CASE("csv: empty table, round trip, shortest decimals") {
  const std::string path = "csv_test_tmp.csv";
  Table empty;
  empty.names = {"a", "b"};
  empty.cols.resize(2);
  emit_csv(empty, path);
  {
    const Table back = read_csv(path);
    CHECK(back.names == empty.names);
    CHECK(back.cols[0].empty());
  }

  Table t;
  t.names = {"x", "y"};
  t.cols = {{1.0, 0.1, 1e-300, -3.5e10},
            {2.0, 0.30000000000000004, 5.17e-4, 0.0}};
  emit_csv(t, path);
  const Table back = read_csv(path);
  for (int c = 0; c < 2; ++c)
    for (size_t r = 0; r < t.cols[c].size(); ++r)
      CHECK(back.cols[c][r] == t.cols[c][r]);
  std::remove(path.c_str());

  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("shipped sample configs parse and resolve") {
  for (const char* name :
       {"test1_case1.cfg", "test1_case2.cfg", "test1_trifidelity.cfg",
        "test2a_longtime.cfg"}) {
    const std::string path = std::string(MFS_SOURCE_DIR) + "/configs/" + name;
    INFO(path);
    const ExperimentSetup setup = make_setup(parse_config_file(path));
    CHECK(setup.m_train >= 1);
    CHECK(setup.high.nx >= 4);
  }
}

TEST_SUITE_END();
