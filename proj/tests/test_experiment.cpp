#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nodefeat/error.hpp"
#include "nodefeat/experiment.hpp"
#include "nodefeat/log.hpp"
#include "support.hpp"

using namespace nodefeat;
using namespace nodefeat::testing;

namespace {

ErrorKind parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a config error");
  return ErrorKind::InvalidArgument;
}

ExperimentConfig quick_config() {
  ExperimentConfig c;
  c.num_realizations = 3;
  c.seed = 10;
  c.gae.encoder_widths = {16, 4};
  c.gae.decoder_hidden = {16};
  c.gae.epochs = 20;
  c.gin.hidden = 16;
  c.gin.epochs = 15;
  return c;
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("empty text gives defaults") {
    const ExperimentConfig c = parse_config("");
    const ExperimentConfig d;
    CHECK(c.dataset == d.dataset);
    CHECK(c.num_realizations == 15);
    CHECK(c.qbar == std::vector<std::size_t>{1, 3});
    CHECK(c.nbar == d.nbar);
    CHECK(c.gae.encoder_widths == d.gae.encoder_widths);
    CHECK(c.gin.epochs == d.gin.epochs);
  }
  SUBCASE("values and comments") {
    const ExperimentConfig c = parse_config(
        "# comment\n"
        "dataset = AIDS   # trailing\n"
        "qbar = 1,3\n"
        "split = 0.2, 0.2, 0.3, 0.3\n"
        "gae_encoder = 32,8\n"
        "gae_decoder =\n"
        "methods = zeros, lse-nn-q1\n"
        "plot = true\n");
    CHECK(c.dataset == "AIDS");
    CHECK(c.qbar == std::vector<std::size_t>{1, 3});
    CHECK(c.ratios.val == 0.2);
    CHECK(c.gae.encoder_widths == std::vector<std::size_t>{32, 8});
    CHECK(c.gae.decoder_hidden.empty());
    CHECK(c.methods == std::vector<std::string>{"zeros", "lse-nn-q1"});
    CHECK(c.plot);
  }
  SUBCASE("errors") {
    CHECK(parse_error("qbar = 0\n") == ErrorKind::InvalidValue);
    CHECK(parse_error("colour = blue\n") == ErrorKind::UnknownKey);
    CHECK(parse_error("seed = -1\n") == ErrorKind::InvalidValue);
    CHECK(parse_error("split = 0.5,0.5,0.5,0.5\n") == ErrorKind::InvalidValue);
    CHECK(parse_error("realizations = 0\n") == ErrorKind::InvalidValue);
    CHECK(parse_error("gae_lr = fast\n") == ErrorKind::InvalidValue);
    CHECK(parse_error("no equals sign\n") == ErrorKind::InvalidValue);
    try {
      load_config("/nonexistent/config.txt");
      FAIL("expected UnreadableFile");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnreadableFile);
    }
  }
}

TEST_CASE("method ids") {
  const std::vector<std::size_t> q{1, 3};
  CHECK(recovery_method_ids(q) == std::vector<std::string>{"zeros", "ones", "random", "degree", "lse-ng-q1",
                                                           "lse-ng-q3", "lse-nn-q1", "lse-nn-q3"});
  const auto cls = classification_method_ids(q);
  CHECK(cls.size() == 10);
  CHECK(cls.front() == "true-features");
}

TEST_CASE("recovery experiment on a synthetic dataset") {
  log::set_level(log::Level::Quiet);
  const Dataset d = synthetic_dataset(60, 12);
  const ExperimentConfig c = quick_config();
  const RecoveryOutcome out = run_recovery_experiment(d, c);
  const ResultsTable& t = out.table;

  CHECK(t.seeds == std::vector<std::uint64_t>{10, 11, 12});
  CHECK(t.rows.size() == recovery_method_ids(c.qbar).size());
  for (const auto& row : t.rows) {
    CHECK(row.values.size() == 3);
    CHECK(std::isfinite(row.mean));
    CHECK(std::isfinite(row.std));
  }
  CHECK(t.row("zeros").mean == 1.0);
  CHECK(t.row("zeros").std == 0.0);
  CHECK(t.row("ones").mean == doctest::Approx(2.0).epsilon(1e-15));
  // Uniform[0,1] guesses against one-hot rows, per-row expectation (F/3)^(1/2) roughly.
  CHECK(t.row("random").mean == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(0.05));
  CHECK(t.row("lse-nn-q1").mean < t.row("ones").mean);

  SUBCASE("deterministic and independent of the job count") {
    ExperimentConfig parallel = c;
    parallel.jobs = 3;
    const ResultsTable again = run_recovery_experiment(d, parallel).table;
    REQUIRE(again.rows.size() == t.rows.size());
    for (std::size_t k = 0; k < t.rows.size(); ++k) CHECK(again.rows[k].values == t.rows[k].values);
  }
  SUBCASE("method subset") {
    ExperimentConfig some = c;
    some.methods = {"lse-nn-q1", "zeros"};
    const ResultsTable sub = run_recovery_experiment(d, some).table;
    REQUIRE(sub.rows.size() == 2);
    CHECK(sub.rows[0].method == "zeros");
    CHECK(sub.rows[1].values == t.row("lse-nn-q1").values);
    some.methods = {"magic"};
    CHECK_THROWS_AS(run_recovery_experiment(d, some), Error);
  }
  SUBCASE("outputs") {
    TempDir dir("outputs");
    emit_outputs(t, out.first.embeddings, d, dir.path(), true);
    CHECK(count_lines(dir.path() / "results.csv") == 1 + t.rows.size());
    CHECK(count_lines(dir.path() / "realizations.csv") == 4);
    CHECK(count_lines(dir.path() / "embeddings_2d.csv") == 1 + d.total_nodes());
    CHECK(std::filesystem::exists(dir.path() / "embeddings_2d.svg"));
    const std::string header = slurp(dir.path() / "results.csv").substr(0, 28);
    CHECK(header == "method,dataset,mean,std,r1,r");
  }
  log::set_level(log::Level::Warn);
}

TEST_CASE("classification experiment on a synthetic dataset") {
  log::set_level(log::Level::Quiet);
  const Dataset d = synthetic_dataset(40, 2);
  ExperimentConfig c = quick_config();
  c.num_realizations = 2;
  c.qbar = {1};
  c.methods = {"true-features", "zeros", "not-using-tmiss", "lse-nn-q1"};
  const ClassificationOutcome out = run_classification_experiment(d, c);
  CHECK(out.table.rows.size() == 4);
  CHECK(out.runs.size() == 8);
  for (const auto& row : out.table.rows) {
    for (double v : row.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 100.0);
    }
  }
  // The node codes alone give the class away.
  CHECK(out.table.row("true-features").mean > 80.0);

  TempDir dir("runs");
  write_run_records(out.runs, dir.path() / "runs.csv");
  CHECK(count_lines(dir.path() / "runs.csv") == 9);
  log::set_level(log::Level::Warn);
}

TEST_CASE("dataset lookup") {
  const Dataset d = synthetic_dataset(10, 1, "FIX");
  TempDir dir("lookup");
  write_tudataset(d, dir.path() / "FIX");
  ExperimentConfig c;
  c.dataset = "FIX";
  c.data_dir = dir.path();
  CHECK(load_dataset(c) == d);
  c.data_dir = dir.path() / "FIX";
  CHECK(load_dataset(c) == d);
  c.dataset = "MISSING";
  CHECK_THROWS_AS(load_dataset(c), Error);
}
