#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "psp/errors.hpp"
#include "psp/experiment.hpp"
#include "psp/kernels.hpp"
#include "psp/trajectory_io.hpp"

using namespace psp;
using nlohmann::json;

namespace {

ExperimentConfig small_config() {
  return parse_experiment(json::parse(R"({
    "process": {"id": "telegraph", "a": 1, "b": 2},
    "surface": {"type": "level", "level": 0.5},
    "horizon": 10, "step": 0.1, "n": 30, "replicates": 5,
    "estimators": ["mc", "kr_ns", "kr_s"], "seed": 9
  })"));
}

std::string lines_of(const std::string &text, std::size_t &count) {
  std::istringstream in(text);
  std::string line, first;
  count = 0;
  while (std::getline(in, line)) {
    if (count == 0) first = line;
    ++count;
  }
  return first;
}

std::string message_of(const json &j) {
  try {
    parse_experiment(j);
  } catch (const UsageError &e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST(Experiment, ParsesConfigAndAliases) {
  const auto cfg = small_config();
  EXPECT_EQ(cfg.estimators, (std::vector<std::string>{"monte_carlo", "kr_nonstationary", "kr_stationary"}));
  EXPECT_EQ(cfg.grid_points(), 101u);
  EXPECT_EQ(cfg.seed, 9u);
  const auto again = parse_experiment(to_json(cfg));
  EXPECT_EQ(again.estimators, cfg.estimators);
  EXPECT_EQ(again.horizon, cfg.horizon);
  EXPECT_EQ(again.grid_points(), cfg.grid_points());
}

TEST(Experiment, InvalidFieldsAreNamed) {
  EXPECT_NE(message_of({{"horizon", -1.0}}).find("horizon"), std::string::npos);
  EXPECT_NE(message_of({{"n", "many"}}).find("'n'"), std::string::npos);
  EXPECT_NE(message_of({{"bogus", 1}}).find("bogus"), std::string::npos);
  EXPECT_NE(message_of({{"process", {{"rate", 1}}}}).find("process.rate"), std::string::npos);
  EXPECT_NE(message_of({{"surface", {{"a", {1}}}}}).find("surface.a"), std::string::npos);
  EXPECT_NE(message_of({{"estimators", {"magic"}}}).find("estimators"), std::string::npos);
  EXPECT_NE(message_of({{"horizon", 1.0}, {"step", 0.3}}).find("step"), std::string::npos);
}

TEST(Experiment, ProducesOneRowPerReplicateAndEstimator) {
  const auto result = run_experiment(small_config());
  ASSERT_EQ(result.replicates.size(), 5u);
  std::size_t rows = 0;
  for (const auto &r : result.replicates) {
    EXPECT_EQ(r.seed, replicate_seed(9, r.replicate));
    for (const auto &o : r.outcomes) {
      EXPECT_EQ(o.status, "ok");
      EXPECT_TRUE(o.value.has_value());
      ++rows;
    }
  }
  EXPECT_EQ(rows, 15u);
  ASSERT_EQ(result.summary.size(), 3u);
  for (const auto &s : result.summary) {
    EXPECT_EQ(s.n, 5u);
    EXPECT_LE(s.min, s.q1);
    EXPECT_LE(s.q1, s.median);
    EXPECT_LE(s.median, s.q3);
    EXPECT_LE(s.q3, s.max);
  }

  std::ostringstream out;
  write_experiment_csv(out, result);
  std::size_t count = 0;
  EXPECT_EQ(lines_of(out.str(), count), "# pspx experiment v1");
  // Version line, header, 15 rows, summary marker, summary header, 3 rows.
  EXPECT_EQ(count, 22u);
  EXPECT_NE(out.str().find("replicate,seed,estimator,value,status\n"), std::string::npos);
  EXPECT_NE(out.str().find("# summary\nestimator,n,mean,sd,min,q1,median,q3,max\n"), std::string::npos);
}

TEST(Experiment, OutputIsDeterministic) {
  std::ostringstream a, b;
  write_experiment_csv(a, run_experiment(small_config()));
  write_experiment_csv(b, run_experiment(small_config()));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Experiment, EstimatorFailuresAreRecorded) {
  auto cfg = small_config();
  cfg.process.id = "telegraph2d";
  cfg.surface.type = "square";
  cfg.replicates = 2;
  cfg.estimators = {"monte_carlo", "closed_form"};
  const auto result = run_experiment(cfg);
  for (const auto &r : result.replicates) {
    EXPECT_EQ(r.outcomes[0].status, "ok");
    EXPECT_FALSE(r.outcomes[1].value.has_value());
    EXPECT_EQ(r.outcomes[1].status.rfind("error", 0), 0u);
  }
  std::ostringstream out;
  write_experiment_csv(out, result);
  EXPECT_NE(out.str().find(",closed_form,NA,"), std::string::npos);
}

TEST(Experiment, SweepCoversTheGrid) {
  const auto sweep = sweep_grid(small_config());
  ASSERT_EQ(sweep.size(), 20u);
  EXPECT_EQ(sweep.front().n, 50u);
  EXPECT_EQ(sweep.front().step, 0.01);
  EXPECT_EQ(sweep.back().n, 1000u);
  EXPECT_EQ(sweep.back().step, 2.0);
}

TEST(TrajectoryIo, GridRoundTrip) {
  const auto model = make_telegraph2d(1.0, 2.0);
  const auto paths = kernels::simulate_batch_parallel(model, 5.0, 2, 0, 3);
  const auto data = kernels::sample_batch_parallel(paths, 26);
  std::stringstream buf;
  write_grid_csv(buf, data[0], model->mode_names);
  const auto back = read_grid_csv(buf, model->mode_names);
  EXPECT_EQ(back.dim, 2);
  EXPECT_EQ(back.horizon, data[0].horizon);
  EXPECT_EQ(back.samples, data[0].samples);
  EXPECT_EQ(back.modes, data[0].modes);
  EXPECT_EQ(back.velocities, data[0].velocities);

  const auto dir = std::filesystem::temp_directory_path() / "psp_io_roundtrip";
  std::filesystem::remove_all(dir);
  write_dataset(dir, data, model->mode_names);
  const auto all = read_dataset(dir, model->mode_names);
  ASSERT_EQ(all.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(all[i].samples, data[i].samples);
  std::filesystem::remove_all(dir);
}

TEST(TrajectoryIo, RejectsIrregularGrid) {
  std::istringstream in("t,x1\n0,1\n1,2\n3,4\n");
  EXPECT_THROW(read_grid_csv(in), DataError);
  std::istringstream late("t,x1\n1,1\n2,2\n");
  EXPECT_THROW(read_grid_csv(late), DataError);
}
