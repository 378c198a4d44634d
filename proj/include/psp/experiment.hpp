#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psp/estimators.hpp"
#include "psp/model.hpp"
#include "psp/surfaces.hpp"

namespace psp {

struct ProcessSpec {
  /// telegraph, pdsa, telegraph2d
  std::string id = "telegraph";
  double a = 1.0;
  double b = 2.0;
  double beta = 7.0;
  InitialLaw init = InitialLaw::stationary;
  Vec2 start{0.0, 0.0};
  int start_mode = 1;
};

struct SurfaceSpec {
  /// level, segment, square
  std::string type = "level";
  double level = 0.0;
  Vec2 a{0.0, 0.0};
  Vec2 b{0.0, 1.0};
  double c = 2.0;
};

ModelPtr make_model(const ProcessSpec &spec);
Surface make_surface(const SurfaceSpec &spec);

ProcessSpec parse_process(const nlohmann::json &j);
SurfaceSpec parse_surface(const nlohmann::json &j);
nlohmann::json to_json(const ProcessSpec &spec);
nlohmann::json to_json(const SurfaceSpec &spec);

/// Canonical estimator names: monte_carlo, kr_nonstationary, kr_stationary,
/// closed_form, exact_oracle. Short aliases mc, kr_ns, kr_s, cf, oracle are
/// accepted.
std::string canonical_estimator(const std::string &name);

struct ExperimentConfig {
  ProcessSpec process;
  SurfaceSpec surface;
  double horizon = 50.0;
  double step = 0.01;
  std::size_t n_points = 0;
  std::size_t n = 100;
  std::size_t replicates = 1;
  std::vector<std::string> estimators{"monte_carlo", "kr_nonstationary", "kr_stationary"};
  KacRiceOptions kac_rice;
  std::size_t oracle_n_ref = 5000;
  std::uint64_t seed = 1;
  std::string output;

  std::size_t grid_points() const;
};

/// Builds a config from JSON; unknown keys and invalid values throw
/// UsageError naming the field.
ExperimentConfig parse_experiment(const nlohmann::json &j);
nlohmann::json to_json(const ExperimentConfig &cfg);

struct EstimatorOutcome {
  std::string estimator;
  std::optional<double> value;
  std::string status;
};

struct ReplicateResult {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::vector<EstimatorOutcome> outcomes;
  double wall_seconds = 0.0;
};

struct SummaryRow {
  std::string estimator;
  std::size_t n = 0;
  double mean = 0.0, sd = 0.0, min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct ExperimentResult {
  std::vector<ReplicateResult> replicates;
  std::vector<SummaryRow> summary;
};

/// Runs every replicate (in parallel, results kept in replicate order) and
/// summarizes successful values per estimator.
ExperimentResult run_experiment(const ExperimentConfig &cfg);

/// Versioned CSV: value rows, then a `# summary` block. Wall time is left
/// out so the output is a pure function of the config.
void write_experiment_csv(std::ostream &out, const ExperimentResult &result);

std::vector<SummaryRow> summarize(const std::vector<ReplicateResult> &replicates,
                                  const std::vector<std::string> &estimators);

/// The config grid n in {50, 100, 200, 500, 1000} by h in {0.01, 0.1, 1, 2}
/// over a base config.
std::vector<ExperimentConfig> sweep_grid(const ExperimentConfig &base, const std::vector<std::size_t> &ns = {50, 100, 200, 500, 1000},
                                         const std::vector<double> &steps = {0.01, 0.1, 1.0, 2.0});

} // namespace psp
