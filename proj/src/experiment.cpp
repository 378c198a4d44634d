#include "psp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "psp/errors.hpp"
#include "psp/kernels.hpp"
#include "psp/stats.hpp"

namespace psp {

using nlohmann::json;

namespace {

template <class T> T field(const json &j, const char *key, const std::string &where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw UsageError("config field '" + where + key + "' has the wrong type");
  }
}

Vec2 point_field(const json &j, const char *key, const std::string &where, Vec2 fallback) {
  if (!j.contains(key)) return fallback;
  const auto &v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw UsageError("config field '" + where + key + "' must be a pair of numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

void reject_unknown(const json &j, const std::set<std::string> &known, const std::string &where) {
  if (!j.is_object()) throw UsageError("config field '" + where + "' must be an object");
  for (const auto &item : j.items()) {
    if (!known.count(item.key())) throw UsageError("unknown config field '" + where + item.key() + "'");
  }
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (auto &c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

} // namespace

ModelPtr make_model(const ProcessSpec &spec) {
  if (spec.id == "telegraph") {
    return make_telegraph1d(spec.a, spec.b, spec.init, Mark{spec.start, spec.start_mode});
  }
  if (spec.id == "pdsa") {
    return make_pdsa(spec.beta, pdsa_default_potential, pdsa_default_potential_derivative, spec.init,
                     Mark{spec.start, spec.start_mode});
  }
  if (spec.id == "telegraph2d") return make_telegraph2d(spec.a, spec.b);
  throw UsageError("unknown process '" + spec.id + "' (expected telegraph, pdsa or telegraph2d)");
}

Surface make_surface(const SurfaceSpec &spec) {
  if (spec.type == "level") return Level{spec.level};
  if (spec.type == "segment") return Segment(spec.a, spec.b);
  if (spec.type == "square") {
    if (!(spec.c > 0.0)) throw UsageError("square half-width c must be positive");
    return make_square(spec.c);
  }
  throw UsageError("unknown surface type '" + spec.type + "' (expected level, segment or square)");
}

ProcessSpec parse_process(const json &j) {
  reject_unknown(j, {"id", "a", "b", "beta", "init", "start", "start_mode"}, "process.");
  ProcessSpec p;
  p.id = field<std::string>(j, "id", "process.", p.id);
  p.a = field<double>(j, "a", "process.", p.a);
  p.b = field<double>(j, "b", "process.", p.b);
  p.beta = field<double>(j, "beta", "process.", p.beta);
  const auto init = field<std::string>(j, "init", "process.", "stationary");
  if (init == "stationary") {
    p.init = InitialLaw::stationary;
  } else if (init == "fixed") {
    p.init = InitialLaw::fixed;
  } else {
    throw UsageError("config field 'process.init' must be stationary or fixed");
  }
  if (j.contains("start") && j.at("start").is_number()) {
    p.start = {j.at("start").get<double>(), 0.0};
  } else {
    p.start = point_field(j, "start", "process.", p.start);
  }
  p.start_mode = field<int>(j, "start_mode", "process.", p.start_mode);
  return p;
}

SurfaceSpec parse_surface(const json &j) {
  reject_unknown(j, {"type", "level", "a", "b", "c"}, "surface.");
  SurfaceSpec s;
  s.type = field<std::string>(j, "type", "surface.", s.type);
  s.level = field<double>(j, "level", "surface.", s.level);
  s.a = point_field(j, "a", "surface.", s.a);
  s.b = point_field(j, "b", "surface.", s.b);
  s.c = field<double>(j, "c", "surface.", s.c);
  return s;
}

json to_json(const ProcessSpec &p) {
  return {{"id", p.id},
          {"a", p.a},
          {"b", p.b},
          {"beta", p.beta},
          {"init", p.init == InitialLaw::stationary ? "stationary" : "fixed"},
          {"start", {p.start.x, p.start.y}},
          {"start_mode", p.start_mode}};
}

json to_json(const SurfaceSpec &s) {
  return {{"type", s.type}, {"level", s.level}, {"a", {s.a.x, s.a.y}}, {"b", {s.b.x, s.b.y}}, {"c", s.c}};
}

std::string canonical_estimator(const std::string &name) {
  static const std::map<std::string, std::string> names{
      {"mc", "monte_carlo"},           {"monte_carlo", "monte_carlo"},
      {"kr_ns", "kr_nonstationary"},   {"kr_nonstationary", "kr_nonstationary"},
      {"kr_s", "kr_stationary"},       {"kr_stationary", "kr_stationary"},
      {"cf", "closed_form"},           {"closed_form", "closed_form"},
      {"oracle", "exact_oracle"},      {"exact_oracle", "exact_oracle"},
  };
  const auto it = names.find(name);
  if (it == names.end()) throw UsageError("unknown estimator '" + name + "'");
  return it->second;
}

std::size_t ExperimentConfig::grid_points() const {
  const auto from_step = grid_points_for_step(horizon, step);
  if (n_points != 0 && n_points != from_step) {
    throw UsageError("config fields 'step' and 'n_points' disagree: h*(n_H-1) != H");
  }
  return from_step;
}

ExperimentConfig parse_experiment(const json &j) {
  reject_unknown(j,
                 {"process", "surface", "horizon", "step", "n_points", "n", "replicates", "estimators", "bandwidth",
                  "time_rule", "quadrature_step", "oracle_n_ref", "seed", "output"},
                 "");
  ExperimentConfig c;
  if (j.contains("process")) c.process = parse_process(j.at("process"));
  if (j.contains("surface")) c.surface = parse_surface(j.at("surface"));
  c.horizon = field<double>(j, "horizon", "", c.horizon);
  c.n_points = field<std::size_t>(j, "n_points", "", 0);
  if (j.contains("step")) {
    c.step = field<double>(j, "step", "", c.step);
  } else if (c.n_points >= 2) {
    c.step = c.horizon / static_cast<double>(c.n_points - 1);
  }
  c.n = field<std::size_t>(j, "n", "", c.n);
  c.replicates = field<std::size_t>(j, "replicates", "", c.replicates);
  if (j.contains("estimators")) {
    const auto names = field<std::vector<std::string>>(j, "estimators", "", {});
    c.estimators.clear();
    for (const auto &e : names) {
      try {
        c.estimators.push_back(canonical_estimator(e));
      } catch (const UsageError &err) {
        throw UsageError(std::string("config field 'estimators': ") + err.what());
      }
    }
  }
  c.kac_rice.bandwidth = parse_bandwidth_method(field<std::string>(j, "bandwidth", "", "automatic"));
  c.kac_rice.time_rule = parse_time_rule(field<std::string>(j, "time_rule", "", "rectangle"));
  c.kac_rice.quad_step = field<double>(j, "quadrature_step", "", c.kac_rice.quad_step);
  c.oracle_n_ref = field<std::size_t>(j, "oracle_n_ref", "", c.oracle_n_ref);
  c.seed = field<std::uint64_t>(j, "seed", "", c.seed);
  c.output = field<std::string>(j, "output", "", c.output);

  if (!(c.horizon > 0.0)) throw UsageError("config field 'horizon' must be positive");
  if (!(c.step > 0.0)) throw UsageError("config field 'step' must be positive");
  if (c.n == 0) throw UsageError("config field 'n' must be at least 1");
  if (c.replicates == 0) throw UsageError("config field 'replicates' must be at least 1");
  if (c.estimators.empty()) throw UsageError("config field 'estimators' is empty");
  if (!(c.kac_rice.quad_step > 0.0)) throw UsageError("config field 'quadrature_step' must be positive");
  try {
    c.grid_points();
  } catch (const UsageError &e) {
    throw UsageError(std::string("config field 'step': ") + e.what());
  }
  make_model(c.process);
  make_surface(c.surface);
  return c;
}

json to_json(const ExperimentConfig &c) {
  return {{"process", to_json(c.process)},
          {"surface", to_json(c.surface)},
          {"horizon", c.horizon},
          {"step", c.step},
          {"n", c.n},
          {"replicates", c.replicates},
          {"estimators", c.estimators},
          {"bandwidth", to_string(c.kac_rice.bandwidth)},
          {"time_rule", c.kac_rice.time_rule == TimeRule::rectangle ? "rectangle" : "trapezoid"},
          {"quadrature_step", c.kac_rice.quad_step},
          {"oracle_n_ref", c.oracle_n_ref},
          {"seed", c.seed},
          {"output", c.output}};
}

namespace {

ReplicateResult run_replicate(const ExperimentConfig &cfg, const ModelPtr &model, const Surface &surface,
                              std::size_t r) {
  const auto t0 = std::chrono::steady_clock::now();
  ReplicateResult res;
  res.replicate = r;
  res.seed = replicate_seed(cfg.seed, r);

  std::optional<Dataset> dataset;
  std::string data_error;
  const bool needs_data = std::any_of(cfg.estimators.begin(), cfg.estimators.end(), [](const std::string &e) {
    return e == "monte_carlo" || e == "kr_nonstationary" || e == "kr_stationary";
  });
  if (needs_data) {
    try {
      const auto paths = kernels::simulate_batch_parallel(model, cfg.horizon, res.seed, 0, cfg.n);
      dataset = kernels::sample_batch_parallel(paths, cfg.grid_points());
    } catch (const std::exception &e) {
      data_error = e.what();
    }
  }
  std::optional<SpeedProjection> sp;
  const auto projection = [&]() -> const SpeedProjection & {
    if (!sp) sp = SpeedProjection::from_mode_occupancy(model, *dataset, cfg.kac_rice.bandwidth);
    return *sp;
  };

  for (const auto &name : cfg.estimators) {
    EstimatorOutcome out;
    out.estimator = name;
    try {
      const bool data_based = name == "monte_carlo" || name == "kr_nonstationary" || name == "kr_stationary";
      if (data_based && !dataset) throw NumericError("simulation failed: " + data_error);
      if (name == "monte_carlo") {
        out.value = monte_carlo(*dataset, surface).value;
      } else if (name == "kr_nonstationary") {
        out.value = kr_nonstationary(*dataset, surface, projection(), cfg.kac_rice).value;
      } else if (name == "kr_stationary") {
        out.value = kr_stationary(*dataset, surface, projection(), cfg.kac_rice).mean.value;
      } else if (name == "closed_form") {
        out.value = closed_form(*model, surface, cfg.horizon, cfg.kac_rice.quad_step).value;
      } else if (name == "exact_oracle") {
        out.value = exact_oracle(model, surface, cfg.horizon, cfg.oracle_n_ref, res.seed).value;
      } else {
        throw UsageError("unknown estimator '" + name + "'");
      }
      out.status = "ok";
    } catch (const std::exception &e) {
      out.status = std::string("error: ") + e.what();
    }
    res.outcomes.push_back(std::move(out));
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig &cfg) {
  const auto model = make_model(cfg.process);
  const auto surface = make_surface(cfg.surface);
  if (surface_dim(surface) != model->dim) throw UsageError("surface dimension does not match the process");
  ExperimentResult result;
  result.replicates.resize(cfg.replicates);
  kernels::parallel_for_rethrow(cfg.replicates,
                                [&](std::size_t r) { result.replicates[r] = run_replicate(cfg, model, surface, r); });
  result.summary = summarize(result.replicates, cfg.estimators);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<ReplicateResult> &replicates,
                                  const std::vector<std::string> &estimators) {
  std::vector<SummaryRow> rows;
  for (const auto &name : estimators) {
    std::vector<double> values;
    for (const auto &r : replicates) {
      for (const auto &o : r.outcomes) {
        if (o.estimator == name && o.value) values.push_back(*o.value);
      }
    }
    SummaryRow row;
    row.estimator = name;
    row.n = values.size();
    if (!values.empty()) {
      std::sort(values.begin(), values.end());
      row.mean = stats::mean(values);
      row.sd = values.size() > 1 ? stats::sd(values) : 0.0;
      row.min = values.front();
      row.q1 = stats::quantile_sorted(values, 0.25);
      row.median = stats::quantile_sorted(values, 0.5);
      row.q3 = stats::quantile_sorted(values, 0.75);
      row.max = values.back();
    }
    rows.push_back(row);
  }
  return rows;
}

void write_experiment_csv(std::ostream &out, const ExperimentResult &result) {
  out << "# pspx experiment v1\n";
  out << "replicate,seed,estimator,value,status\n";
  for (const auto &r : result.replicates) {
    for (const auto &o : r.outcomes) {
      out << r.replicate << ',' << r.seed << ',' << o.estimator << ',' << (o.value ? format_value(*o.value) : "NA")
          << ',' << sanitize(o.status) << '\n';
    }
  }
  out << "# summary\n";
  out << "estimator,n,mean,sd,min,q1,median,q3,max\n";
  for (const auto &s : result.summary) {
    out << s.estimator << ',' << s.n;
    if (s.n == 0) {
      out << ",NA,NA,NA,NA,NA,NA,NA\n";
      continue;
    }
    for (double v : {s.mean, s.sd, s.min, s.q1, s.median, s.q3, s.max}) out << ',' << format_value(v);
    out << '\n';
  }
}

std::vector<ExperimentConfig> sweep_grid(const ExperimentConfig &base, const std::vector<std::size_t> &ns,
                                         const std::vector<double> &steps) {
  std::vector<ExperimentConfig> out;
  for (double h : steps) {
    for (std::size_t n : ns) {
      ExperimentConfig c = base;
      c.n = n;
      c.step = h;
      c.n_points = 0;
      c.grid_points();
      out.push_back(std::move(c));
    }
  }
  return out;
}

} // namespace psp
