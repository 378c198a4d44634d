// pspx: simulate piecewise smooth processes, estimate their mean crossing
// counts, run replicate experiments and process GPS tracks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "psp/crossing.hpp"
#include "psp/errors.hpp"
#include "psp/estimators.hpp"
#include "psp/experiment.hpp"
#include "psp/gps.hpp"
#include "psp/kernels.hpp"
#include "psp/trajectory_io.hpp"

using namespace psp;
using nlohmann::json;

namespace {

struct ProcessFlags {
  std::string id = "telegraph";
  double a = 1.0, b = 2.0, beta = 7.0;
  std::string init = "stationary";

  void add(CLI::App &app) {
    app.add_option("--process", id, "Process: telegraph, pdsa or telegraph2d")->capture_default_str();
    app.add_option("--a", a, "Telegraph rate a")->capture_default_str();
    app.add_option("--b", b, "Telegraph rate b")->capture_default_str();
    app.add_option("--beta", beta, "PDSA inverse temperature")->capture_default_str();
    app.add_option("--init", init, "Initial law: stationary or fixed (x=0, mode +1)")->capture_default_str();
  }
  ProcessSpec spec() const {
    return parse_process(json{{"id", id}, {"a", a}, {"b", b}, {"beta", beta}, {"init", init}});
  }
};

struct SurfaceFlags {
  std::optional<double> level;
  std::optional<double> square;
  std::vector<double> segment;

  void add(CLI::App &app) {
    auto *l = app.add_option("--level", level, "Crossing level (1D)");
    auto *s = app.add_option("--square", square, "Square of half-width c (2D)");
    auto *g = app.add_option("--segment", segment, "Segment ax ay bx by (2D)")->expected(4)->delimiter(',');
    l->excludes(s)->excludes(g);
    s->excludes(g);
  }
  SurfaceSpec spec() const {
    SurfaceSpec s;
    if (square) {
      s.type = "square";
      s.c = *square;
    } else if (!segment.empty()) {
      s.type = "segment";
      s.a = {segment[0], segment[1]};
      s.b = {segment[2], segment[3]};
    } else {
      s.type = "level";
      s.level = level.value_or(0.0);
    }
    return s;
  }
};

nlohmann::ordered_json estimate_json(const CrossingEstimate &e) {
  nlohmann::ordered_json meta{{"n", e.meta.n},       {"n_h", e.meta.n_h},   {"h", e.meta.h},
            {"delta", e.meta.delta}, {"bandwidth", e.meta.bandwidth}, {"seed", e.meta.seed}};
  meta["se"] = e.meta.se ? nlohmann::ordered_json(*e.meta.se) : nlohmann::ordered_json(nullptr);
  if (!e.meta.note.empty()) meta["note"] = e.meta.note;
  return {{"value", e.value}, {"method", e.method}, {"meta", meta}};
}

std::ostream &open_output(const std::string &path, std::ofstream &file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw DataError("cannot write " + path);
  return file;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Crossing-count estimation for piecewise smooth processes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pspx 1.0");

  // simulate
  auto *sim = app.add_subcommand("simulate", "Simulate trajectories and write a grid dataset directory");
  ProcessFlags sim_proc;
  sim_proc.add(*sim);
  double sim_h = 50.0, sim_step = 0.01;
  std::size_t sim_n = 10;
  std::uint64_t sim_seed = 1;
  std::string sim_out, sim_events;
  sim->add_option("--H", sim_h, "Horizon")->capture_default_str();
  sim->add_option("--step", sim_step, "Grid step h; must divide H")->capture_default_str();
  sim->add_option("--n", sim_n, "Number of trajectories")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_option("--events", sim_events, "Also write the exact event list of trajectory 0 to this CSV");

  // estimate
  auto *est = app.add_subcommand("estimate", "Estimate the mean crossing count; prints JSON");
  ProcessFlags est_proc;
  est_proc.add(*est);
  SurfaceFlags est_surf;
  est_surf.add(*est);
  std::string est_method = "kr_nonstationary", est_data, est_bw = "automatic", est_rule = "rectangle";
  double est_quad = 0.1, est_h = 0.0;
  est->add_option("--method", est_method, "monte_carlo|mc, kr_nonstationary|kr_ns, kr_stationary|kr_s, closed_form|cf")
      ->capture_default_str();
  est->add_option("--data", est_data, "Dataset directory (not needed for closed_form)");
  est->add_option("--bandwidth", est_bw, "automatic, normal_reference or silverman_1d")->capture_default_str();
  est->add_option("--quadrature", est_rule, "Time rule: rectangle or trapezoid")->capture_default_str();
  est->add_option("--quad-step", est_quad, "Surface quadrature step")->capture_default_str();
  est->add_option("--H", est_h, "Horizon for closed_form");

  // experiment
  auto *exp = app.add_subcommand("experiment", "Run estimator replicates from a JSON config; flags override it");
  std::string exp_config, exp_out;
  std::optional<std::size_t> exp_n, exp_reps;
  std::optional<double> exp_step, exp_h;
  std::optional<std::uint64_t> exp_seed;
  std::vector<std::string> exp_estimators;
  bool exp_print_sweep = false;
  exp->add_option("--config", exp_config, "JSON config file");
  exp->add_option("--out", exp_out, "Output CSV (default stdout)");
  exp->add_option("--n", exp_n, "Trajectories per replicate");
  exp->add_option("--replicates", exp_reps, "Replicates");
  exp->add_option("--step", exp_step, "Grid step h");
  exp->add_option("--H", exp_h, "Horizon");
  exp->add_option("--seed", exp_seed, "Base seed");
  exp->add_option("--estimators", exp_estimators, "Estimator list")->delimiter(',');
  exp->add_flag("--print-sweep", exp_print_sweep,
                "Print the n x h grid of configs derived from this one as JSON lines instead of running");

  // oracle
  auto *orc = app.add_subcommand("oracle", "Mean exact crossing count over fresh simulations; prints JSON");
  ProcessFlags orc_proc;
  orc_proc.add(*orc);
  SurfaceFlags orc_surf;
  orc_surf.add(*orc);
  double orc_h = 100.0;
  std::size_t orc_nref = 5000;
  std::uint64_t orc_seed = 1;
  orc->add_option("--H", orc_h, "Horizon")->capture_default_str();
  orc->add_option("--n-ref", orc_nref, "Number of reference trajectories")->capture_default_str();
  orc->add_option("--seed", orc_seed, "Seed")->capture_default_str();

  // gps
  auto *gps_cmd = app.add_subcommand("gps", "GPS track pipeline");
  gps_cmd->require_subcommand(1);
  gps::ColumnMap columns;
  gps::RegridOptions regrid;
  std::string heading_conv = "compass";
  auto add_velocity = [&](CLI::App *c) {
    c->add_option("--ref-lat", regrid.velocity.ref_lat, "Reference latitude of the degree conversion")
        ->capture_default_str();
    c->add_option("--heading-convention", heading_conv, "compass or literal")->capture_default_str();
  };

  auto *ingest = gps_cmd->add_subcommand("ingest", "Read a GPS CSV and write regridded days as a dataset");
  std::string ingest_in, ingest_out;
  ingest->add_option("--in", ingest_in, "GPS CSV")->required();
  ingest->add_option("--out", ingest_out, "Output dataset directory")->required();
  ingest->add_option("--col-timestamp", columns.timestamp)->capture_default_str();
  ingest->add_option("--col-lat", columns.lat)->capture_default_str();
  ingest->add_option("--col-lon", columns.lon)->capture_default_str();
  ingest->add_option("--col-speed", columns.ground_speed)->capture_default_str();
  ingest->add_option("--col-heading", columns.heading)->capture_default_str();
  ingest->add_option("--col-id", columns.id, "Animal id column (empty: single track)")->capture_default_str();
  ingest->add_option("--min-count", regrid.min_count, "Fewest records for a retained day")->capture_default_str();
  ingest->add_option("--max-count", regrid.max_count, "Most records for a retained day")->capture_default_str();
  ingest->add_option("--n-points", regrid.n_points, "Daily grid points")->capture_default_str();
  add_velocity(ingest);

  gps::ProjectionOptions proj;
  auto add_projection = [&](CLI::App *c) {
    c->add_option("--eps", proj.eps, "Exploration radius (degrees)")->capture_default_str();
    c->add_option("--dx-proj", proj.dx, "Walk step along the segment (fraction)")->capture_default_str();
    c->add_option("--span", proj.smoothing.span, "LOWESS span")->capture_default_str();
    c->add_option("--iterations", proj.smoothing.iterations, "LOWESS robustness iterations")->capture_default_str();
  };
  auto *project = gps_cmd->add_subcommand("project", "Speed projection profile along one segment (CSV)");
  std::string project_data;
  std::vector<double> project_seg;
  project->add_option("--data", project_data, "Dataset directory from gps ingest")->required();
  project->add_option("--segment", project_seg, "ax ay bx by")->expected(4)->delimiter(',')->required();
  add_projection(project);

  auto *curve = gps_cmd->add_subcommand("curve", "Crossings versus distance for a segment family (CSV)");
  std::string curve_data, curve_dir = "sea", curve_method = "kr", curve_bw = "automatic", curve_out;
  gps::FamilyOptions family;
  gps::CurveOptions curve_opts;
  curve->add_option("--data", curve_data, "Dataset directory from gps ingest")->required();
  curve->add_option("--direction", curve_dir, "sea or inland")->capture_default_str();
  curve->add_option("--method", curve_method, "kr or mc")->capture_default_str();
  curve->add_option("--bandwidth", curve_bw, "KDE bandwidth method")->capture_default_str();
  curve->add_option("--quad-step", curve_opts.kac_rice.quad_step, "Segment quadrature step (degrees)")
      ->capture_default_str();
  curve->add_option("--family-dx", family.dx, "Distance between consecutive segments (degrees)")
      ->capture_default_str();
  curve->add_option("--count", family.count, "Segments per family")->capture_default_str();
  curve->add_flag("--halve-projection", curve_opts.halve_projection, "Use (s+ + s-)/2 as the integrand");
  curve->add_option("--out", curve_out, "Output CSV (default stdout)");
  add_projection(curve);

  auto *synth = gps_cmd->add_subcommand("synth", "Export 2D telegraph trajectories as a synthetic GPS CSV");
  gps::SynthOptions synth_opts;
  double synth_a = 1.0, synth_b = 2.0;
  std::string synth_out;
  synth->add_option("--days", synth_opts.days, "Days (one trajectory each)")->capture_default_str();
  synth->add_option("--records", synth_opts.records_per_day, "Records per day")->capture_default_str();
  synth->add_option("--scale", synth_opts.scale, "Degrees per model unit")->capture_default_str();
  synth->add_option("--seed", synth_opts.seed, "Seed")->capture_default_str();
  synth->add_option("--a", synth_a, "Telegraph rate a")->capture_default_str();
  synth->add_option("--b", synth_b, "Telegraph rate b")->capture_default_str();
  synth->add_option("--out", synth_out, "Output CSV (default stdout)");
  add_velocity(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    kernels::configure_threads_from_env();
    regrid.velocity.convention = gps::parse_heading_convention(heading_conv);

    if (*sim) {
      const auto model = make_model(sim_proc.spec());
      const auto n_points = grid_points_for_step(sim_h, sim_step);
      const auto paths = kernels::simulate_batch_parallel(model, sim_h, sim_seed, 0, sim_n);
      write_dataset(sim_out, kernels::sample_batch_parallel(paths, n_points), model->mode_names);
      if (!sim_events.empty() && !paths.empty()) {
        std::ofstream ev(sim_events);
        if (!ev) throw DataError("cannot write " + sim_events);
        write_events_csv(ev, paths.front());
      }
      std::cerr << "wrote " << sim_n << " trajectories of " << n_points << " points to " << sim_out << "\n";
    } else if (*est) {
      const auto model = make_model(est_proc.spec());
      const auto surface = make_surface(est_surf.spec());
      const auto method = canonical_estimator(est_method);
      KacRiceOptions opts{parse_bandwidth_method(est_bw), parse_time_rule(est_rule), est_quad};
      CrossingEstimate e;
      if (method == "closed_form") {
        if (!(est_h > 0.0)) throw UsageError("closed_form needs --H");
        e = closed_form(*model, surface, est_h, est_quad);
      } else if (method == "exact_oracle") {
        throw UsageError("use the oracle subcommand for exact_oracle");
      } else {
        if (est_data.empty()) throw UsageError("--data is required for " + method);
        const auto data = read_dataset(est_data, model->mode_names);
        if (method == "monte_carlo") {
          e = monte_carlo(data, surface);
        } else {
          const auto sp = SpeedProjection::from_mode_occupancy(model, data, opts.bandwidth);
          e = method == "kr_nonstationary" ? kr_nonstationary(data, surface, sp, opts)
                                           : kr_stationary(data, surface, sp, opts).mean;
        }
      }
      std::cout << estimate_json(e).dump(2) << "\n";
    } else if (*exp) {
      json cfg = json::object();
      if (!exp_config.empty()) {
        std::ifstream in(exp_config);
        if (!in) throw UsageError("cannot read config " + exp_config);
        try {
          cfg = json::parse(in);
        } catch (const json::parse_error &e) {
          throw UsageError(std::string("config is not valid JSON: ") + e.what());
        }
      }
      if (exp_n) cfg["n"] = *exp_n;
      if (exp_reps) cfg["replicates"] = *exp_reps;
      if (exp_step) {
        cfg["step"] = *exp_step;
        cfg.erase("n_points");
      }
      if (exp_h) cfg["horizon"] = *exp_h;
      if (exp_seed) cfg["seed"] = *exp_seed;
      if (!exp_estimators.empty()) cfg["estimators"] = exp_estimators;
      if (!exp_out.empty()) cfg["output"] = exp_out;
      const auto config = parse_experiment(cfg);
      if (exp_print_sweep) {
        for (const auto &c : sweep_grid(config)) std::cout << to_json(c).dump() << "\n";
        return 0;
      }
      const auto result = run_experiment(config);
      std::ofstream file;
      write_experiment_csv(open_output(config.output, file), result);
    } else if (*orc) {
      const auto model = make_model(orc_proc.spec());
      const auto surface = make_surface(orc_surf.spec());
      std::cout << estimate_json(exact_oracle(model, surface, orc_h, orc_nref, orc_seed)).dump(2) << "\n";
    } else if (*ingest) {
      const auto result = gps::ingest_csv(std::filesystem::path(ingest_in), columns);
      for (const auto &w : result.warnings) std::cerr << "warning: " << w << "\n";
      const auto days = gps::slice_and_regrid(result.records, regrid);
      write_dataset(ingest_out, gps::to_dataset(days));
      std::cerr << result.rows << " rows, " << result.skipped << " skipped, " << days.size()
                << " days retained\n";
    } else if (*project) {
      const auto data = read_dataset(project_data);
      const Segment seg({project_seg[0], project_seg[1]}, {project_seg[2], project_seg[3]});
      const auto p = gps::projection_profile(data, seg, proj);
      if (p.empty) std::cerr << "warning: no data within eps of the segment\n";
      std::cout << "u,count,raw_positive,raw_negative,positive,negative\n";
      char buf[160];
      for (std::size_t k = 0; k < p.u.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.6f,%zu,%.10g,%.10g,%.10g,%.10g\n", p.u[k], p.counts[k], p.raw_positive[k],
                      p.raw_negative[k], p.positive[k], p.negative[k]);
        std::cout << buf;
      }
    } else if (*curve) {
      const auto data = read_dataset(curve_data);
      curve_opts.projection = proj;
      curve_opts.kac_rice.bandwidth = parse_bandwidth_method(curve_bw);
      gps::SegmentFamily fam;
      if (curve_dir == "sea") {
        fam = gps::sea_family(family);
      } else if (curve_dir == "inland") {
        fam = gps::inland_family(family);
      } else {
        throw UsageError("--direction must be sea or inland");
      }
      const auto points = gps::crossing_curve(data, fam, gps::parse_curve_method(curve_method), curve_opts);
      std::ofstream file;
      gps::write_curve_csv(open_output(curve_out, file), points);
    } else if (*synth) {
      synth_opts.velocity = regrid.velocity;
      const auto res = gps::synthesize(make_telegraph2d(synth_a, synth_b), synth_opts);
      std::ofstream file;
      gps::write_records_csv(open_output(synth_out, file), res.records);
    }
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError &e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error &e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
