#include "psp/gps.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "psp/crossing.hpp"
#include "psp/errors.hpp"
#include "psp/kernels.hpp"

namespace psp::gps {

namespace {

constexpr double seconds_per_day = 86400.0;
constexpr std::size_t max_warnings = 20;

std::vector<std::string> split_csv_line(const std::string &line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_number(const std::string &text, const char *field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception &) {
    throw DataError(std::string("unparseable ") + field + " '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw DataError(std::string("unparseable ") + field + " '" + text + "'");
  }
  return v;
}

double day_start(double epoch) { return std::floor(epoch / seconds_per_day) * seconds_per_day; }

std::string format_date(double epoch) {
  using namespace std::chrono;
  const sys_days day{days{static_cast<long>(std::floor(epoch / seconds_per_day))}};
  const year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

} // namespace

double parse_timestamp(const std::string &text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double s = 0.0;
  char sep = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%lf%n", &y, &mo, &d, &sep, &h, &mi, &s, &consumed) != 7 ||
      (sep != ' ' && sep != 'T')) {
    throw DataError("unparseable timestamp '" + text + "'");
  }
  const std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z" || rest == "+00:00")) throw DataError("unparseable timestamp '" + text + "'");
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s < 0.0 || s >= 61.0) throw DataError("invalid timestamp '" + text + "'");
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days_since) * seconds_per_day + h * 3600.0 + mi * 60.0 + s;
}

std::string format_timestamp(double epoch) {
  const double start = day_start(epoch);
  auto micros = static_cast<long long>(std::llround((epoch - start) * 1e6));
  if (micros >= static_cast<long long>(seconds_per_day * 1e6)) micros = static_cast<long long>(seconds_per_day * 1e6) - 1;
  const long long secs = micros / 1000000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s %02lld:%02lld:%02lld.%06lld", format_date(epoch).c_str(), secs / 3600,
                (secs / 60) % 60, secs % 60, micros % 1000000);
  return buf;
}

void validate(const GpsRecord &rec) {
  if (!(rec.lat >= -90.0 && rec.lat <= 90.0)) throw DataError("lat out of range: " + std::to_string(rec.lat));
  if (!(rec.lon >= -180.0 && rec.lon <= 180.0)) throw DataError("lon out of range: " + std::to_string(rec.lon));
  if (!(rec.ground_speed >= 0.0)) throw DataError("ground-speed negative: " + std::to_string(rec.ground_speed));
  if (!(rec.heading >= 0.0 && rec.heading < 360.0)) {
    throw DataError("heading out of [0, 360): " + std::to_string(rec.heading));
  }
}

IngestResult ingest_csv(std::istream &in, const ColumnMap &columns) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("GPS file is empty");
  const auto header = split_csv_line(line);
  auto find = [&](const std::string &name, bool required) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw DataError("missing column '" + name + "'");
      return std::nullopt;
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_time = *find(columns.timestamp, true);
  const auto c_lat = *find(columns.lat, true);
  const auto c_lon = *find(columns.lon, true);
  const auto c_speed = *find(columns.ground_speed, true);
  const auto c_heading = *find(columns.heading, true);
  const auto c_id = columns.id.empty() ? std::nullopt : find(columns.id, false);

  IngestResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    ++result.rows;
    try {
      const auto f = split_csv_line(line);
      const auto get = [&](std::size_t c) -> const std::string & {
        if (c >= f.size()) throw DataError("row has " + std::to_string(f.size()) + " fields");
        return f[c];
      };
      GpsRecord rec;
      rec.timestamp = parse_timestamp(get(c_time));
      rec.lat = parse_number(get(c_lat), "lat");
      rec.lon = parse_number(get(c_lon), "lon");
      rec.ground_speed = parse_number(get(c_speed), "ground-speed");
      rec.heading = parse_number(get(c_heading), "heading");
      if (c_id) rec.id = get(*c_id);
      validate(rec);
      result.records.push_back(std::move(rec));
    } catch (const DataError &e) {
      ++result.skipped;
      if (result.warnings.size() < max_warnings) {
        result.warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (result.rows == 0) throw DataError("GPS file has no data rows");
  std::stable_sort(result.records.begin(), result.records.end(), [](const GpsRecord &x, const GpsRecord &y) {
    return x.id != y.id ? x.id < y.id : x.timestamp < y.timestamp;
  });
  return result;
}

IngestResult ingest_csv(const std::filesystem::path &path, const ColumnMap &columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return ingest_csv(in, columns);
}

HeadingConvention parse_heading_convention(const std::string &name) {
  if (name == "compass") return HeadingConvention::compass;
  if (name == "literal") return HeadingConvention::literal;
  throw UsageError("unknown heading convention '" + name + "' (expected compass or literal)");
}

Vec2 velocity_vector(const GpsRecord &rec, const VelocityOptions &opts) {
  if (!(std::abs(opts.ref_lat) < 89.0)) throw UsageError("reference latitude must satisfy |lat| < 89");
  const double h = rec.heading * std::numbers::pi / 180.0;
  double east = 0.0, north = 0.0;
  if (opts.convention == HeadingConvention::compass) {
    east = rec.ground_speed * std::sin(h);
    north = rec.ground_speed * std::cos(h);
  } else {
    const double theta = h - std::numbers::pi / 2.0;
    east = rec.ground_speed * std::cos(theta);
    north = rec.ground_speed * std::sin(theta);
  }
  const double lon_m = meters_per_degree_lon_equator * std::cos(opts.ref_lat * std::numbers::pi / 180.0);
  return {3600.0 * east / lon_m, 3600.0 * north / meters_per_degree_lat};
}

std::vector<DayTrajectory> slice_and_regrid(const std::vector<GpsRecord> &records, const RegridOptions &opts) {
  if (opts.n_points < 2) throw UsageError("n_points must be at least 2");
  if (opts.min_count > opts.max_count) throw UsageError("min_count exceeds max_count");
  // Group by (id, day); records are assumed sorted but grouping does not rely on it.
  std::map<std::pair<std::string, double>, std::vector<const GpsRecord *>> groups;
  for (const auto &r : records) groups[{r.id, day_start(r.timestamp)}].push_back(&r);

  std::vector<DayTrajectory> out;
  for (auto &[key, recs] : groups) {
    if (recs.size() < opts.min_count || recs.size() > opts.max_count) continue;
    if (recs.size() < 2) throw DataError("day " + format_date(key.second) + " has fewer than 2 records");
    std::stable_sort(recs.begin(), recs.end(),
                     [](const GpsRecord *x, const GpsRecord *y) { return x->timestamp < y->timestamp; });
    std::vector<double> t(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) t[i] = (recs[i]->timestamp - key.second) / 3600.0;

    DayTrajectory day;
    day.id = key.first;
    day.date = format_date(key.second);
    day.record_count = recs.size();
    day.grid.dim = 2;
    day.grid.horizon = 24.0;
    day.grid.samples.resize(opts.n_points);
    day.grid.velocities.resize(opts.n_points);
    std::size_t k = 0;
    for (std::size_t j = 0; j < opts.n_points; ++j) {
      const double tj = day.grid.time(j);
      while (k + 1 < t.size() && t[k + 1] <= tj) ++k;
      // t[k] <= tj < t[k+1], or tj outside the recorded span.
      const GpsRecord &r0 = *recs[k];
      Vec2 pos{r0.lon, r0.lat};
      std::size_t nearest = k;
      if (tj <= t.front()) {
        pos = {recs.front()->lon, recs.front()->lat};
        nearest = 0;
      } else if (k + 1 < t.size()) {
        const GpsRecord &r1 = *recs[k + 1];
        const double span = t[k + 1] - t[k];
        const double w = span > 0.0 ? (tj - t[k]) / span : 0.0;
        pos = {r0.lon + w * (r1.lon - r0.lon), r0.lat + w * (r1.lat - r0.lat)};
        if (t[k + 1] - tj < tj - t[k]) nearest = k + 1;
      }
      day.grid.samples[j] = pos;
      day.grid.velocities[j] = velocity_vector(*recs[nearest], opts.velocity);
    }
    out.push_back(std::move(day));
  }
  return out;
}

Dataset to_dataset(const std::vector<DayTrajectory> &days) {
  Dataset d;
  d.reserve(days.size());
  for (const auto &day : days) d.push_back(day.grid);
  return d;
}

ProjectionParts ProjectionProfile::at(double uq) const {
  if (u.empty()) return {};
  if (uq <= u.front()) return {positive.front(), negative.front()};
  if (uq >= u.back()) return {positive.back(), negative.back()};
  const auto it = std::upper_bound(u.begin(), u.end(), uq);
  const auto i = static_cast<std::size_t>(it - u.begin()) - 1;
  const double w = (uq - u[i]) / (u[i + 1] - u[i]);
  return {positive[i] + w * (positive[i + 1] - positive[i]), negative[i] + w * (negative[i + 1] - negative[i])};
}

ProjectionProfile projection_profile(const Dataset &days, const Segment &seg, const ProjectionOptions &opts) {
  if (!(opts.eps > 0.0)) throw UsageError("eps must be positive");
  if (!(opts.dx > 0.0 && opts.dx <= 1.0)) throw UsageError("dx must lie in (0, 1]");
  const auto steps = static_cast<std::size_t>(std::floor(1.0 / opts.dx + 1e-9));
  const Vec2 nu = seg.normal();
  const double eps2 = opts.eps * opts.eps;

  ProjectionProfile p;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double u = static_cast<double>(k) * opts.dx;
    const Vec2 rho = seg.at(u);
    double pos = 0.0, neg = 0.0;
    std::size_t count = 0;
    for (const auto &day : days) {
      if (day.velocities.size() != day.samples.size()) throw DataError("speed projection needs velocities");
      for (std::size_t j = 0; j < day.samples.size(); ++j) {
        const Vec2 d = day.samples[j] - rho;
        if (dot(d, d) > eps2) continue;
        const auto parts = split_projection(dot(day.velocities[j], nu));
        pos += parts.positive;
        neg += parts.negative;
        ++count;
      }
    }
    p.u.push_back(u);
    p.counts.push_back(count);
    p.raw_positive.push_back(count ? pos / static_cast<double>(count) : 0.0);
    p.raw_negative.push_back(count ? neg / static_cast<double>(count) : 0.0);
  }
  p.empty = std::all_of(p.counts.begin(), p.counts.end(), [](std::size_t c) { return c == 0; });
  if (p.u.size() < 2 || p.empty) {
    p.positive = p.raw_positive;
    p.negative = p.raw_negative;
    return p;
  }
  p.positive = lowess(p.u, p.raw_positive, opts.smoothing);
  p.negative = lowess(p.u, p.raw_negative, opts.smoothing);
  for (auto &v : p.positive) v = std::max(0.0, v);
  for (auto &v : p.negative) v = std::max(0.0, v);
  return p;
}

SpeedProjection speed_projection_estimate(const Dataset &days, const Segment &seg, const ProjectionOptions &opts) {
  auto profile = std::make_shared<ProjectionProfile>(projection_profile(days, seg, opts));
  if (profile->empty) {
    std::cerr << "warning: no data within eps=" << opts.eps << " of the segment; speed projection is zero\n";
  }
  return SpeedProjection(
      [profile, seg](const SurfaceNode &node) {
        const auto parts = profile->at(seg.parameter(node.point));
        // The profile is measured against the segment's own normal.
        return dot(node.normal, seg.normal()) >= 0.0 ? parts : ProjectionParts{parts.negative, parts.positive};
      },
      SpeedProjection::Source::data_estimated);
}

SegmentFamily sea_family(const FamilyOptions &opts) {
  const Segment base(opts.a, opts.b);
  SegmentFamily f;
  f.direction = "sea";
  for (std::size_t i = 0; i < opts.count; ++i) {
    const double angle = static_cast<double>(i) * opts.theta;
    const double offset = static_cast<double>(i) * opts.dx;
    const Vec2 a_i = opts.a + offset * rotate(base.normal(), angle);
    const Vec2 b_i = a_i + rotate(opts.b - opts.a, angle);
    f.segments.emplace_back(a_i, b_i);
    f.distances.push_back(offset);
  }
  return f;
}

SegmentFamily inland_family(const FamilyOptions &opts) {
  const Segment base(opts.a_inland, opts.b_inland);
  SegmentFamily f;
  f.direction = "inland";
  for (std::size_t i = 0; i < opts.count; ++i) {
    const double offset = static_cast<double>(i) * opts.dx;
    const Vec2 shift = (opts.inland_sign * offset) * base.normal();
    f.segments.emplace_back(opts.a_inland + shift, opts.b_inland + shift);
    f.distances.push_back(offset);
  }
  return f;
}

CurveMethod parse_curve_method(const std::string &name) {
  if (name == "kr") return CurveMethod::kr;
  if (name == "mc") return CurveMethod::mc;
  throw UsageError("unknown curve method '" + name + "' (expected kr or mc)");
}

std::string to_string(CurveMethod m) { return m == CurveMethod::kr ? "kr" : "mc"; }

std::vector<CurvePoint> crossing_curve(const Dataset &days, const SegmentFamily &family, CurveMethod method,
                                       const CurveOptions &opts) {
  if (days.empty()) throw DataError("crossing curve needs at least one day");
  if (method == CurveMethod::kr && days.size() < 2) throw DataError("Kac-Rice curve needs at least two days");
  std::vector<CurvePoint> out(family.segments.size());
  kernels::parallel_for_rethrow(family.segments.size(), [&](std::size_t i) {
    const Surface surface = family.segments[i];
    double value = 0.0;
    if (method == CurveMethod::mc) {
      value = monte_carlo(days, surface).value;
    } else {
      auto sp = speed_projection_estimate(days, family.segments[i], opts.projection);
      value = kr_nonstationary(days, surface, sp, opts.kac_rice).value;
      if (opts.halve_projection) value *= 0.5;
    }
    out[i] = {family.distances[i], value, to_string(method), family.direction};
  });
  return out;
}

void write_curve_csv(std::ostream &out, const std::vector<CurvePoint> &points) {
  out << "distance,estimate,method,direction\n";
  char buf[128];
  for (const auto &p : points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.10g,", p.distance, p.estimate);
    out << buf << p.method << ',' << p.direction << '\n';
  }
}

SynthResult synthesize(const ModelPtr &model, const SynthOptions &opts) {
  if (!model || model->dim != 2) throw UsageError("GPS synthesis needs a two-dimensional model");
  if (opts.records_per_day < 2) throw UsageError("records_per_day must be at least 2");
  if (!(opts.scale > 0.0)) throw UsageError("scale must be positive");
  const double lon_m = meters_per_degree_lon_equator * std::cos(opts.velocity.ref_lat * std::numbers::pi / 180.0);
  const std::size_t n_grid = opts.records_per_day + 1;

  SynthResult res;
  res.paths = kernels::simulate_batch_parallel(model, 24.0, opts.seed, 0, opts.days);
  res.truth = kernels::sample_batch_parallel(res.paths, n_grid);
  for (std::size_t d = 0; d < opts.days; ++d) {
    const auto &grid = res.truth[d];
    const double midnight = opts.start_epoch + static_cast<double>(d) * seconds_per_day;
    for (std::size_t k = 0; k < opts.records_per_day; ++k) {
      const Vec2 x = grid.samples[k];
      const Vec2 v = grid.velocities[k];
      // Degrees per hour to metres per second, then back to speed and heading.
      double east = v.x * opts.scale * lon_m / 3600.0;
      double north = v.y * opts.scale * meters_per_degree_lat / 3600.0;
      if (opts.velocity.convention == HeadingConvention::literal) north = -north;
      GpsRecord rec;
      rec.id = opts.id;
      rec.timestamp = midnight + grid.time(k) * 3600.0;
      rec.lon = opts.origin.x + opts.scale * x.x;
      rec.lat = opts.origin.y + opts.scale * x.y;
      rec.ground_speed = std::hypot(east, north);
      double heading = rec.ground_speed > 0.0 ? std::atan2(east, north) * 180.0 / std::numbers::pi : 0.0;
      if (heading < 0.0) heading += 360.0;
      if (heading >= 360.0) heading -= 360.0;
      rec.heading = heading;
      res.records.push_back(std::move(rec));
    }
  }
  return res;
}

void write_records_csv(std::ostream &out, const std::vector<GpsRecord> &records, const ColumnMap &columns) {
  out << columns.timestamp << ',' << columns.lat << ',' << columns.lon << ',' << columns.ground_speed << ','
      << columns.heading << ',' << columns.id << '\n';
  char buf[160];
  for (const auto &r : records) {
    std::snprintf(buf, sizeof buf, ",%.10f,%.10f,%.10f,%.10f,", r.lat, r.lon, r.ground_speed, r.heading);
    out << format_timestamp(r.timestamp) << buf << r.id << '\n';
  }
}

} // namespace psp::gps
