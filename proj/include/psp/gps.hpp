#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "psp/estimators.hpp"
#include "psp/lowess.hpp"
#include "psp/model.hpp"
#include "psp/simulate.hpp"
#include "psp/surfaces.hpp"

namespace psp::gps {

/// One GPS fix. Timestamps are UTC seconds since the Unix epoch.
struct GpsRecord {
  std::string id;
  double timestamp = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  /// m/s
  double ground_speed = 0.0;
  /// Degrees clockwise from north, in [0, 360).
  double heading = 0.0;
};

struct ColumnMap {
  std::string timestamp = "timestamp";
  std::string lat = "location-lat";
  std::string lon = "location-long";
  std::string ground_speed = "ground-speed";
  std::string heading = "heading";
  /// Animal identifier column; when empty or absent every row belongs to one
  /// track.
  std::string id = "individual-local-identifier";
};

struct IngestResult {
  std::vector<GpsRecord> records;
  std::size_t rows = 0;
  std::size_t skipped = 0;
  /// First few per-row problems, for the user.
  std::vector<std::string> warnings;
};

/// Parses "YYYY-MM-DD[ T]HH:MM:SS[.ffffff][Z]" as UTC.
double parse_timestamp(const std::string &text);
std::string format_timestamp(double epoch_seconds);

/// Checks the range invariants of a record; throws DataError naming the field.
void validate(const GpsRecord &rec);

/// Reads a GPS CSV. Rows with unparseable or out-of-range fields are skipped
/// and counted. Output is sorted by (id, timestamp).
IngestResult ingest_csv(std::istream &in, const ColumnMap &columns = {});
IngestResult ingest_csv(const std::filesystem::path &path, const ColumnMap &columns = {});

enum class HeadingConvention {
  /// east = v sin(heading), north = v cos(heading)
  compass,
  /// heading - 90 degrees read as a counterclockwise angle from east
  literal,
};
HeadingConvention parse_heading_convention(const std::string &name);

struct VelocityOptions {
  double ref_lat = 53.6;
  HeadingConvention convention = HeadingConvention::compass;
};

constexpr double meters_per_degree_lat = 111200.0;
constexpr double meters_per_degree_lon_equator = 111320.0;

/// Recorded speed and heading as (v_lon, v_lat) in degrees per hour.
Vec2 velocity_vector(const GpsRecord &rec, const VelocityOptions &opts = {});

/// One retained UTC day of one animal on the common grid. The grid is stored
/// as a GridTrajectory in hours over [0, 24], positions (lon, lat) in degrees
/// and velocities in degrees per hour.
struct DayTrajectory {
  std::string id;
  std::string date;
  std::size_t record_count = 0;
  GridTrajectory grid;
};

struct RegridOptions {
  std::size_t min_count = 440;
  std::size_t max_count = 467;
  std::size_t n_points = 468;
  VelocityOptions velocity;
};

/// Splits records into per-animal UTC days, keeps days whose record count is
/// within [min_count, max_count], and interpolates positions linearly onto
/// the grid (held constant outside the first and last fix). Velocities come
/// from the record nearest in time.
std::vector<DayTrajectory> slice_and_regrid(const std::vector<GpsRecord> &records, const RegridOptions &opts = {});

Dataset to_dataset(const std::vector<DayTrajectory> &days);

struct ProjectionOptions {
  /// Exploration radius in degrees.
  double eps = 0.01;
  /// Step of the walk along the segment, as a fraction of its length.
  double dx = 0.01;
  LowessOptions smoothing;
};

/// Raw and smoothed speed projections along a segment, at u_k = k dx.
struct ProjectionProfile {
  std::vector<double> u;
  std::vector<std::size_t> counts;
  std::vector<double> raw_positive, raw_negative;
  std::vector<double> positive, negative;
  bool empty = false;

  /// Smoothed parts linearly interpolated at u in [0, 1].
  ProjectionParts at(double u) const;
};

ProjectionProfile projection_profile(const Dataset &days, const Segment &seg, const ProjectionOptions &opts = {});

/// Data-estimated speed projection on the segment; all-zero (with a warning
/// on stderr) when no sample lies within eps of the segment walk.
SpeedProjection speed_projection_estimate(const Dataset &days, const Segment &seg,
                                          const ProjectionOptions &opts = {});

struct SegmentFamily {
  std::string direction;
  std::vector<Segment> segments;
  std::vector<double> distances;
};

struct FamilyOptions {
  Vec2 a{6.9, 53.7};
  Vec2 b{7.5, 53.77};
  Vec2 a_inland{7.45, 53.7};
  Vec2 b_inland{8.05, 53.7};
  double dx = 0.02;
  double theta = 3.14159265358979323846 / 247.0;
  std::size_t count = 61;
  /// Side towards which inland translates move: -1 walks against the
  /// segment's normal, i.e. south for a west-to-east segment.
  double inland_sign = -1.0;
};

/// Sea family: A_i = A + i dx R^i nu, B_i = A_i + R^i (B - A).
SegmentFamily sea_family(const FamilyOptions &opts = {});
/// Inland family: parallel translates of [A'B'] by i dx along +-nu.
SegmentFamily inland_family(const FamilyOptions &opts = {});

enum class CurveMethod { kr, mc };
CurveMethod parse_curve_method(const std::string &name);
std::string to_string(CurveMethod m);

struct CurveOptions {
  ProjectionOptions projection;
  KacRiceOptions kac_rice{BandwidthMethod::automatic, TimeRule::rectangle, 0.005};
  /// Use (s+ + s-)/2 as the Kac-Rice integrand instead of s+ + s-.
  bool halve_projection = false;
};

struct CurvePoint {
  double distance = 0.0;
  double estimate = 0.0;
  std::string method;
  std::string direction;
};

/// Daily average crossing count for every segment of the family.
std::vector<CurvePoint> crossing_curve(const Dataset &days, const SegmentFamily &family, CurveMethod method,
                                       const CurveOptions &opts = {});

void write_curve_csv(std::ostream &out, const std::vector<CurvePoint> &points);

struct SynthOptions {
  std::size_t days = 50;
  std::size_t records_per_day = 467;
  /// Degrees per model length unit; one model time unit is one hour.
  double scale = 0.01;
  Vec2 origin{7.7, 53.6};
  double start_epoch = 1590969600.0;  // 2020-06-01T00:00:00Z
  VelocityOptions velocity;
  std::uint64_t seed = 1;
  std::string id = "synthetic";
};

struct SynthResult {
  std::vector<GpsRecord> records;
  /// Model-unit trajectories sampled at the record times.
  Dataset truth;
  std::vector<EventTrajectory> paths;
};

/// Turns simulated 24-hour trajectories of a two-dimensional model into GPS
/// fixes (one trajectory per UTC day).
SynthResult synthesize(const ModelPtr &model, const SynthOptions &opts = {});

void write_records_csv(std::ostream &out, const std::vector<GpsRecord> &records, const ColumnMap &columns = {});

} // namespace psp::gps
