#include "psp/trajectory_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "psp/errors.hpp"

namespace psp {

namespace {

std::vector<std::string> split(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string &s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw DataError("line " + std::to_string(line) + ": not a number '" + s + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

void write_grid_csv(std::ostream &out, const GridTrajectory &traj, const std::vector<std::string> &mode_names) {
  const bool two = traj.dim == 2;
  const bool has_modes = traj.modes.size() == traj.size();
  const bool has_vel = traj.velocities.size() == traj.size();
  out << (two ? "t,x1,x2" : "t,x1");
  if (has_modes) out << ",mode";
  if (has_vel) out << (two ? ",v1,v2" : ",v1");
  out << '\n';
  for (std::size_t j = 0; j < traj.size(); ++j) {
    out << fmt(traj.time(j)) << ',' << fmt(traj.samples[j].x);
    if (two) out << ',' << fmt(traj.samples[j].y);
    if (has_modes) {
      const int m = traj.modes[j];
      if (!mode_names.empty()) {
        out << ',' << mode_names.at(static_cast<std::size_t>(m));
      } else {
        out << ',' << m;
      }
    }
    if (has_vel) {
      out << ',' << fmt(traj.velocities[j].x);
      if (two) out << ',' << fmt(traj.velocities[j].y);
    }
    out << '\n';
  }
}

GridTrajectory read_grid_csv(std::istream &in, const std::vector<std::string> &mode_names) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("trajectory file is empty");
  const auto header = split(line);
  const auto col = [&](const char *name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_t = col("t"), c_x1 = col("x1"), c_x2 = col("x2"), c_mode = col("mode"), c_v1 = col("v1"),
            c_v2 = col("v2");
  if (c_t < 0 || c_x1 < 0) throw DataError("trajectory header needs columns t and x1");

  GridTrajectory traj;
  traj.dim = c_x2 >= 0 ? 2 : 1;
  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields");
    }
    const auto get = [&](int c) { return to_double(f[static_cast<std::size_t>(c)], line_no); };
    times.push_back(get(c_t));
    traj.samples.push_back({get(c_x1), c_x2 >= 0 ? get(c_x2) : 0.0});
    if (c_v1 >= 0) traj.velocities.push_back({get(c_v1), c_v2 >= 0 ? get(c_v2) : 0.0});
    if (c_mode >= 0) {
      const auto &label = f[static_cast<std::size_t>(c_mode)];
      const auto it = std::find(mode_names.begin(), mode_names.end(), label);
      if (it != mode_names.end()) {
        traj.modes.push_back(static_cast<int>(it - mode_names.begin()));
      } else if (mode_names.empty()) {
        traj.modes.push_back(static_cast<int>(to_double(label, line_no)));
      } else {
        throw DataError("line " + std::to_string(line_no) + ": unknown mode '" + label + "'");
      }
    }
  }
  if (times.size() < 2) throw DataError("trajectory needs at least 2 grid points");
  if (times.front() != 0.0) throw DataError("trajectory grid must start at t = 0");
  traj.horizon = times.back();
  if (!(traj.horizon > 0.0)) throw DataError("trajectory horizon must be positive");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (std::abs(times[j] - traj.time(j)) > 1e-9 * std::max(1.0, traj.horizon)) {
      throw DataError("trajectory grid is not regular at row " + std::to_string(j + 1));
    }
  }
  return traj;
}

void write_dataset(const std::filesystem::path &dir, const Dataset &dataset,
                   const std::vector<std::string> &mode_names) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "traj_%05zu.csv", i);
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    write_grid_csv(out, dataset[i], mode_names);
  }
}

Dataset read_dataset(const std::filesystem::path &dir, const std::vector<std::string> &mode_names) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a dataset directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("traj_", 0) == 0 && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw DataError("no traj_*.csv files in " + dir.string());
  std::sort(files.begin(), files.end());
  Dataset out;
  for (const auto &f : files) {
    std::ifstream in(f);
    try {
      out.push_back(read_grid_csv(in, mode_names));
    } catch (const DataError &e) {
      throw DataError(f.filename().string() + ": " + e.what());
    }
  }
  return out;
}

void write_events_csv(std::ostream &out, const EventTrajectory &traj) {
  const bool two = traj.model && traj.model->dim == 2;
  out << (two ? "time,x1,x2,mode\n" : "time,x1,mode\n");
  for (const auto &e : traj.events) {
    out << fmt(e.time) << ',' << fmt(e.x.x);
    if (two) out << ',' << fmt(e.x.y);
    out << ',' << (traj.model ? traj.model->mode_names.at(static_cast<std::size_t>(e.mode)) : std::to_string(e.mode))
        << '\n';
  }
}

} // namespace psp
