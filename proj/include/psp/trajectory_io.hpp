#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "psp/simulate.hpp"

namespace psp {

/// Writes `t,x1[,x2][,mode][,v1[,v2]]`. Mode indices are written as labels
/// from mode_names when given, as integers otherwise.
void write_grid_csv(std::ostream &out, const GridTrajectory &traj, const std::vector<std::string> &mode_names = {});

/// Reads the format written by write_grid_csv. Mode labels are resolved
/// against mode_names; without names only integer modes are accepted.
GridTrajectory read_grid_csv(std::istream &in, const std::vector<std::string> &mode_names = {});

/// A dataset directory holds one traj_NNNNN.csv per trajectory.
void write_dataset(const std::filesystem::path &dir, const Dataset &dataset,
                   const std::vector<std::string> &mode_names = {});
Dataset read_dataset(const std::filesystem::path &dir, const std::vector<std::string> &mode_names = {});

/// Event listing `time,x1[,x2],mode` of an exact trajectory.
void write_events_csv(std::ostream &out, const EventTrajectory &traj);

} // namespace psp
