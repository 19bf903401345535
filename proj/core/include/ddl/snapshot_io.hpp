// Field snapshot and trajectory manifest formats.
//
// CSV snapshots carry a header `x,u` (1-D) or `x,y,u` (2-D) followed by one
// row per cell, x varying fastest. Binary snapshots start with the four
// magic bytes `DDL1`, then little-endian u32 dim, dim x u32 N, dim x f64 L,
// and finally the N^d values as f64.
#ifndef DDL_SNAPSHOT_IO_HPP_
#define DDL_SNAPSHOT_IO_HPP_

#include <filesystem>
#include <map>
#include <string>

#include "ddl/discrete.hpp"

namespace ddl {

void write_field_csv(const std::filesystem::path& path, const Field& u);
Field read_field_csv(const std::filesystem::path& path);

void write_field_binary(const std::filesystem::path& path, const Field& u);
Field read_field_binary(const std::filesystem::path& path);

/// Reads either format, chosen by the file's leading bytes.
Field read_field(const std::filesystem::path& path);

/// Flat key/value description of the problem that produced a trajectory.
using ProblemEcho = std::map<std::string, std::string>;

/// Writes snap_NNNN.csv per sample plus manifest.json into `dir`.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                      const ProblemEcho& problem = {});

struct LoadedTrajectory {
  Trajectory traj;
  ProblemEcho problem;
};

LoadedTrajectory read_trajectory(const std::filesystem::path& dir);

/// Locale-independent shortest round-trip formatting of a double.
std::string format_double(double v);

}  // namespace ddl

#endif  // DDL_SNAPSHOT_IO_HPP_
