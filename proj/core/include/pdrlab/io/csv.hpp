#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pdrlab/classic/dead_reckoning.hpp"
#include "pdrlab/streams/segment.hpp"
#include "pdrlab/types.hpp"

namespace pdrlab::io {

/// All CSV writers print doubles with 17 significant digits so files
/// round-trip losslessly; readers skip '#' comment lines. An optional
/// comment (e.g. "config=<hash>") is embedded as the first line.

void write_reference_csv(const std::filesystem::path& path, std::span<const ReferencePose> ref,
                         const std::string& comment = {});
std::vector<ReferencePose> read_reference_csv(const std::filesystem::path& path);

void write_estimates_csv(const std::filesystem::path& path, std::span<const PoseEstimate> est,
                         const std::string& comment = {});
std::vector<PoseEstimate> read_estimates_csv(const std::filesystem::path& path);

void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const classic::DeadReckonState> trajectory,
                          const std::string& comment = {});

/// Columnar segment format: one row per tick, one column per channel
/// component plus one validity flag per channel, plus the reference when
/// attached. Lossless round-trip including validity.
void write_segment_csv(const std::filesystem::path& path, const streams::Segment& segment,
                       const std::string& comment = {});
streams::Segment read_segment_csv(const std::filesystem::path& path);

}  // namespace pdrlab::io
