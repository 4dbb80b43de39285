#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "pdrlab/types.hpp"

namespace pdrlab::streams {

/// Sample streams serialize to JSONL: one object per sample with fields
/// t_meas, t_avail, modality, values, source.
void write_jsonl(std::ostream& os, std::span<const SensorSample> samples);
void write_jsonl(const std::filesystem::path& path, std::span<const SensorSample> samples);

std::vector<SensorSample> read_jsonl(std::istream& is);
std::vector<SensorSample> read_jsonl(const std::filesystem::path& path);

}  // namespace pdrlab::streams
