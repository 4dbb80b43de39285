#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdrlab/types.hpp"

namespace pdrlab::streams {

enum class Validity : uint8_t { missing = 0, interpolated = 1, observed = 2 };

/// One resampled channel on the segment grid. `data` is row-major per tick
/// (tick * dim + component); `validity` has one entry per tick.
struct Channel {
    std::string name;
    int dim = 1;
    std::vector<double> data;
    std::vector<Validity> validity;

    double at(std::size_t tick, int comp = 0) const { return data[tick * static_cast<std::size_t>(dim) + comp]; }
    double& at(std::size_t tick, int comp = 0) { return data[tick * static_cast<std::size_t>(dim) + comp]; }
    bool valid(std::size_t tick) const { return validity[tick] != Validity::missing; }
};

/// A cleaned, time-aligned multi-channel recording on one uniform grid.
/// Standard channels: p_radio (2), theta_radio (1), v (1), theta_ori (1),
/// acc (3). Reference poses are attached for training/evaluation and absent
/// in deployment.
struct Segment {
    std::string id;
    double fs = 100.0;
    double t0 = 0.0;
    std::size_t ticks = 0;
    std::vector<Channel> channels;
    std::vector<ReferencePose> ref;  // empty, or one pose per tick

    double time_at(std::size_t tick) const { return t0 + static_cast<double>(tick) / fs; }
    bool has_ref() const { return !ref.empty(); }

    const Channel* find(const std::string& name) const;
    Channel* find(const std::string& name);
    /// find() that throws DataError when the channel is absent.
    const Channel& require(const std::string& name) const;
};

/// Export the valid ticks of a segment back into the sample-stream format
/// (each grid tick becomes a zero-delay sample). Re-synchronizing the result
/// on the same grid reproduces the channel values.
std::vector<SensorSample> segment_to_samples(const Segment& segment);

}  // namespace pdrlab::streams
