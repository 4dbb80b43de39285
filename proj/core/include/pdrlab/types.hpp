#pragma once

#include <string>
#include <vector>

#include "pdrlab/errors.hpp"

namespace pdrlab {

/// Sensor modalities carried by a sample stream. `heading` is an internal
/// modality for derived orientation streams; simulated raw streams only emit
/// the first four.
enum class Modality { radio_pos, accel, gyro, speed, heading };

inline const char* to_string(Modality m) {
    switch (m) {
        case Modality::radio_pos: return "radio_pos";
        case Modality::accel: return "accel";
        case Modality::gyro: return "gyro";
        case Modality::speed: return "speed";
        case Modality::heading: return "heading";
    }
    return "?";
}

inline Modality modality_from_string(const std::string& s) {
    if (s == "radio_pos") return Modality::radio_pos;
    if (s == "accel") return Modality::accel;
    if (s == "gyro") return Modality::gyro;
    if (s == "speed") return Modality::speed;
    if (s == "heading") return Modality::heading;
    throw DataError("unknown modality: " + s);
}

/// Value vector length for each modality.
inline int modality_dim(Modality m) {
    switch (m) {
        case Modality::radio_pos: return 2;
        case Modality::accel: return 3;
        case Modality::gyro: return 1;
        case Modality::speed: return 1;
        case Modality::heading: return 1;
    }
    return 0;
}

/// One timestamped measurement from one modality: the unit of asynchronous
/// ingestion. `t_meas` is when the quantity was measured; `t_avail` is when
/// it reached the consumer (t_avail >= t_meas). Keeping both means transport
/// delay is modeled without corrupting the measurement timestamp.
struct SensorSample {
    double t_meas = 0.0;
    double t_avail = 0.0;
    Modality modality = Modality::radio_pos;
    std::vector<double> values;
    std::string source;
};

/// Ground-truth pose on the simulation grid.
struct ReferencePose {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double speed = 0.0;
    double heading = 0.0;       // rad, in (-pi, pi]
    double cum_distance = 0.0;  // integral of speed, non-decreasing
};

/// Estimated 2D pose with per-axis variance. `t` is the time the pose refers
/// to (= emission time + horizon for forecasts).
struct PoseEstimate {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double horizon = 0.0;
    bool degenerate = false;  // set when a variance could not be estimated (e.g. 1 MC pass)
};

}  // namespace pdrlab
