#include "pdrlab/streams/segment.hpp"

#include <algorithm>

#include "pdrlab/errors.hpp"

namespace pdrlab::streams {

const Channel* Segment::find(const std::string& name) const {
    for (const auto& c : channels)
        if (c.name == name) return &c;
    return nullptr;
}

Channel* Segment::find(const std::string& name) {
    for (auto& c : channels)
        if (c.name == name) return &c;
    return nullptr;
}

const Channel& Segment::require(const std::string& name) const {
    const Channel* c = find(name);
    if (!c) throw DataError("segment '" + id + "' has no channel '" + name + "'");
    return *c;
}

std::vector<SensorSample> segment_to_samples(const Segment& segment) {
    std::vector<SensorSample> out;
    for (const auto& c : segment.channels) {
        Modality m;
        if (c.name == "p_radio") m = Modality::radio_pos;
        else if (c.name == "v") m = Modality::speed;
        else if (c.name == "acc") m = Modality::accel;
        else if (c.name == "theta_ori") m = Modality::heading;
        else continue;  // theta_radio is re-derived from positions on import

        for (std::size_t k = 0; k < segment.ticks; ++k) {
            if (!c.valid(k)) continue;
            SensorSample s;
            s.t_meas = s.t_avail = segment.time_at(k);
            s.modality = m;
            s.values.resize(static_cast<std::size_t>(c.dim));
            for (int d = 0; d < c.dim; ++d) s.values[static_cast<std::size_t>(d)] = c.at(k, d);
            s.source = segment.id;
            out.push_back(std::move(s));
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SensorSample& a, const SensorSample& b) { return a.t_meas < b.t_meas; });
    return out;
}

}  // namespace pdrlab::streams
