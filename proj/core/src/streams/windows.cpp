#include "pdrlab/streams/windows.hpp"

#include <cmath>

#include "pdrlab/errors.hpp"

namespace pdrlab::streams {

std::size_t window_stride(std::size_t n_w, double overlap) {
    if (overlap < 0.0 || overlap >= 1.0) throw ConfigError("window overlap must be in [0, 1)");
    const auto stride = std::llround(static_cast<double>(n_w) * (1.0 - overlap));
    return static_cast<std::size_t>(std::max<long long>(1, stride));
}

std::vector<WindowBundle> make_windows(const Segment& segment,
                                       std::size_t n_w,
                                       double overlap,
                                       double horizon_s) {
    if (n_w < 2) throw ConfigError("window length must be >= 2");
    if (horizon_s < 0.0) throw ConfigError("horizon must be >= 0");
    const std::size_t stride = window_stride(n_w, overlap);
    const auto h_ticks = static_cast<std::size_t>(std::llround(horizon_s * segment.fs));

    std::vector<WindowBundle> out;
    if (segment.ticks < n_w + h_ticks) return out;
    const std::size_t span = segment.ticks - n_w - h_ticks;
    const std::size_t count = span / stride + 1;
    out.reserve(count);

    for (std::size_t i = 0; i < count; ++i) {
        WindowBundle w;
        w.segment_id = segment.id;
        w.start_tick = i * stride;
        w.length = n_w;
        w.horizon_s = horizon_s;
        w.target_tick = w.start_tick + n_w - 1 + h_ticks;
        if (segment.has_ref()) {
            w.target = segment.ref[w.target_tick];
            w.has_target = true;
        }
        out.push_back(std::move(w));
    }
    return out;
}

Segment position_deltas(const Segment& segment) {
    Segment out = segment;
    Channel* p = out.find("p_radio");
    if (!p) throw DataError("position_deltas: segment has no p_radio channel");
    const Channel& src = segment.require("p_radio");

    for (std::size_t k = segment.ticks; k-- > 0;) {
        if (k == 0) {
            p->at(0, 0) = 0.0;
            p->at(0, 1) = 0.0;
        } else {
            p->at(k, 0) = src.at(k, 0) - src.at(k - 1, 0);
            p->at(k, 1) = src.at(k, 1) - src.at(k - 1, 1);
            if (src.validity[k] != Validity::missing && src.validity[k - 1] != Validity::missing)
                p->validity[k] = Validity::interpolated;
            else
                p->validity[k] = Validity::missing;
        }
    }
    return out;
}

Segment undo_position_deltas(const Segment& segment, std::array<double, 2> start) {
    Segment out = segment;
    Channel* p = out.find("p_radio");
    if (!p) throw DataError("undo_position_deltas: segment has no p_radio channel");

    double x = start[0], y = start[1];
    for (std::size_t k = 0; k < segment.ticks; ++k) {
        if (k > 0) {
            x += p->at(k, 0);
            y += p->at(k, 1);
        }
        p->at(k, 0) = x;
        p->at(k, 1) = y;
    }
    return out;
}

Eigen::MatrixXd extract_inputs(const Segment& segment,
                               const WindowBundle& window,
                               std::span<const std::string> channels) {
    const int dim = input_dim(segment, channels);
    Eigen::MatrixXd x(window.length, dim);
    for (std::size_t r = 0; r < window.length; ++r) {
        const std::size_t tick = window.start_tick + r;
        int col = 0;
        for (const auto& name : channels) {
            const Channel& c = segment.require(name);
            const bool ok = c.valid(tick);
            for (int d = 0; d < c.dim; ++d) x(static_cast<Eigen::Index>(r), col++) = ok ? c.at(tick, d) : 0.0;
        }
        for (const auto& name : channels)
            x(static_cast<Eigen::Index>(r), col++) = segment.require(name).valid(tick) ? 1.0 : 0.0;
    }
    return x;
}

std::vector<std::string> input_column_names(const Segment& segment, std::span<const std::string> channels) {
    std::vector<std::string> names;
    for (const auto& name : channels) {
        const Channel& c = segment.require(name);
        for (int d = 0; d < c.dim; ++d)
            names.push_back(c.dim == 1 ? name : name + "." + std::to_string(d));
    }
    for (const auto& name : channels) names.push_back("mask:" + name);
    return names;
}

int input_dim(const Segment& segment, std::span<const std::string> channels) {
    if (channels.empty()) throw ConfigError("extract_inputs: empty channel selection");
    int dim = 0;
    for (const auto& name : channels) dim += segment.require(name).dim;
    return dim + static_cast<int>(channels.size());
}

}  // namespace pdrlab::streams
