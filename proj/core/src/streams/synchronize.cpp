#include "pdrlab/streams/synchronize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pdrlab/angles.hpp"
#include "pdrlab/classic/madgwick.hpp"
#include "pdrlab/errors.hpp"

namespace pdrlab::streams {

namespace {

constexpr double kNodeEps = 1e-9;  // grid tick counts as "observed" within this of a t_meas

struct Event {
    double t_meas;
    double t_avail;
    std::vector<double> values;
};

// Resample one modality's events onto the grid. Events must be sorted by
// t_meas for the offline policy; the realtime policy ingests them in t_avail
// order and brackets by t_meas among what has arrived.
void resample(const std::vector<Event>& events,
              SyncPolicy policy,
              bool circular,
              const Segment& grid,
              Channel& out) {
    out.data.assign(grid.ticks * static_cast<std::size_t>(out.dim), 0.0);
    out.validity.assign(grid.ticks, Validity::missing);
    if (events.empty()) return;

    std::vector<std::size_t> by_avail(events.size());
    for (std::size_t i = 0; i < by_avail.size(); ++i) by_avail[i] = i;
    if (policy == SyncPolicy::realtime) {
        std::stable_sort(by_avail.begin(), by_avail.end(), [&](std::size_t a, std::size_t b) {
            return events[a].t_avail < events[b].t_avail;
        });
    }

    std::map<double, std::size_t> arrived;  // t_meas -> event index
    std::size_t ingest = 0;
    if (policy == SyncPolicy::offline) {
        for (std::size_t i = 0; i < events.size(); ++i) arrived[events[i].t_meas] = i;
        ingest = events.size();
    }

    for (std::size_t k = 0; k < grid.ticks; ++k) {
        const double t = grid.time_at(k);
        if (policy == SyncPolicy::realtime) {
            while (ingest < by_avail.size() && events[by_avail[ingest]].t_avail <= t) {
                const Event& e = events[by_avail[ingest]];
                arrived[e.t_meas] = by_avail[ingest];
                ++ingest;
            }
        }
        if (arrived.empty()) continue;

        auto right = arrived.lower_bound(t);
        if (right == arrived.end()) {
            // Beyond the newest measurement: flat extension under realtime,
            // missing under offline.
            if (policy == SyncPolicy::realtime) {
                const Event& e = events[arrived.rbegin()->second];
                for (int d = 0; d < out.dim; ++d) out.at(k, d) = e.values[static_cast<std::size_t>(d)];
                out.validity[k] = std::abs(arrived.rbegin()->first - t) <= kNodeEps ? Validity::observed
                                                                                    : Validity::interpolated;
            }
            continue;
        }
        if (std::abs(right->first - t) <= kNodeEps) {
            const Event& e = events[right->second];
            for (int d = 0; d < out.dim; ++d) out.at(k, d) = e.values[static_cast<std::size_t>(d)];
            out.validity[k] = Validity::observed;
            continue;
        }
        if (right == arrived.begin()) continue;  // nothing on the left: missing

        auto left = std::prev(right);
        const Event& a = events[left->second];
        const Event& b = events[right->second];
        const double span = b.t_meas - a.t_meas;
        const double alpha = span > 0.0 ? (t - a.t_meas) / span : 0.0;
        for (int d = 0; d < out.dim; ++d) {
            const double va = a.values[static_cast<std::size_t>(d)];
            const double vb = b.values[static_cast<std::size_t>(d)];
            out.at(k, d) = circular ? lerp_angle(va, vb, alpha) : (1.0 - alpha) * va + alpha * vb;
        }
        out.validity[k] = Validity::interpolated;
    }
}

std::vector<Event> collect(std::span<const std::vector<SensorSample>> streams, Modality m) {
    std::vector<Event> events;
    for (const auto& stream : streams) {
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& s : stream) {
            if (s.t_meas < prev)
                throw DataError("synchronize: stream timestamps are not monotone (t_meas went backwards)");
            prev = s.t_meas;
            if (s.modality != m) continue;
            if (static_cast<int>(s.values.size()) != modality_dim(m))
                throw DataError(std::string("synchronize: bad value count for modality ") + to_string(m));
            events.push_back({s.t_meas, s.t_avail, s.values});
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t_meas < b.t_meas; });
    return events;
}

// Orientation stream: heading samples when supplied, otherwise a Madgwick
// fold over paired gyro+accel events. The derived heading becomes available
// once both inputs have arrived.
std::vector<Event> orientation_events(std::span<const std::vector<SensorSample>> streams,
                                      const std::vector<Event>& gyro,
                                      const std::vector<Event>& accel,
                                      double beta) {
    std::vector<Event> events = collect(streams, Modality::heading);
    if (!events.empty()) return events;
    if (gyro.empty()) return events;

    classic::OrientationState state;
    double prev_t = gyro.front().t_meas;
    std::size_t ai = 0;
    for (const Event& g : gyro) {
        while (ai < accel.size() && accel[ai].t_meas < g.t_meas - 1e-9) ++ai;
        const bool paired = ai < accel.size() && std::abs(accel[ai].t_meas - g.t_meas) <= 1e-9;
        const std::array<double, 3> w{0.0, 0.0, g.values[0]};
        const std::array<double, 3> a =
            paired ? std::array<double, 3>{accel[ai].values[0], accel[ai].values[1], accel[ai].values[2]}
                   : std::array<double, 3>{0.0, 0.0, 0.0};  // zero accel skips the gravity correction
        const double dt = g.t_meas - prev_t;
        if (dt > 0.0) state = classic::madgwick_update(state, w, a, beta, dt);
        prev_t = g.t_meas;
        const double avail = paired ? std::max(g.t_avail, accel[ai].t_avail) : g.t_avail;
        events.push_back({g.t_meas, avail, {classic::yaw_of(state.q)}});
    }
    return events;
}

// Movement direction between consecutive radio fixes. The heading toward the
// next fix is only computable once that fix has arrived, which the
// availability time reflects.
std::vector<Event> radio_heading_events(const std::vector<Event>& radio) {
    std::vector<Event> events;
    if (radio.size() < 2) return events;
    std::vector<std::array<double, 2>> positions(radio.size());
    for (std::size_t i = 0; i < radio.size(); ++i) positions[i] = {radio[i].values[0], radio[i].values[1]};
    const auto headings = radio_heading(positions);
    events.resize(radio.size());
    for (std::size_t i = 0; i < radio.size(); ++i) {
        const double avail = i + 1 < radio.size() ? std::max(radio[i].t_avail, radio[i + 1].t_avail)
                                                  : radio[i].t_avail;
        events[i] = {radio[i].t_meas, avail, {headings[i]}};
    }
    return events;
}

}  // namespace

Segment synchronize(std::span<const std::vector<SensorSample>> streams, const SyncOptions& opts) {
    if (!(opts.fs > 0.0)) throw ConfigError("synchronize: fs must be > 0");

    const auto radio = collect(streams, Modality::radio_pos);
    const auto accel = collect(streams, Modality::accel);
    const auto gyro = collect(streams, Modality::gyro);
    const auto speed = collect(streams, Modality::speed);

    if (radio.empty()) throw DataError("synchronize: missing modality radio_pos");
    if (accel.empty() && gyro.empty() && speed.empty())
        throw DataError("synchronize: missing inertial modalities (accel/gyro/speed)");

    double t_min = radio.front().t_meas;
    double t_max = radio.back().t_meas;
    for (const auto* evs : {&accel, &gyro, &speed}) {
        if (evs->empty()) continue;
        t_min = std::min(t_min, evs->front().t_meas);
        t_max = std::max(t_max, evs->back().t_meas);
    }

    Segment seg;
    seg.id = opts.segment_id;
    seg.fs = opts.fs;
    seg.t0 = std::ceil(t_min * opts.fs - kNodeEps) / opts.fs;
    if (seg.t0 == 0.0) seg.t0 = 0.0;  // normalize -0
    seg.ticks = static_cast<std::size_t>(std::floor((t_max - seg.t0) * opts.fs + kNodeEps)) + 1;

    const auto theta_ori = orientation_events(streams, gyro, accel, opts.madgwick_beta);
    const auto theta_radio = radio_heading_events(radio);

    seg.channels = {
        Channel{"p_radio", 2, {}, {}},
        Channel{"theta_radio", 1, {}, {}},
        Channel{"v", 1, {}, {}},
        Channel{"theta_ori", 1, {}, {}},
        Channel{"acc", 3, {}, {}},
    };
    resample(radio, opts.policy, false, seg, seg.channels[0]);
    resample(theta_radio, opts.policy, true, seg, seg.channels[1]);
    resample(speed, opts.policy, false, seg, seg.channels[2]);
    resample(theta_ori, opts.policy, true, seg, seg.channels[3]);
    resample(accel, opts.policy, false, seg, seg.channels[4]);
    return seg;
}

void attach_reference(Segment& segment, std::span<const ReferencePose> ref) {
    if (ref.empty()) throw DataError("attach_reference: empty reference");
    segment.ref.resize(segment.ticks);
    std::size_t i = 0;
    for (std::size_t k = 0; k < segment.ticks; ++k) {
        const double t = segment.time_at(k);
        while (i + 1 < ref.size() && ref[i + 1].t <= t) ++i;
        ReferencePose p;
        p.t = t;
        if (i + 1 >= ref.size() || t <= ref[i].t) {
            const ReferencePose& r = ref[std::min(i, ref.size() - 1)];
            p.x = r.x;
            p.y = r.y;
            p.speed = r.speed;
            p.heading = r.heading;
            p.cum_distance = r.cum_distance;
        } else {
            const ReferencePose& a = ref[i];
            const ReferencePose& b = ref[i + 1];
            const double alpha = (t - a.t) / (b.t - a.t);
            p.x = (1.0 - alpha) * a.x + alpha * b.x;
            p.y = (1.0 - alpha) * a.y + alpha * b.y;
            p.speed = (1.0 - alpha) * a.speed + alpha * b.speed;
            p.heading = lerp_angle(a.heading, b.heading, alpha);
            p.cum_distance = (1.0 - alpha) * a.cum_distance + alpha * b.cum_distance;
        }
        segment.ref[k] = p;
    }
}

}  // namespace pdrlab::streams
