#include "vcube/session.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>

#include "vcube/error.hpp"
#include "vcube/view_depth.hpp"

namespace vcube {

namespace {

// Event queue entry; (time, seq) is a total order, so runs are reproducible.
struct Ev {
    double t;
    uint64_t seq;
    std::function<void()> fn;
};
struct EvAfter {
    bool operator()(const Ev& a, const Ev& b) const {
        return a.t > b.t || (a.t == b.t && a.seq > b.seq);
    }
};

class Simulator {
public:
    Simulator(const AssemblyLayout& layout, const StageModel& st, const ScheduleOptions& opt)
        : layout_(layout), st_(st), opt_(opt) {
        for (const PlacedCube& pc : layout.cubes) free_units_[pc.id] = st.render_units;
        for (const PlacedCube& a : layout.cubes)
            for (const PlacedCube& b : layout.cubes) {
                if (a.id == b.id) continue;
                int idx = static_cast<int>(streams_.size());
                streams_.push_back(Stream{a.id, b.id});
                outgoing_[a.id].push_back(idx);
                // Until the first viewpoint message lands, the sender assumes
                // the receiver sits at its configured eye.
                latest_vp_[{a.id, b.id}] = local_eye(b.id);
            }
    }

    SessionTrace run() {
        double horizon = opt_.duration_s * 1000.0;
        for (const PlacedCube& pc : layout_.cubes) {
            for (int k = 0; k * 1000.0 / opt_.fps < horizon; ++k) {
                double shutter = k * 1000.0 / opt_.fps;
                int cube = pc.id;
                push(shutter + st_.acquisition_ms,
                     [this, cube, k, shutter] { on_available(cube, k, shutter); });
            }
            if (opt_.viewpoint_hz > 0)
                for (int k = 0; k * 1000.0 / opt_.viewpoint_hz < horizon; ++k) {
                    double now = k * 1000.0 / opt_.viewpoint_hz;
                    int cube = pc.id;
                    push(now + opt_.viewpoint_network_ms, [this, cube] { on_viewpoint(cube); });
                }
        }
        while (!q_.empty()) {
            Ev ev = q_.top();
            q_.pop();
            now_ = ev.t;
            ev.fn();
        }
        trace_.duration_ms = horizon;
        return std::move(trace_);
    }

private:
    struct Stream {
        int sender, receiver;
        int pending = -1;
        double pending_shutter = 0, pending_avail = 0;
        double last_start = -std::numeric_limits<double>::infinity();
    };

    Vector3d local_eye(int cube_id) const {
        auto it = opt_.viewpoints.find(cube_id);
        if (it != opt_.viewpoints.end()) return it->second;
        return layout_.cube(cube_id).spec.seat_eye();
    }

    void push(double t, std::function<void()> fn) { q_.push(Ev{t, seq_++, std::move(fn)}); }

    void record(int s, int r, uint32_t frame, const char* stage, double enter, double exit,
                size_t bytes = 0) {
        trace_.events.push_back(StageEvent{s, r, frame, stage, enter, exit, bytes});
    }

    void on_viewpoint(int from_cube) {
        // The tracked eye of `from_cube` arrives at every other sender.
        for (const PlacedCube& pc : layout_.cubes) {
            if (pc.id == from_cube) continue;
            latest_vp_[{pc.id, from_cube}] = local_eye(from_cube);
        }
    }

    void on_available(int cube, int frame, double shutter) {
        for (int idx : outgoing_[cube]) {
            Stream& s = streams_[idx];
            if (s.pending >= 0)
                record(s.sender, s.receiver, s.pending, "dropped", s.pending_avail, now_);
            s.pending = frame;
            s.pending_shutter = shutter;
            s.pending_avail = now_;
            record(s.sender, s.receiver, frame, "acquire", shutter, now_);
        }
        dispatch(cube);
    }

    void dispatch(int cube) {
        while (free_units_[cube] > 0) {
            int best = -1;
            for (int idx : outgoing_[cube]) {
                const Stream& s = streams_[idx];
                if (s.pending < 0) continue;
                if (best < 0 || s.last_start < streams_[best].last_start ||
                    (s.last_start == streams_[best].last_start &&
                     s.receiver < streams_[best].receiver))
                    best = idx;
            }
            if (best < 0) return;
            Stream& s = streams_[best];
            int frame = s.pending;
            double shutter = s.pending_shutter;
            s.pending = -1;
            s.last_start = now_;
            --free_units_[cube];
            // The render consumes the latest received viewpoint; sample it
            // here so staleness semantics stay in one place.
            (void)viewpoint_transfer(layout_, s.sender, s.receiver,
                                     latest_vp_.at({s.sender, s.receiver}));
            double start = now_;
            push(now_ + st_.render_ms, [this, best, frame, shutter, start] {
                on_render_done(best, frame, shutter, start);
            });
        }
    }

    void on_render_done(int idx, int frame, double shutter, double start) {
        Stream& s = streams_[idx];
        record(s.sender, s.receiver, frame, "render", start, now_);
        ++free_units_[s.sender];
        double t0 = now_;
        push(now_ + st_.compress_ms, [this, idx, frame, shutter, t0] {
            Stream& st = streams_[idx];
            record(st.sender, st.receiver, frame, "compress", t0, now_, opt_.bytes_per_frame);
            double t1 = now_;
            push(now_ + st_.network_ms, [this, idx, frame, shutter, t1] {
                Stream& sn = streams_[idx];
                record(sn.sender, sn.receiver, frame, "network", t1, now_, opt_.bytes_per_frame);
                double t2 = now_;
                push(now_ + st_.display_ms, [this, idx, frame, shutter, t2] {
                    Stream& sd = streams_[idx];
                    record(sd.sender, sd.receiver, frame, "display", t2, now_);
                    (void)shutter;
                });
            });
        });
        dispatch(s.sender);
    }

    const AssemblyLayout& layout_;
    StageModel st_;
    ScheduleOptions opt_;
    SessionTrace trace_;
    std::priority_queue<Ev, std::vector<Ev>, EvAfter> q_;
    uint64_t seq_ = 0;
    double now_ = 0;
    std::vector<Stream> streams_;
    std::map<int, std::vector<int>> outgoing_;
    std::map<int, int> free_units_;
    std::map<std::pair<int, int>, Vector3d> latest_vp_;
};

}  // namespace

double SessionTrace::stream_fps(int sender, int receiver) const {
    double first = 0, last = 0;
    long n = 0;
    for (const StageEvent& e : events) {
        if (e.sender != sender || e.receiver != receiver || e.stage != "display") continue;
        if (n == 0) first = e.t_exit;
        last = e.t_exit;
        ++n;
    }
    if (n < 2) return 0.0;
    return 1000.0 * (n - 1) / (last - first);
}

double SessionTrace::mean_latency_ms(int sender, int receiver) const {
    std::map<uint32_t, double> shutter;
    double sum = 0;
    long n = 0;
    for (const StageEvent& e : events) {
        if (e.sender != sender || e.receiver != receiver) continue;
        if (e.stage == "acquire") shutter[e.frame] = e.t_enter;
        if (e.stage == "display") {
            sum += e.t_exit - shutter.at(e.frame);
            ++n;
        }
    }
    return n ? sum / n : 0.0;
}

long SessionTrace::completed(int sender, int receiver) const {
    long n = 0;
    for (const StageEvent& e : events)
        n += e.sender == sender && e.receiver == receiver && e.stage == "display";
    return n;
}

long SessionTrace::dropped(int sender, int receiver) const {
    long n = 0;
    for (const StageEvent& e : events)
        n += e.sender == sender && e.receiver == receiver && e.stage == "dropped";
    return n;
}

SessionTrace schedule(const AssemblyLayout& layout, const StageModel& stages,
                      const ScheduleOptions& options) {
    auto violations = validate_layout(layout);
    if (!violations.empty())
        throw InvalidLayout("layout rejected: " + violations.front().rule + ": " +
                            violations.front().detail);
    if (layout.cubes.size() < 2) throw InvalidLayout("a session needs at least two cubes");
    return Simulator(layout, stages, options).run();
}

double bitrate(const SessionTrace& trace, int sender, int receiver) {
    if (trace.duration_ms < 1000.0)
        throw InsufficientData("trace shorter than one second");
    double bits = 0;
    long frames = 0;
    for (const StageEvent& e : trace.events) {
        if (e.sender != sender || e.receiver != receiver || e.stage != "compress") continue;
        bits += 8.0 * e.bytes;
        ++frames;
    }
    if (frames == 0) throw InsufficientData("stream sent no frames");
    return bits / (trace.duration_ms / 1000.0);
}

CompositeResult composite(const AssemblyLayout& layout, int receiver_id,
                          const std::map<int, PortraitFrame>& portraits,
                          const ImageU8& background, const Vector3d& viewpoint_receiver_local) {
    const PlacedCube& recv = layout.cube(receiver_id);
    CompositeResult out;
    for (int s = 0; s < 3; ++s) {
        const ScreenRect& scr = recv.spec.screen(s);
        if (background.width() != scr.res_x || background.height() != scr.res_y ||
            background.channels() != 3)
            throw DimensionMismatch("background must match the screen resolution");
        out.screens[s] = background;
    }

    for (const PlacedCube& pc : layout.cubes) {
        if (pc.id == receiver_id) continue;
        auto it = portraits.find(pc.id);
        if (it == portraits.end()) {
            out.missing.push_back(pc.id);
            continue;
        }
        const PortraitFrame& pf = it->second;
        // Portrait camera: at the viewpoint the frame was rendered for
        // (recorded in global coordinates), aimed at the sender's seat eye.
        Vector3d vp_sender = global_to_cube(layout, pc.id, pf.viewpoint);
        CameraModel pcam = VirtualView::at(vp_sender, pc.spec.params).full;
        Vector3d plane_p = pc.spec.seat_eye();
        Vector3d plane_n = pcam.optical_axis();
        const Matrix3d& R = pcam.extrinsics.R;
        const Vector3d& t = pcam.extrinsics.t;

        RigidTransform recv_to_global = recv.to_global;
        RigidTransform global_to_sender = pc.to_global.inverse();
        Vector3d o_recv = viewpoint_receiver_local;
        Vector3d o_sender =
            global_to_sender.apply(recv_to_global.apply(o_recv));

        for (int s = 0; s < 3; ++s) {
            const ScreenRect& scr = recv.spec.screen(s);
            ImageU8& img = out.screens[s];
            for (int py = 0; py < scr.res_y; ++py)
                for (int px = 0; px < scr.res_x; ++px) {
                    Vector3d x_scr = scr.point_at(px + 0.5, py + 0.5);
                    Vector3d d = global_to_sender.rotate(
                        recv_to_global.rotate(x_scr - o_recv));
                    double denom = plane_n.dot(d);
                    if (std::abs(denom) < 1e-12) continue;
                    double tt = plane_n.dot(plane_p - o_sender) / denom;
                    if (tt <= 1e-9) continue;
                    Vector3d Q = o_sender + tt * d;
                    Vector3d pc_cam = R * Q + t;
                    if (pc_cam.z() <= 1e-9) continue;
                    double u = pcam.fx * pc_cam.x() / pc_cam.z() + pcam.cx;
                    double v = pcam.fy * pc_cam.y() / pc_cam.z() + pcam.cy;
                    int x0 = static_cast<int>(std::floor(u)), y0 = static_cast<int>(std::floor(v));
                    if (x0 < -1 || y0 < -1 || x0 > pf.color.width() - 1 ||
                        y0 > pf.color.height() - 1)
                        continue;
                    double fu = u - x0, fv = v - y0;
                    double w[4] = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
                    int xs[4] = {x0, x0 + 1, x0, x0 + 1}, ys[4] = {y0, y0, y0 + 1, y0 + 1};
                    double rr = 0, gg = 0, bb = 0, aa = 0;
                    for (int k = 0; k < 4; ++k) {
                        int xx = xs[k], yy = ys[k];
                        if (xx < 0 || yy < 0 || xx >= pf.color.width() || yy >= pf.color.height())
                            continue;  // off-portrait neighbors are transparent
                        rr += w[k] * pf.color.at(xx, yy, 0);
                        gg += w[k] * pf.color.at(xx, yy, 1);
                        bb += w[k] * pf.color.at(xx, yy, 2);
                        aa += w[k] * pf.alpha.at(xx, yy);
                    }
                    if (aa <= 0.0) continue;
                    // Premultiplied source over opaque background.
                    double inv = 1.0 - std::min(1.0, aa);
                    img.at(px, py, 0) =
                        static_cast<uint8_t>(std::lround(std::min(255.0, rr + inv * img.at(px, py, 0))));
                    img.at(px, py, 1) =
                        static_cast<uint8_t>(std::lround(std::min(255.0, gg + inv * img.at(px, py, 1))));
                    img.at(px, py, 2) =
                        static_cast<uint8_t>(std::lround(std::min(255.0, bb + inv * img.at(px, py, 2))));
                }
        }
        out.composited.push_back(pc.id);
    }
    return out;
}

void write_trace_jsonl(const std::string& path, const SessionTrace& trace) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    for (const StageEvent& e : trace.events) {
        nlohmann::json j{{"sender", e.sender},   {"receiver", e.receiver}, {"frame", e.frame},
                         {"stage", e.stage},     {"t_enter_ms", e.t_enter}, {"t_exit_ms", e.t_exit},
                         {"bytes", e.bytes}};
        f << j.dump() << '\n';
    }
}

void write_trace_summary(const std::string& path, const SessionTrace& trace) {
    std::map<std::pair<int, int>, bool> seen;
    for (const StageEvent& e : trace.events) seen[{e.sender, e.receiver}] = true;
    nlohmann::json streams = nlohmann::json::array();
    for (auto& [key, _] : seen) {
        auto [s, r] = key;
        nlohmann::json j{{"sender", s},
                         {"receiver", r},
                         {"fps", trace.stream_fps(s, r)},
                         {"mean_latency_ms", trace.mean_latency_ms(s, r)},
                         {"completed", trace.completed(s, r)},
                         {"dropped", trace.dropped(s, r)}};
        try {
            j["bitrate_bps"] = bitrate(trace, s, r);
        } catch (const InsufficientData&) {
            j["bitrate_bps"] = nullptr;
        }
        streams.push_back(j);
    }
    nlohmann::json doc{{"duration_ms", trace.duration_ms}, {"streams", streams}};
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    f << doc.dump(2) << '\n';
}

}  // namespace vcube
