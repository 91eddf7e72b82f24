#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "vcube/assembly.hpp"
#include "vcube/lumi_render.hpp"

namespace vcube {

// Per-stage processing model of one conference pipeline. Only rendering
// contends for resources (render_units per cube); the other stages are pure
// delays that overlap freely.
struct StageModel {
    double acquisition_ms = 60.0;
    double render_ms = 40.0;
    double compress_ms = 30.0;
    double network_ms = 100.0;
    double display_ms = 40.0;
    int render_units = 2;

    double total_ms() const {
        return acquisition_ms + render_ms + compress_ms + network_ms + display_ms;
    }
};

// Simulation inputs that are not stage latencies.
struct ScheduleOptions {
    double duration_s = 10.0;
    double fps = 30.0;                   // camera shutter rate per cube
    double viewpoint_hz = 30.0;          // tracked-viewpoint send rate
    double viewpoint_network_ms = 100.0; // latency of the viewpoint channel
    size_t bytes_per_frame = 10000;      // modeled wire size, for bitrate accounting
    std::map<int, Vector3d> viewpoints;  // per-cube local eye; default seat_eye
};

// One stage traversal of one frame on one (sender, receiver) stream. Stage is
// "acquire", "render", "compress", "network", "display", or "dropped" (the
// frame was superseded before its render started).
struct StageEvent {
    int sender = -1;
    int receiver = -1;
    uint32_t frame = 0;
    std::string stage;
    double t_enter = 0.0;
    double t_exit = 0.0;
    size_t bytes = 0;
};

struct SessionTrace {
    double duration_ms = 0.0;
    std::vector<StageEvent> events;  // chronological by stage completion

    // Steady-state display rate: (n-1) / span of display completions.
    double stream_fps(int sender, int receiver) const;
    // Mean shutter-to-display latency over completed frames.
    double mean_latency_ms(int sender, int receiver) const;
    long completed(int sender, int receiver) const;
    long dropped(int sender, int receiver) const;
};

// Discrete-event simulation of the conference: every cube shutters at
// options.fps; each outgoing stream renders its newest pending frame when a
// render unit frees (older pending frames are dropped and recorded); units go
// to the stream that has waited longest, ties to the lowest receiver id.
// Compress, network, and display stages follow as pure delays. The viewpoint
// channel runs beside the frames at viewpoint_hz with its own latency, and
// renders always consume the latest arrived viewpoint.
// Throws InvalidLayout when the layout fails validate_layout.
SessionTrace schedule(const AssemblyLayout& layout, const StageModel& stages,
                      const ScheduleOptions& options = {});

// Wire bits per second of one stream: compressed bytes sent over the trace
// duration. Throws InsufficientData when the trace is shorter than one
// second or the stream never sent a frame.
double bitrate(const SessionTrace& trace, int sender, int receiver);

// Final on-screen assembly for one receiver: each remote portrait is mapped
// onto the receiver's three screens by intersecting every screen pixel's
// sight ray (receiver viewpoint through the physical pixel) with the
// sender-local portrait plane (through the sender's seat eye, facing the
// portrait camera) and sampling the portrait there; alpha-over onto the
// background.
struct CompositeResult {
    std::array<ImageU8, 3> screens;  // front, left, right
    std::vector<int> composited;     // remote cube ids drawn
    std::vector<int> missing;        // remote cube ids with no portrait
};
CompositeResult composite(const AssemblyLayout& layout, int receiver_id,
                          const std::map<int, PortraitFrame>& portraits,
                          const ImageU8& background, const Vector3d& viewpoint_receiver_local);

// Trace export: one JSON object per stage event (JSON lines), and a summary
// document with per-stream fps, latency, drop counts, and bitrate.
void write_trace_jsonl(const std::string& path, const SessionTrace& trace);
void write_trace_summary(const std::string& path, const SessionTrace& trace);

}  // namespace vcube
