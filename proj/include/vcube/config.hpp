#pragma once

#include <string>

#include "vcube/assembly.hpp"
#include "vcube/lumi_render.hpp"
#include "vcube/session.hpp"
#include "vcube/synth_world.hpp"
#include "vcube/view_depth.hpp"

namespace vcube {

// Everything one scenario run needs. The defaults reproduce the standard
// desk-scale two-party setup; a JSON config file overrides the defaults and
// command-line flags override the file (defaults < file < flags).
struct ScenarioConfig {
    // Assembly.
    std::string topology = "face_to_face";  // face_to_face | side_by_side | round_table
    int parties = 2;
    double seat_radius = 1.2;  // round_table
    double gap = 0.0;          // face_to_face
    double overlap = 0.4;      // side_by_side
    CubeParams cube;

    // Scene and capture.
    SceneParams scene;
    NoiseModel noise;

    // Per-frame pipeline.
    int input_views = 4;
    DepthParams depth;
    RenderParams render;
    double temporal_w = 0.5;
    int temporal_border = 10;
    int codec_quality = 90;

    // Session timing.
    StageModel stages;
    double duration_s = 10.0;
    double fps = 30.0;
    size_t bytes_per_frame = 10000;

    // Run control.
    int frames = 1;
    Vector3d viewpoint{0.1, 1.25, -0.9};  // receiver-local tracked eye
    uint64_t seed = 1;
    std::string output_dir = "out";
};

// Parses a JSON document (any subset of the schema; missing fields keep their
// defaults). Unknown keys and out-of-range values throw BadConfig.
ScenarioConfig config_from_json(const std::string& text);

// Reads and parses a config file. Throws IoError when unreadable.
ScenarioConfig load_config(const std::string& path);

// Canonical serialization: stable key order, full precision. Satisfies
// parse(serialize(parse(x))) == parse(x).
std::string config_to_json(const ScenarioConfig& c);

// FNV-1a hash of the canonical serialization; stable across runs and
// platforms, used by the run manifest.
uint64_t config_hash(const ScenarioConfig& c);

// Builds the placed-cube layout the config describes (throws BadConfig for an
// unknown topology; layout geometry violations surface via validate_layout).
AssemblyLayout make_layout(const ScenarioConfig& c);

ScheduleOptions make_schedule_options(const ScenarioConfig& c);

}  // namespace vcube
