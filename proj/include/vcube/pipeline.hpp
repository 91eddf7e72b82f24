#pragma once

#include <string>
#include <vector>

#include "vcube/codec.hpp"
#include "vcube/config.hpp"
#include "vcube/lumi_render.hpp"
#include "vcube/metrics.hpp"
#include "vcube/temporal.hpp"

namespace vcube {

inline constexpr const char* kPipelineVersion = "1.0";

// Wall-clock cost of each pipeline stage for one frame, in milliseconds.
struct StageTimings {
    double capture_ms = 0.0;
    double segment_ms = 0.0;
    double depth_ms = 0.0;
    double render_ms = 0.0;
    double temporal_ms = 0.0;
    double encode_ms = 0.0;
};

// Everything produced for one frame of one outgoing portrait stream.
struct FrameResult {
    int frame_index = 0;
    std::vector<int> selected;  // input camera ids used, best match first
    VirtualView view;
    DepthPrediction depth;  // quarter-resolution initial and refined maps
    BlendWeights weights;
    std::vector<ImageU8> warped_color;  // per selected view, virtual frame
    std::vector<ImageU8> warped_mask;
    MatteFrame matte;        // after temporal smoothing, straight alpha
    PortraitFrame portrait;  // quantized and premultiplied
    WireFrame wire;          // encoded portrait
    RgbdFrame reference;     // clean figure-only render from the same view
    StageTimings timings;
};

// Sender-side portrait pipeline for one cube: captures the synthetic scene
// with the configured noise, segments the figure against the empty-room
// captures, predicts depth at the requested viewpoint, renders, temporally
// smooths, and encodes the portrait. The instance owns the temporal history,
// so feed it consecutive frames of a single stream.
class PortraitPipeline {
public:
    explicit PortraitPipeline(const ScenarioConfig& config, int cube_id = 0);

    // `viewpoint` is sender-cube-local (already transferred when it came from
    // a remote receiver).
    FrameResult process(int frame_index, const Vector3d& viewpoint);

    const CubeSpec& spec() const { return spec_; }
    const SyntheticScene& scene() const { return scene_; }
    // Captures and masks of the most recent process() call, indexed by camera.
    const std::vector<RgbdFrame>& captures() const { return captures_; }
    const std::vector<ImageU8>& foreground() const { return foreground_; }

private:
    ScenarioConfig cfg_;
    int cube_id_ = 0;
    CubeSpec spec_;
    SyntheticScene scene_;
    std::vector<RgbdFrame> background_;
    TemporalState temporal_;
    std::vector<RgbdFrame> captures_;
    std::vector<ImageU8> foreground_;
};

// Compares a frame's portrait against its clean reference render: PSNR (full
// frame and foreground), alpha MSE, foreground depth RMSE, photometric
// discrepancy of the portrait against the warped inputs, and depth smoothness.
MetricReport frame_report(const FrameResult& f);

// Run manifest: pipeline/wire versions, seed, config hash, and the full
// canonical config. Written next to every run's outputs so a rerun can be
// verified byte for byte.
std::string run_manifest_json(const ScenarioConfig& c);

}  // namespace vcube
