#pragma once

#include <array>

#include "vcube/assembly.hpp"
#include "vcube/raster.hpp"

namespace vcube {

// Capture noise. Depth gets additive Gaussian noise plus dropout-to-invalid;
// color gets per-channel Gaussian noise. Streams are keyed by
// (seed, camera id, frame index) so captures are reproducible in any order.
struct NoiseModel {
    double depth_std = 0.02;   // meters
    double dropout = 0.002;     // probability a valid depth pixel becomes 0
    double color_std = 2.0;    // 8-bit gray levels
    double extrinsic_rot_mrad = 0.0;  // camera mounting error, fixed per (seed, camera)
    double extrinsic_trans_mm = 0.0;
    uint64_t seed = 1;
};

struct RgbdFrame {
    ImageU8 color;  // 1280x960x3
    ImageF depth;   // meters; 0.0 marks invalid
    int camera_id = 0;
    int frame_index = 0;
    double timestamp_ms = 0.0;
};

// Knobs for the procedural seated figure. The albedo is an aperiodic 3D cell
// pattern (random light/dark per cell) modulated by a vertical color ramp;
// amplitude 0 leaves only the smooth ramp.
struct SceneParams {
    double texture_amp = 0.5;     // cell contrast as a fraction of full scale
    double texture_cell = 0.035;  // texture cell edge, meters
    double ramp = 0.30;          // vertical brightness ramp, fraction per meter
    double tessellation = 1.0;   // multiplier on angular mesh resolution
    double eye_separation = 0.07;
    double marker_radius = 0.008;
    double anim_amplitude = 0.03;  // sway amplitude, meters
    double backdrop_depth = 2.0;   // z of the back wall
    double backdrop_width = 1.6;
};

// Analytic description of the posed figure for one frame. Test oracles
// ray-cast these primitives directly.
struct PartSet {
    RigidTransform head_pose;  // head-local (origin at sphere center) -> cube-local
    double head_radius = 0.0;
    RigidTransform torso_pose;
    Vector3d torso_semi;
    std::array<Vector3d, 2> arm_a, arm_b;  // posed capsule endpoints
    double arm_radius = 0.0;
    std::array<Vector3d, 2> markers;         // cube-local marker points on the head
    std::array<Vector3d, 2> marker_normals;  // outward disc normals
    double marker_radius = 0.0;
    double marker_lift = 0.0;  // discs render this far along the normal
};

// Seated figure at the standard seat with a deterministic sway/nod animation.
// All geometry is cube-local.
class SyntheticScene {
public:
    explicit SyntheticScene(SceneParams params = {});

    const SceneParams& params() const { return params_; }
    PartSet parts(int frame) const;
    std::array<Vector3d, 2> eye_markers(int frame) const { return parts(frame).markers; }

    TriMesh figure_mesh(int frame) const;
    TriMesh backdrop_mesh() const;

    // All figure geometry above table height stays inside the cube footprint.
    bool figure_inside(const CubeParams& cube, int frame) const;

private:
    SceneParams params_;
};

// Renders one camera's RGBD capture of the scene (figure plus backdrop) and
// applies the noise model. Uncovered pixels get the backdrop clear color and
// invalid (0) depth.
RgbdFrame render_rgbd(const SyntheticScene& scene, const CameraModel& cam, int camera_id,
                      int frame_index, const NoiseModel& noise);

// The same capture without the figure, as taken before the user enters.
RgbdFrame render_background(const SyntheticScene& scene, const CameraModel& cam, int camera_id,
                            const NoiseModel& noise);

// Noise-free render of the figure alone under the studio lighting: ground
// truth for portrait quality metrics. Pixels off the figure are black with
// depth 0, so (depth > 0) doubles as the reference alpha.
RgbdFrame render_figure_reference(const SyntheticScene& scene, const CameraModel& cam,
                                  int frame_index);

// Per-pixel foreground test against the empty-room capture: depth difference
// beyond depth_thresh (only where both depths are valid) or BT.601 gray
// difference beyond color_thresh. Returns 255/0 mask.
ImageU8 segment_foreground(const RgbdFrame& frame, const RgbdFrame& background,
                           double depth_thresh = 0.10, double color_thresh = 30.0);

// BT.601 integer luma of an 8-bit RGB triplet.
int bt601_gray(uint8_t r, uint8_t g, uint8_t b);

}  // namespace vcube
