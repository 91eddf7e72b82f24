#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vcube/synth_world.hpp"

namespace vcube {

// One camera's 2D eye-center detections for one frame. A pixel is absent when
// the camera was flagged occluded, the marker faced away from the camera, or
// the (noisy) projection fell outside the image.
struct EyeObservation {
    int camera_id = -1;
    int frame_index = 0;
    std::optional<Eigen::Vector2d> left, right;  // pixel positions
};

struct Viewpoint {
    Vector3d position = Vector3d::Zero();  // cube-local meters
    int frame_index = 0;
    bool valid = false;
};

// Simulated eye-center detector: projects the true markers into the camera
// and adds Gaussian pixel noise keyed by (seed, camera id, frame index).
EyeObservation observe_eyes(const SyntheticScene& scene, const CameraModel& cam, int camera_id,
                            int frame_index, double detector_noise_px = 0.0,
                            bool occluded = false, uint64_t seed = 1);

// Runs the detector on a whole rig; cams are indexed by camera id. occluded
// may be empty (no occlusions) or one flag per camera.
std::vector<EyeObservation> observe_all(const SyntheticScene& scene,
                                        const std::vector<CameraModel>& cams, int frame_index,
                                        double detector_noise_px = 0.0,
                                        const std::vector<bool>& occluded = {},
                                        uint64_t seed = 1);

// Triangulates each eye from every camera that saw it (homogeneous DLT,
// minimum-singular-vector solution) and returns the midpoint of the two eye
// points. valid=false when either eye has fewer than two observations or the
// solution lands outside the cube volume.
Viewpoint triangulate(const std::vector<EyeObservation>& observations,
                      const std::vector<CameraModel>& cams, const CubeParams& cube = {});

// CSV logging for the 30 Hz viewpoint stream.
inline constexpr const char* kViewpointCsvHeader = "frame,x,y,z,valid";
std::string viewpoint_csv(const Viewpoint& vp);

}  // namespace vcube
