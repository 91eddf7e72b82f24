#pragma once

#include <vector>

#include "vcube/assembly.hpp"
#include "vcube/raster.hpp"

namespace vcube {

// Target of portrait synthesis: a pinhole camera at the transferred remote
// viewpoint with the standard portrait intrinsics, plus its quarter-scale twin
// used by the depth stage.
struct VirtualView {
    CameraModel full;       // 1280x960
    CameraModel depth_cam;  // 320x240, exactly 1/4 per side

    static VirtualView at(const Vector3d& viewpoint, const CubeParams& cube = {});
};

// One contributing capture, already decimated to quarter resolution: pixel
// (u,v) here corresponds to full-resolution pixel (4u+2, 4v+2).
struct DepthInput {
    ImageU8 color;   // quarter RGB
    ImageF depth;    // quarter depth, 0 = invalid
    ImageU8 valid;   // 0/1 usable-pixel mask (e.g. foreground); empty = all usable
    CameraModel cam; // quarter intrinsics
};

ImageU8 quarter_color(const ImageU8& full);
ImageF quarter_depth(const ImageF& full);
ImageU8 quarter_mask(const ImageU8& full);

// Per-input-view depth maps rasterized into the virtual depth camera, with
// visibility masks (mask(x)=1 iff depth(x)>0).
struct ProjectedDepthSet {
    std::vector<ImageF> depth;
    std::vector<ImageU8> mask;
};

// Spatially-varying depth hypotheses anchored to the fused initial depth:
// slice k adds offset sigma_k, uniform over [-delta_d, +delta_d].
struct HypothesisSet {
    ImageF initial;  // fused depth, dense
    double delta_d = 0.05;
    int count = 16;

    double sigma(int k) const {
        return -delta_d + 2.0 * delta_d * k / (count - 1);
    }
    double at(int x, int y, int k) const { return initial.at(x, y) + sigma(k); }
};

// H x W x N scalar grid used for both costs (variance units, +inf = undefined)
// and probabilities.
struct Volume {
    int width = 0, height = 0, count = 0;
    std::vector<ImageD> slices;  // one W x H plane per hypothesis

    Volume() = default;
    Volume(int w, int h, int n, double fill = 0.0)
        : width(w), height(h), count(n), slices(n, ImageD(w, h, 1, fill)) {}
    double at(int x, int y, int k) const { return slices[k].at(x, y); }
    double& at(int x, int y, int k) { return slices[k].at(x, y); }
};
using CostVolume = Volume;
using ProbabilityVolume = Volume;

// Raw float32 container with a 16-byte header (magic "VCVL", u32 H, W, N
// little-endian) for offline inspection of cost/probability volumes.
void write_volume(const std::string& path, const Volume& v);
Volume read_volume(const std::string& path);

// Depth-stage knobs (quarter resolution throughout).
struct DepthParams {
    double delta_d = 0.05;        // hypothesis half-range, meters
    int hypotheses = 16;
    double tau = 0.05;            // softmin temperature, variance units
    double discontinuity = 0.05;  // per-view mesh edge-culling threshold, meters
};

// Lifts a (quarter) depth map to a triangle mesh in the camera frame: one
// vertex per valid pixel, two triangles per fully-valid 2x2 quad; triangles
// spanning a depth jump larger than discontinuity_thresh are culled. Throws
// EmptyDepth when no triangle survives.
TriMesh build_per_view_mesh(const ImageF& depth, const CameraModel& cam,
                            double discontinuity_thresh = 0.05);

// Rasterizes one per-view mesh (camera-frame vertices of input_cam) into the
// virtual depth camera.
ImageF project_view_mesh(const TriMesh& mesh_cam, const CameraModel& input_cam,
                         const CameraModel& virtual_cam);

// Meshes and projects every input; views whose depth lifts to an empty mesh
// are skipped. Throws EmptyDepth when no view contributes.
ProjectedDepthSet project_depth_set(const std::vector<DepthInput>& inputs,
                                    const CameraModel& virtual_cam, double discontinuity_thresh);

// Visibility-weighted mean of the projected depths; union mask out. Pixels no
// view reaches are filled by iterative 4-neighbor diffusion (at most 64
// sweeps), any remainder with the mean valid depth.
ImageF fuse_initial_depth(const ProjectedDepthSet& projected, ImageU8* union_mask = nullptr);

// C=5 feature channels: RGB normalized to [0,1], then |Sobel-x| and |Sobel-y|
// of luma (halved, so edges weigh comparably to color), the gradient channels
// box-smoothed 3x3. Borders replicate.
ImageD extract_features(const ImageU8& color);
inline constexpr int kFeatureChannels = 5;

// Per-pixel, per-hypothesis sum over channels of the across-view population
// variance of bilinearly-sampled features. A view contributes only where the
// sample's four bilinear neighbors are inside the image and marked usable.
// Fewer than two contributing views gives cost +inf. Each slice is then
// smoothed by a 5x5 box filter over finite entries (+inf pixels stay +inf).
// Throws TooFewViews when fewer than two views are supplied.
CostVolume build_cost_volume(const std::vector<ImageD>& features,
                             const std::vector<CameraModel>& cams,
                             const std::vector<ImageU8>& valid_masks,
                             const HypothesisSet& hyp, const CameraModel& virtual_cam);

// Temperature softmin over hypotheses; +inf costs contribute zero weight and
// all-+inf pixels fall back to the uniform distribution.
ProbabilityVolume cost_to_probability(const CostVolume& v, double tau = 0.05);

// Probability-weighted expectation over hypotheses, clamped per pixel to the
// hypothesis range.
ImageF expected_depth(const ProbabilityVolume& p, const HypothesisSet& hyp);

// Full depth stage: mesh -> project -> fuse -> features -> cost -> softmin ->
// expectation.
struct DepthPrediction {
    ImageF initial;   // fused depth before refinement
    ImageF refined;
    ImageU8 coverage; // union visibility mask
};
DepthPrediction predict_depth(const VirtualView& view, const std::vector<DepthInput>& inputs,
                              const DepthParams& params = {});

}  // namespace vcube
