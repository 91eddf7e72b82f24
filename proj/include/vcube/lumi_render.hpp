#pragma once

#include <vector>

#include "vcube/synth_world.hpp"
#include "vcube/view_depth.hpp"

namespace vcube {

// One input view warped into the virtual view. Color and the warp-success
// mask live at full resolution; the geometry maps that drive blending live on
// the quarter (depth) grid, where the refined depth is native.
struct WarpedView {
    ImageF color;     // full res, 3 channels in [0,1]; black where mask = 0
    ImageU8 mask;     // full res: sample landed on foreground and passed occlusion
    ImageU8 reach;    // full res: sample landed on foreground (occlusion ignored)
    ImageU8 mask_q;   // the mask test evaluated on the quarter grid
    ImageF depth_in;  // quarter: depth of the surface point in the input camera
    ImageD delta_d;   // quarter: depth_in minus virtual-view depth, meters
    ImageD delta_n;   // quarter: angle between the viewpoint directions, radians
};

// Unit direction maps from each surface point toward the two viewpoints, and
// the angle between them.
struct DirectionMaps {
    ImageD to_virtual;  // 3 channels
    ImageD to_input;    // 3 channels
    ImageD angle;       // radians in [0, pi]
};

// Per-view blending weights: raw scores and their softmax on the quarter
// grid, then upsampled to full resolution, masked by per-pixel warp success
// and renormalized so visible views always form a convex combination.
struct BlendWeights {
    std::vector<ImageD> score;  // quarter; -inf where the view is invisible
    std::vector<ImageD> norm;   // quarter; sums to 1 where any view visible
    std::vector<ImageD> full;   // full res; sums to 1 where `visible`
    ImageU8 visible;            // full res: at least one view contributes
};

// Final RGBA portrait. Color is premultiplied by alpha, so fully transparent
// pixels are stored black.
struct PortraitFrame {
    ImageU8 color;  // 1280x960x3, premultiplied
    ImageF alpha;   // 1280x960, [0,1]
    int cube_id = 0;
    uint32_t frame_index = 0;
    Vector3d viewpoint = Vector3d::Zero();  // target viewpoint, global coords
};

// Float predecessor of a PortraitFrame: straight (un-premultiplied) color and
// the alpha matte, both in [0,1]. Temporal smoothing runs on this form before
// anything is quantized to 8 bits.
struct MatteFrame {
    ImageF color;  // 3 channels
    ImageF alpha;  // 1 channel
};

struct RenderParams {
    double lambda_d = 20.0;   // depth-difference penalty, per meter
    double lambda_a = 2.0;    // angular-deviation penalty, per radian
    double occlusion = 0.05;  // warp occlusion tolerance, meters
    int hole_px = 25;         // largest hole area closed by inpainting
};

// Edge-aware 4x upsampling of a quarter-grid depth map under the (4u+2, 4v+2)
// pixel alignment; borders replicate. Invalid (<= 0) samples are excluded,
// and where the contributing samples span more than `discontinuity` meters
// the nearest sample is used instead of a cross-edge blend.
ImageF upsample_depth(const ImageF& quarter, int full_w, int full_h, double discontinuity = 0.05);

// Direction maps for one input viewpoint against the virtual viewpoint, over
// the quarter-grid surface reconstructed from `depth_q`.
DirectionMaps angle_maps(const ImageF& depth_q, const CameraModel& depth_cam,
                         const Vector3d& virtual_vp, const Vector3d& input_vp);

// Backward warp of every input into the virtual view: each full-resolution
// virtual pixel back-projects at the (upsampled) refined depth, lands in the
// input image, and takes a foreground-gated bilinear color sample; the sample
// is rejected when less than half the bilinear weight is on usable pixels or
// when the sampled input depth is more than `occlusion` away from the surface
// point's depth in that camera (the point is hidden in that view).
std::vector<WarpedView> warp_inputs(const std::vector<RgbdFrame>& inputs,
                                    const std::vector<ImageU8>& foreground,
                                    const std::vector<CameraModel>& cams, const ImageF& refined_q,
                                    const VirtualView& vv, double occlusion = 0.05);

// Raw score -lambda_d * max(0, delta_d) - lambda_a * delta_n per view (-inf
// where invisible), softmax across views, bilinear upsampling to full
// resolution. Views that are farther from the surface than the virtual
// camera, or see it from a steeper angle, receive less weight.
BlendWeights blend_scores(const std::vector<WarpedView>& warped, double lambda_d = 20.0,
                          double lambda_a = 2.0);

// Pixel-wise convex combination of the warped colors at full resolution.
ImageF blend(const std::vector<WarpedView>& warped, const BlendWeights& weights);

// Cleanup pass: fills holes (pixels inside the silhouette no view reached) of
// area <= hole_px by 4-neighbor diffusion from their surroundings, builds the
// alpha matte from the covered region (3x3 close, 1 px erode, 5x5 Gaussian
// feather with sigma = 1), and grows color past the covered region so the
// feathered rim never blends toward black.
MatteFrame postprocess_matte(const ImageF& blended, const ImageU8& visible,
                             const ImageU8& silhouette, int hole_px = 25);

// Premultiplies and quantizes a matte to the 8-bit wire form.
PortraitFrame quantize_portrait(const ImageF& color, const ImageF& alpha);

// postprocess_matte followed by quantize_portrait.
PortraitFrame postprocess(const ImageF& blended, const ImageU8& visible,
                          const ImageU8& silhouette, int hole_px = 25);

// Full render for one virtual view: warp, score, blend, postprocess.
PortraitFrame render_portrait(const std::vector<RgbdFrame>& inputs,
                              const std::vector<ImageU8>& foreground,
                              const std::vector<CameraModel>& cams, const ImageF& refined_q,
                              const VirtualView& vv, const RenderParams& params = {});

}  // namespace vcube
