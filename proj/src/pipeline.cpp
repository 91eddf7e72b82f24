#include "vcube/pipeline.hpp"

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "vcube/synth_world.hpp"

namespace vcube {

PortraitPipeline::PortraitPipeline(const ScenarioConfig& config, int cube_id)
    : cfg_(config),
      cube_id_(cube_id),
      spec_(CubeSpec::standard(config.cube)),
      scene_(config.scene) {
    temporal_.w = cfg_.temporal_w;
    temporal_.border_n = cfg_.temporal_border;
    background_.reserve(spec_.cameras.size());
    for (size_t i = 0; i < spec_.cameras.size(); ++i)
        background_.push_back(
            render_background(scene_, spec_.cameras[i], static_cast<int>(i), cfg_.noise));
}

FrameResult PortraitPipeline::process(int frame_index, const Vector3d& viewpoint) {
    using clock = std::chrono::steady_clock;
    auto ms = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
    };
    FrameResult out;

    captures_.clear();
    foreground_.clear();
    for (size_t i = 0; i < spec_.cameras.size(); ++i) {
        auto t0 = clock::now();
        captures_.push_back(
            render_rgbd(scene_, spec_.cameras[i], static_cast<int>(i), frame_index, cfg_.noise));
        auto t1 = clock::now();
        foreground_.push_back(segment_foreground(captures_[i], background_[i]));
        out.timings.capture_ms += ms(t0, t1);
        out.timings.segment_ms += ms(t1, clock::now());
    }

    out.frame_index = frame_index;
    out.view = VirtualView::at(viewpoint, cfg_.cube);
    out.selected = select_input_cameras(spec_, viewpoint, cfg_.input_views);

    auto t_depth = clock::now();
    std::vector<DepthInput> inputs;
    std::vector<RgbdFrame> full_frames;
    std::vector<ImageU8> full_masks;
    std::vector<CameraModel> full_cams;
    for (int id : out.selected) {
        DepthInput in;
        in.color = quarter_color(captures_[id].color);
        in.depth = quarter_depth(captures_[id].depth);
        in.valid = quarter_mask(foreground_[id]);
        in.cam = spec_.cameras[id].quarter();
        inputs.push_back(std::move(in));
        full_frames.push_back(captures_[id]);
        full_masks.push_back(foreground_[id]);
        full_cams.push_back(spec_.cameras[id]);
    }
    out.depth = predict_depth(out.view, inputs, cfg_.depth);
    out.timings.depth_ms = ms(t_depth, clock::now());

    auto t_render = clock::now();
    std::vector<WarpedView> warped = warp_inputs(full_frames, full_masks, full_cams,
                                                 out.depth.refined, out.view,
                                                 cfg_.render.occlusion);
    out.weights = blend_scores(warped, cfg_.render.lambda_d, cfg_.render.lambda_a);
    ImageF blended = blend(warped, out.weights);

    ImageU8 silhouette(out.weights.visible.width(), out.weights.visible.height(), 1, 0);
    for (int y = 0; y < silhouette.height(); ++y)
        for (int x = 0; x < silhouette.width(); ++x)
            for (const WarpedView& wv : warped)
                if (wv.reach.at(x, y)) {
                    silhouette.at(x, y) = 1;
                    break;
                }
    MatteFrame matte =
        postprocess_matte(blended, out.weights.visible, silhouette, cfg_.render.hole_px);
    out.timings.render_ms = ms(t_render, clock::now());

    // Temporal recursion runs in float64 on the straight-alpha matte.
    auto t_temporal = clock::now();
    const int w = matte.color.width(), h = matte.color.height();
    ImageD color_d(w, h, 3), alpha_d(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            alpha_d.at(x, y) = matte.alpha.at(x, y);
            for (int c = 0; c < 3; ++c) color_d.at(x, y, c) = matte.color.at(x, y, c);
        }
    auto [color_s, alpha_s] = smooth_frame(temporal_, color_d, alpha_d);
    out.matte.color = ImageF(w, h, 3);
    out.matte.alpha = ImageF(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            out.matte.alpha.at(x, y) = static_cast<float>(alpha_s.at(x, y));
            for (int c = 0; c < 3; ++c)
                out.matte.color.at(x, y, c) = static_cast<float>(color_s.at(x, y, c));
        }
    out.timings.temporal_ms = ms(t_temporal, clock::now());

    auto t_encode = clock::now();
    out.portrait = quantize_portrait(out.matte.color, out.matte.alpha);
    out.portrait.cube_id = cube_id_;
    out.portrait.frame_index = static_cast<uint32_t>(frame_index);
    out.portrait.viewpoint = viewpoint;  // overwritten with the global eye by callers
    out.wire = encode_portrait(out.portrait, cfg_.codec_quality);
    out.timings.encode_ms = ms(t_encode, clock::now());

    for (const WarpedView& wv : warped) {
        ImageU8 wc(w, h, 3, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c)
                    wc.at(x, y, c) = static_cast<uint8_t>(std::lround(
                        255.0 * std::clamp(static_cast<double>(wv.color.at(x, y, c)), 0.0, 1.0)));
        out.warped_color.push_back(std::move(wc));
        out.warped_mask.push_back(wv.mask);
    }

    out.reference = render_figure_reference(scene_, out.view.full, frame_index);
    return out;
}

MetricReport frame_report(const FrameResult& f) {
    MetricReport r;
    r.first_frame = r.last_frame = f.frame_index;

    const ImageU8& ref_color = f.reference.color;
    const ImageF& ref_depth = f.reference.depth;
    const int w = ref_color.width(), h = ref_color.height();

    ImageU8 fg(w, h, 1, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) fg.at(x, y) = ref_depth.at(x, y) > 0.0f ? 255 : 0;

    r.psnr_full_db = psnr(f.portrait.color, ref_color);
    r.psnr_foreground_db = psnr(f.portrait.color, ref_color, &fg);

    ImageF ref_alpha(w, h, 1, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) ref_alpha.at(x, y) = fg.at(x, y) ? 1.0f : 0.0f;
    r.alpha_mse = alpha_mse(f.portrait.alpha, ref_alpha);

    ImageF ref_depth_q = quarter_depth(ref_depth);
    r.depth_rmse_m = depth_rmse(f.depth.refined, ref_depth_q);

    // Straight-color portrait against the warped inputs, on their own masks.
    ImageU8 straight(w, h, 3, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                straight.at(x, y, c) = static_cast<uint8_t>(std::lround(
                    255.0 *
                    std::clamp(static_cast<double>(f.matte.color.at(x, y, c)), 0.0, 1.0)));
    r.photometric = photometric_discrepancy(straight, f.warped_color, f.warped_mask);

    r.smoothness = smoothness_energy(f.depth.refined);
    return r;
}

std::string run_manifest_json(const ScenarioConfig& c) {
    nlohmann::json j;
    j["pipeline_version"] = kPipelineVersion;
    j["wire_version"] = 1;
    j["seed"] = c.seed;
    char hex[19];
    std::snprintf(hex, sizeof hex, "0x%016llx",
                  static_cast<unsigned long long>(config_hash(c)));
    j["config_hash"] = hex;
    j["config"] = nlohmann::json::parse(config_to_json(c));
    return j.dump(2);
}

}  // namespace vcube
