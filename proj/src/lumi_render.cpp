#include "vcube/lumi_render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace vcube {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quarter pixel (u,v) sees the same ray as full pixel (4u+2, 4v+2).
inline double full_to_quarter(int full_coord) { return (full_coord - 2) / 4.0; }

struct Sample {
    bool reach = false;  // enough foreground support for a bilinear sample
    bool ok = false;     // reach and the occlusion test passed
    double r = 0, g = 0, b = 0;
};

// Foreground-gated bilinear sample of one input frame at continuous pixel
// coordinates. A neighbor participates only when it is inside the image,
// segmented as foreground, and carries a valid depth; the sample needs at
// least half the bilinear weight on participating neighbors. `z_expected` is
// the surface point's depth in this camera, against which the sampled input
// depth is tested for occlusion.
Sample sample_input(const ImageU8& color, const ImageF& depth, const ImageU8& fg, double px,
                    double py, double z_expected, double occlusion) {
    Sample s;
    int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
    double fx = px - x0, fy = py - y0;
    double w[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    double sw = 0, sr = 0, sg = 0, sb = 0, sd = 0;
    for (int k = 0; k < 4; ++k) {
        if (w[k] <= 0.0) continue;
        int x = xs[k], y = ys[k];
        if (x < 0 || y < 0 || x >= color.width() || y >= color.height()) continue;
        if (!fg.at(x, y) || depth.at(x, y) <= 0.0f) continue;
        sw += w[k];
        sr += w[k] * color.at(x, y, 0);
        sg += w[k] * color.at(x, y, 1);
        sb += w[k] * color.at(x, y, 2);
        sd += w[k] * depth.at(x, y);
    }
    if (sw < 0.5) return s;
    s.reach = true;
    s.r = sr / (sw * 255.0);
    s.g = sg / (sw * 255.0);
    s.b = sb / (sw * 255.0);
    s.ok = std::abs(sd / sw - z_expected) <= occlusion;
    return s;
}

ImageU8 dilate3(const ImageU8& in) {
    ImageU8 out(in.width(), in.height(), 1, 0);
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) {
            uint8_t v = 0;
            for (int dy = -1; dy <= 1 && !v; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= in.width() || ny >= in.height()) continue;
                    if (in.at(nx, ny)) {
                        v = 1;
                        break;
                    }
                }
            out.at(x, y) = v;
        }
    return out;
}

ImageU8 erode3(const ImageU8& in) {
    ImageU8 out(in.width(), in.height(), 1, 0);
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x) {
            uint8_t v = 1;
            for (int dy = -1; dy <= 1 && v; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= in.width() || ny >= in.height() ||
                        !in.at(nx, ny)) {
                        v = 0;
                        break;
                    }
                }
            out.at(x, y) = v;
        }
    return out;
}

}  // namespace

ImageF upsample_depth(const ImageF& quarter, int full_w, int full_h, double discontinuity) {
    // Bilinear on smooth surfaces, but never blend across a depth edge or
    // with invalid samples: an interpolated value between two surfaces lies
    // in empty space and every downstream occlusion test would reject it.
    // Where the contributing quads disagree by more than `discontinuity`,
    // the dominant (highest-weight) sample wins instead.
    ImageF out(full_w, full_h);
    int qw = quarter.width(), qh = quarter.height();
    for (int y = 0; y < full_h; ++y) {
        double v = std::clamp(full_to_quarter(y), 0.0, qh - 1.0);
        int v0 = std::min(static_cast<int>(v), qh - 2);
        double fv = v - v0;
        for (int x = 0; x < full_w; ++x) {
            double u = std::clamp(full_to_quarter(x), 0.0, qw - 1.0);
            int u0 = std::min(static_cast<int>(u), qw - 2);
            double fu = u - u0;
            const double w[4] = {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv};
            const double d[4] = {quarter.at(u0, v0), quarter.at(u0 + 1, v0),
                                 quarter.at(u0, v0 + 1), quarter.at(u0 + 1, v0 + 1)};
            double sw = 0, sd = 0, lo = kInf, hi = -kInf;
            double best_w = -1, best_d = 0;
            for (int k = 0; k < 4; ++k) {
                if (d[k] <= 0.0) continue;
                sw += w[k];
                sd += w[k] * d[k];
                lo = std::min(lo, d[k]);
                hi = std::max(hi, d[k]);
                if (w[k] > best_w) {
                    best_w = w[k];
                    best_d = d[k];
                }
            }
            double val = 0.0;
            if (sw > 0.0) val = (hi - lo <= discontinuity) ? sd / sw : best_d;
            out.at(x, y) = static_cast<float>(val);
        }
    }
    return out;
}

DirectionMaps angle_maps(const ImageF& depth_q, const CameraModel& depth_cam,
                         const Vector3d& virtual_vp, const Vector3d& input_vp) {
    int w = depth_q.width(), h = depth_q.height();
    DirectionMaps m{ImageD(w, h, 3), ImageD(w, h, 3), ImageD(w, h, 1)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double d = depth_q.at(x, y);
            if (d <= 0.0) continue;
            Vector3d p = depth_cam.unproject(Vector2d(x, y), d);
            Vector3d n = (virtual_vp - p).normalized();
            Vector3d ni = (input_vp - p).normalized();
            for (int c = 0; c < 3; ++c) {
                m.to_virtual.at(x, y, c) = n[c];
                m.to_input.at(x, y, c) = ni[c];
            }
            m.angle.at(x, y) = std::acos(std::clamp(n.dot(ni), -1.0, 1.0));
        }
    return m;
}

std::vector<WarpedView> warp_inputs(const std::vector<RgbdFrame>& inputs,
                                    const std::vector<ImageU8>& foreground,
                                    const std::vector<CameraModel>& cams, const ImageF& refined_q,
                                    const VirtualView& vv, double occlusion) {
    const int fw = vv.full.width, fh = vv.full.height;
    const int qw = vv.depth_cam.width, qh = vv.depth_cam.height;
    ImageF depth_full = upsample_depth(refined_q, fw, fh);
    Vector3d virtual_vp = vv.full.center();

    std::vector<WarpedView> out(inputs.size());
    for (size_t i = 0; i < inputs.size(); ++i) {
        const CameraModel& cam = cams[i];
        // Hot loop: project with the extrinsics directly instead of
        // CameraModel::project, whose behind-camera throw we handle inline.
        const Matrix3d R = cam.extrinsics.R;
        const Vector3d t = cam.extrinsics.t;
        Vector3d input_vp = cam.center();

        WarpedView wv;
        wv.color = ImageF(fw, fh, 3, 0.0f);
        wv.mask = ImageU8(fw, fh, 1, 0);
        wv.reach = ImageU8(fw, fh, 1, 0);
        wv.mask_q = ImageU8(qw, qh, 1, 0);
        wv.depth_in = ImageF(qw, qh, 1, 0.0f);
        wv.delta_d = ImageD(qw, qh, 1, 0.0);
        wv.delta_n = ImageD(qw, qh, 1, 0.0);

        for (int y = 0; y < fh; ++y)
            for (int x = 0; x < fw; ++x) {
                double d = depth_full.at(x, y);
                if (d <= 0.0) continue;
                Vector3d p = vv.full.unproject(Vector2d(x, y), d);
                Vector3d pc = R * p + t;
                if (pc.z() <= 1e-9) continue;
                double px = cam.fx * pc.x() / pc.z() + cam.cx;
                double py = cam.fy * pc.y() / pc.z() + cam.cy;
                Sample s = sample_input(inputs[i].color, inputs[i].depth, foreground[i], px, py,
                                        pc.z(), occlusion);
                if (!s.reach) continue;
                wv.reach.at(x, y) = 1;
                if (!s.ok) continue;
                wv.mask.at(x, y) = 1;
                wv.color.at(x, y, 0) = static_cast<float>(s.r);
                wv.color.at(x, y, 1) = static_cast<float>(s.g);
                wv.color.at(x, y, 2) = static_cast<float>(s.b);
            }

        DirectionMaps dir = angle_maps(refined_q, vv.depth_cam, virtual_vp, input_vp);
        for (int y = 0; y < qh; ++y)
            for (int x = 0; x < qw; ++x) {
                double d = refined_q.at(x, y);
                if (d <= 0.0) continue;
                Vector3d p = vv.depth_cam.unproject(Vector2d(x, y), d);
                Vector3d pc = R * p + t;
                if (pc.z() <= 1e-9) continue;
                double px = cam.fx * pc.x() / pc.z() + cam.cx;
                double py = cam.fy * pc.y() / pc.z() + cam.cy;
                Sample s = sample_input(inputs[i].color, inputs[i].depth, foreground[i], px, py,
                                        pc.z(), occlusion);
                if (!s.ok) continue;
                wv.mask_q.at(x, y) = 1;
                wv.depth_in.at(x, y) = static_cast<float>(pc.z());
                wv.delta_d.at(x, y) = pc.z() - d;
                wv.delta_n.at(x, y) = dir.angle.at(x, y);
            }
        out[i] = std::move(wv);
    }
    return out;
}

BlendWeights blend_scores(const std::vector<WarpedView>& warped, double lambda_d,
                          double lambda_a) {
    const int qw = warped.at(0).mask_q.width(), qh = warped.at(0).mask_q.height();
    const int fw = warped.at(0).mask.width(), fh = warped.at(0).mask.height();
    const int nv = static_cast<int>(warped.size());

    BlendWeights bw;
    bw.score.assign(nv, ImageD(qw, qh, 1, -kInf));
    bw.norm.assign(nv, ImageD(qw, qh, 1, 0.0));
    for (int i = 0; i < nv; ++i)
        for (int y = 0; y < qh; ++y)
            for (int x = 0; x < qw; ++x)
                if (warped[i].mask_q.at(x, y))
                    bw.score[i].at(x, y) = -lambda_d * std::max(0.0, warped[i].delta_d.at(x, y)) -
                                           lambda_a * warped[i].delta_n.at(x, y);

    for (int y = 0; y < qh; ++y)
        for (int x = 0; x < qw; ++x) {
            double best = -kInf;
            for (int i = 0; i < nv; ++i) best = std::max(best, bw.score[i].at(x, y));
            if (best == -kInf) continue;
            double sum = 0;
            for (int i = 0; i < nv; ++i) {
                double e = std::exp(bw.score[i].at(x, y) - best);
                bw.norm[i].at(x, y) = e;
                sum += e;
            }
            for (int i = 0; i < nv; ++i) bw.norm[i].at(x, y) /= sum;
        }

    // Upsample, gate by full-resolution warp success, renormalize; where the
    // quarter grid gave every full-res-visible view zero weight, fall back to
    // a uniform split so visible pixels never lose all weight.
    bw.full.assign(nv, ImageD(fw, fh, 1, 0.0));
    bw.visible = ImageU8(fw, fh, 1, 0);
    for (int y = 0; y < fh; ++y) {
        double v = std::clamp((y - 2) / 4.0, 0.0, qh - 1.0);
        int v0 = std::min(static_cast<int>(v), qh - 2);
        double fv = v - v0;
        for (int x = 0; x < fw; ++x) {
            double u = std::clamp((x - 2) / 4.0, 0.0, qw - 1.0);
            int u0 = std::min(static_cast<int>(u), qw - 2);
            double fu = u - u0;
            double sum = 0;
            int nvis = 0;
            for (int i = 0; i < nv; ++i) {
                if (!warped[i].mask.at(x, y)) continue;
                ++nvis;
                const ImageD& n = bw.norm[i];
                double w = (1 - fu) * (1 - fv) * n.at(u0, v0) + fu * (1 - fv) * n.at(u0 + 1, v0) +
                           (1 - fu) * fv * n.at(u0, v0 + 1) + fu * fv * n.at(u0 + 1, v0 + 1);
                bw.full[i].at(x, y) = w;
                sum += w;
            }
            if (nvis == 0) continue;
            bw.visible.at(x, y) = 1;
            for (int i = 0; i < nv; ++i) {
                if (!warped[i].mask.at(x, y))
                    bw.full[i].at(x, y) = 0.0;
                else if (sum > 0)
                    bw.full[i].at(x, y) /= sum;
                else
                    bw.full[i].at(x, y) = 1.0 / nvis;
            }
        }
    }
    return bw;
}

ImageF blend(const std::vector<WarpedView>& warped, const BlendWeights& weights) {
    const int fw = warped.at(0).color.width(), fh = warped.at(0).color.height();
    ImageF out(fw, fh, 3, 0.0f);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x) {
            if (!weights.visible.at(x, y)) continue;
            double r = 0, g = 0, b = 0;
            for (size_t i = 0; i < warped.size(); ++i) {
                double w = weights.full[i].at(x, y);
                if (w <= 0.0) continue;
                r += w * warped[i].color.at(x, y, 0);
                g += w * warped[i].color.at(x, y, 1);
                b += w * warped[i].color.at(x, y, 2);
            }
            out.at(x, y, 0) = static_cast<float>(r);
            out.at(x, y, 1) = static_cast<float>(g);
            out.at(x, y, 2) = static_cast<float>(b);
        }
    return out;
}

MatteFrame postprocess_matte(const ImageF& blended, const ImageU8& visible,
                             const ImageU8& silhouette, int hole_px) {
    const int w = blended.width(), h = blended.height();
    ImageF color = blended;
    ImageU8 support = visible;

    // Holes: connected regions (4-neighbor) inside the silhouette that no
    // view covered. Small ones are filled by diffusion from their rim.
    ImageU8 seen(w, h, 1, 0);
    for (int sy = 0; sy < h; ++sy)
        for (int sx = 0; sx < w; ++sx) {
            if (seen.at(sx, sy) || support.at(sx, sy) || !silhouette.at(sx, sy)) continue;
            std::vector<std::pair<int, int>> comp;
            std::queue<std::pair<int, int>> q;
            q.push({sx, sy});
            seen.at(sx, sy) = 1;
            while (!q.empty()) {
                auto [x, y] = q.front();
                q.pop();
                comp.push_back({x, y});
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int nx = x + dx[k], ny = y + dy[k];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    if (seen.at(nx, ny) || support.at(nx, ny) || !silhouette.at(nx, ny)) continue;
                    seen.at(nx, ny) = 1;
                    q.push({nx, ny});
                }
            }
            if (static_cast<int>(comp.size()) > hole_px) continue;
            // Gauss-Seidel diffusion: each hole pixel relaxes to the mean of
            // its defined neighbors until the region settles.
            for (int it = 0; it < 64; ++it)
                for (auto [x, y] : comp) {
                    double r = 0, g = 0, b = 0, n = 0;
                    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                    for (int k = 0; k < 4; ++k) {
                        int nx = x + dx[k], ny = y + dy[k];
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        if (!support.at(nx, ny) && !seen.at(nx, ny)) continue;
                        r += color.at(nx, ny, 0);
                        g += color.at(nx, ny, 1);
                        b += color.at(nx, ny, 2);
                        n += 1;
                    }
                    if (n > 0) {
                        color.at(x, y, 0) = static_cast<float>(r / n);
                        color.at(x, y, 1) = static_cast<float>(g / n);
                        color.at(x, y, 2) = static_cast<float>(b / n);
                    }
                }
            for (auto [x, y] : comp) support.at(x, y) = 1;
        }

    // Alpha matte: close small gaps, pull the boundary in one pixel, feather.
    ImageU8 closed = erode3(dilate3(support));
    ImageU8 eroded = erode3(closed);

    double k[5];
    double ksum = 0;
    for (int i = -2; i <= 2; ++i) ksum += (k[i + 2] = std::exp(-0.5 * i * i));
    for (double& v : k) v /= ksum;
    ImageF ax(w, h, 1, 0.0f), alpha(w, h, 1, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = -2; i <= 2; ++i) {
                int nx = x + i;
                if (nx >= 0 && nx < w && eroded.at(nx, y)) s += k[i + 2];
            }
            ax.at(x, y) = static_cast<float>(s);
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = -2; i <= 2; ++i) {
                int ny = y + i;
                if (ny >= 0 && ny < h) s += k[i + 2] * ax.at(x, ny);
            }
            alpha.at(x, y) = static_cast<float>(s);
        }

    // The feather spreads alpha a couple of pixels past the covered region;
    // grow the color outward so premultiplication never scales black rims.
    for (int pass = 0; pass < 3; ++pass) {
        ImageU8 next = support;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (support.at(x, y)) continue;
                double r = 0, g = 0, b = 0, n = 0;
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int kk = 0; kk < 4; ++kk) {
                    int nx = x + dx[kk], ny = y + dy[kk];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h || !support.at(nx, ny)) continue;
                    r += color.at(nx, ny, 0);
                    g += color.at(nx, ny, 1);
                    b += color.at(nx, ny, 2);
                    n += 1;
                }
                if (n == 0) continue;
                color.at(x, y, 0) = static_cast<float>(r / n);
                color.at(x, y, 1) = static_cast<float>(g / n);
                color.at(x, y, 2) = static_cast<float>(b / n);
                next.at(x, y) = 1;
            }
        support = std::move(next);
    }

    return {std::move(color), std::move(alpha)};
}

PortraitFrame quantize_portrait(const ImageF& color, const ImageF& alpha) {
    const int w = color.width(), h = color.height();
    PortraitFrame out;
    out.color = ImageU8(w, h, 3, 0);
    out.alpha = alpha;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double a = alpha.at(x, y);
            if (a <= 0.0) continue;
            for (int c = 0; c < 3; ++c) {
                double v = std::clamp(static_cast<double>(color.at(x, y, c)), 0.0, 1.0);
                out.color.at(x, y, c) = static_cast<uint8_t>(std::lround(255.0 * v * a));
            }
        }
    return out;
}

PortraitFrame postprocess(const ImageF& blended, const ImageU8& visible,
                          const ImageU8& silhouette, int hole_px) {
    MatteFrame m = postprocess_matte(blended, visible, silhouette, hole_px);
    return quantize_portrait(m.color, m.alpha);
}

PortraitFrame render_portrait(const std::vector<RgbdFrame>& inputs,
                              const std::vector<ImageU8>& foreground,
                              const std::vector<CameraModel>& cams, const ImageF& refined_q,
                              const VirtualView& vv, const RenderParams& params) {
    std::vector<WarpedView> warped =
        warp_inputs(inputs, foreground, cams, refined_q, vv, params.occlusion);
    BlendWeights weights = blend_scores(warped, params.lambda_d, params.lambda_a);
    ImageF blended = blend(warped, weights);

    // Silhouette: every pixel whose surface point lands on foreground in some
    // input view, occluded or not.
    ImageU8 silhouette(weights.visible.width(), weights.visible.height(), 1, 0);
    for (int y = 0; y < silhouette.height(); ++y)
        for (int x = 0; x < silhouette.width(); ++x) {
            uint8_t v = 0;
            for (const WarpedView& wv : warped)
                if (wv.reach.at(x, y)) {
                    v = 1;
                    break;
                }
            silhouette.at(x, y) = v;
        }
    return postprocess(blended, weights.visible, silhouette, params.hole_px);
}

}  // namespace vcube
