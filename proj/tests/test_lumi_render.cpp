#include <doctest.h>

#include <cmath>
#include <queue>

#include "vcube/assembly.hpp"
#include "vcube/lumi_render.hpp"
#include "vcube/raster.hpp"
#include "vcube/synth_world.hpp"

using namespace vcube;

namespace {

const NoiseModel kClean{0.0, 0.0, 0.0, 0.0, 0.0, 1};

// Analytic smooth albedo so bilinear resampling stays within quantization.
Vector3d plane_albedo(const Vector3d& X) {
    return Vector3d(0.5 + 0.3 * std::sin(2.0 * X.x() + 1.0), 0.5 + 0.3 * std::cos(1.7 * X.y()),
                    0.5 + 0.2 * std::sin(1.3 * (X.x() + X.y())));
}

CameraModel plane_camera(const Vector3d& center) {
    CameraModel cam;
    cam.fx = cam.fy = 160;
    cam.cx = 64;
    cam.cy = 48;
    cam.width = 128;
    cam.height = 96;
    cam.extrinsics.R = Matrix3d::Identity();
    cam.extrinsics.t = -center;
    return cam;
}

// Renders the textured z=2 plane as seen by `cam` (identity rotation).
RgbdFrame plane_frame(const CameraModel& cam) {
    RgbdFrame f;
    f.color = ImageU8(cam.width, cam.height, 3, 0);
    double depth = 2.0 - cam.center().z();
    f.depth = ImageF(cam.width, cam.height, 1, static_cast<float>(depth));
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            Vector3d dir((x - cam.cx) / cam.fx, (y - cam.cy) / cam.fy, 1.0);
            Vector3d X = cam.center() + depth * dir;
            Vector3d a = plane_albedo(X);
            for (int c = 0; c < 3; ++c)
                f.color.at(x, y, c) =
                    static_cast<uint8_t>(std::lround(255.0 * std::clamp(a[c], 0.0, 1.0)));
        }
    return f;
}

// Multi-source BFS fill: invalid pixels take the value of the nearest valid
// one, mirroring how the depth stage densifies its output.
ImageF densify(const ImageF& in) {
    ImageF out = in;
    std::queue<std::pair<int, int>> q;
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < in.width(); ++x)
            if (in.at(x, y) > 0.0f) q.push({x, y});
    const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop();
        for (int k = 0; k < 4; ++k) {
            int nx = x + dx[k], ny = y + dy[k];
            if (nx < 0 || ny < 0 || nx >= in.width() || ny >= in.height()) continue;
            if (out.at(nx, ny) > 0.0f) continue;
            out.at(nx, ny) = out.at(x, y);
            q.push({nx, ny});
        }
    }
    return out;
}

ImageU8 figure_mask(const SyntheticScene& scene, const CameraModel& cam, int frame) {
    ImageF fig;
    rasterize_depth(scene.figure_mesh(frame), cam, fig);
    ImageU8 mask(fig.width(), fig.height(), 1, 0);
    for (int y = 0; y < fig.height(); ++y)
        for (int x = 0; x < fig.width(); ++x) mask.at(x, y) = fig.at(x, y) > 0.0f;
    return mask;
}

ImageU8 erode_n(const ImageU8& in, int n) {
    ImageU8 out = in;
    for (int i = 0; i < n; ++i) {
        ImageU8 next(out.width(), out.height(), 1, 0);
        for (int y = 1; y < out.height() - 1; ++y)
            for (int x = 1; x < out.width() - 1; ++x) {
                bool all = true;
                for (int dy = -1; dy <= 1 && all; ++dy)
                    for (int dx2 = -1; dx2 <= 1; ++dx2)
                        if (!out.at(x + dx2, y + dy)) {
                            all = false;
                            break;
                        }
                next.at(x, y) = all;
            }
        out = std::move(next);
    }
    return out;
}

}  // namespace

TEST_CASE("depth upsampling: exact on aligned pixels and on linear ramps") {
    ImageF q(8, 6, 1, 0.0f);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) q.at(x, y) = static_cast<float>(1.0 + 0.01 * x - 0.005 * y);
    ImageF up = upsample_depth(q, 32, 24);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x)
            CHECK(up.at(4 * x + 2, 4 * y + 2) == doctest::Approx(q.at(x, y)).epsilon(1e-6));
    // Interior full-res pixels interpolate the same linear ramp.
    for (int y = 6; y < 18; ++y)
        for (int x = 6; x < 26; ++x) {
            double expect = 1.0 + 0.01 * ((x - 2) / 4.0) - 0.005 * ((y - 2) / 4.0);
            CHECK(up.at(x, y) == doctest::Approx(expect).epsilon(1e-6));
        }
}

TEST_CASE("depth upsampling: never blends across a depth edge or into holes") {
    // Step edge: left half 1 m, right half 2 m. No upsampled value may fall
    // strictly between the two surfaces; that point would lie in empty space.
    ImageF q(8, 6, 1, 1.0f);
    for (int y = 0; y < 6; ++y)
        for (int x = 4; x < 8; ++x) q.at(x, y) = 2.0f;
    ImageF up = upsample_depth(q, 32, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x) {
            float d = up.at(x, y);
            CHECK((d == 1.0f || d == 2.0f));
        }
    // The side nearer each quarter sample keeps that sample's surface.
    CHECK(up.at(4 * 3 + 2, 10) == 1.0f);
    CHECK(up.at(4 * 4 + 2, 10) == 2.0f);

    // Invalid samples are excluded, not averaged in: a hole next to a 1.6 m
    // surface must not drag interpolated depth toward zero. Only the single
    // full-res pixel aligned exactly with the invalid sample stays invalid.
    ImageF holed(8, 6, 1, 1.6f);
    holed.at(5, 2) = 0.0f;
    ImageF up2 = upsample_depth(holed, 32, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x) {
            if (x == 4 * 5 + 2 && y == 4 * 2 + 2) {
                CHECK(up2.at(x, y) == 0.0f);
            } else {
                CHECK(up2.at(x, y) == 1.6f);
            }
        }

    // An all-invalid neighborhood stays invalid.
    ImageF empty(8, 6, 1, 0.0f);
    ImageF up3 = upsample_depth(empty, 32, 24);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 32; ++x) CHECK(up3.at(x, y) == 0.0f);
}

TEST_CASE("direction maps: coincident viewpoints, opposed viewpoints, brute force") {
    ImageF depth(16, 12, 1, 2.0f);
    CameraModel cam = plane_camera(Vector3d::Zero());
    cam.width = 16;
    cam.height = 12;
    cam.cx = 8;
    cam.cy = 6;
    cam.fx = cam.fy = 20;

    Vector3d vp(0.2, -0.1, 0.3);
    DirectionMaps same = angle_maps(depth, cam, vp, vp);
    // acos near a dot product of 1 carries sqrt(machine-eps) noise.
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x) CHECK(same.angle.at(x, y) < 1e-6);

    // Viewpoints mirrored through the surface point: angle is pi.
    Vector3d p = cam.unproject(Vector2d(5, 7), 2.0);
    Vector3d a(0.3, 0.4, -0.2);
    Vector3d b = 2.0 * p - a;
    DirectionMaps opp = angle_maps(depth, cam, a, b);
    CHECK(std::abs(opp.angle.at(5, 7) - M_PI) < 1e-6);

    Vector3d va(0.4, 0.1, -0.3), vb(-0.2, 0.5, 0.1);
    DirectionMaps m = angle_maps(depth, cam, va, vb);
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 16; ++x) {
            Vector3d P((x - cam.cx) / cam.fx * 2.0, (y - cam.cy) / cam.fy * 2.0, 2.0);
            Vector3d n1 = (va - P).normalized(), n2 = (vb - P).normalized();
            double want = std::acos(std::clamp(n1.dot(n2), -1.0, 1.0));
            CHECK(m.angle.at(x, y) == doctest::Approx(want).epsilon(1e-6));
            for (int c = 0; c < 3; ++c) {
                CHECK(m.to_virtual.at(x, y, c) == doctest::Approx(n1[c]).epsilon(1e-9));
                CHECK(m.to_input.at(x, y, c) == doctest::Approx(n2[c]).epsilon(1e-9));
            }
        }
}

TEST_CASE("identity warp: virtual view at an input camera reproduces its image") {
    SyntheticScene scene;
    CubeSpec rig = CubeSpec::standard();
    const CameraModel& cam = rig.cameras[1];
    int frame = 0;
    RgbdFrame input = render_rgbd(scene, cam, 1, frame, kClean);
    ImageU8 fg = figure_mask(scene, cam, frame);

    VirtualView vv{cam, cam.quarter()};
    ImageF refined;
    rasterize_depth(scene.figure_mesh(frame), vv.depth_cam, refined);
    refined = densify(refined);

    auto warped = warp_inputs({input}, {fg}, {cam}, refined, vv, 0.05);
    const WarpedView& wv = warped[0];

    long visible = 0, close = 0, fg_total = 0, fg_visible = 0;
    for (int y = 0; y < input.color.height(); ++y)
        for (int x = 0; x < input.color.width(); ++x) {
            if (fg.at(x, y)) ++fg_total;
            if (!wv.mask.at(x, y)) continue;
            ++visible;
            if (fg.at(x, y)) ++fg_visible;
            bool ok = true;
            for (int c = 0; c < 3; ++c) {
                double got = 255.0 * wv.color.at(x, y, c);
                if (std::abs(got - input.color.at(x, y, c)) > 1.0) ok = false;
            }
            close += ok;
        }
    REQUIRE(visible > 50000);
    // Bilinear at the integer grid: exact to within one gray level.
    CHECK(double(close) / visible > 0.999);
    // The warp reaches nearly all of the figure.
    CHECK(double(fg_visible) / fg_total > 0.95);
}

TEST_CASE("textured plane: warped views match the direct render, weights normalize") {
    CameraModel virt = plane_camera(Vector3d::Zero());
    VirtualView vv{virt, virt.quarter()};
    std::vector<Vector3d> centers = {Vector3d(0.3, 0.2, 0), Vector3d(-0.3, 0.2, 0),
                                     Vector3d(0.3, -0.2, 0), Vector3d(-0.3, -0.2, 0)};
    std::vector<RgbdFrame> inputs;
    std::vector<ImageU8> fgs;
    std::vector<CameraModel> cams;
    for (const Vector3d& c : centers) {
        CameraModel cam = plane_camera(c);
        inputs.push_back(plane_frame(cam));
        fgs.push_back(ImageU8(cam.width, cam.height, 1, 1));
        cams.push_back(cam);
    }
    ImageF refined(vv.depth_cam.width, vv.depth_cam.height, 1, 2.0f);
    RgbdFrame direct = plane_frame(virt);

    auto warped = warp_inputs(inputs, fgs, cams, refined, vv, 0.05);
    for (const WarpedView& wv : warped) {
        long visible = 0, close = 0;
        for (int y = 0; y < virt.height; ++y)
            for (int x = 0; x < virt.width; ++x) {
                if (!wv.mask.at(x, y)) continue;
                ++visible;
                bool ok = true;
                for (int c = 0; c < 3; ++c)
                    if (std::abs(255.0 * wv.color.at(x, y, c) - direct.color.at(x, y, c)) > 2.0)
                        ok = false;
                close += ok;
            }
        REQUIRE(visible > 5000);
        CHECK(double(close) / visible > 0.95);
    }

    BlendWeights bw = blend_scores(warped);
    for (int y = 0; y < vv.depth_cam.height; ++y)
        for (int x = 0; x < vv.depth_cam.width; ++x) {
            double s = 0;
            bool any = false;
            for (size_t i = 0; i < warped.size(); ++i) {
                s += bw.norm[i].at(x, y);
                any = any || warped[i].mask_q.at(x, y);
            }
            if (any) CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
        }
    long checked = 0;
    for (int y = 0; y < virt.height; ++y)
        for (int x = 0; x < virt.width; ++x) {
            if (!bw.visible.at(x, y)) continue;
            double s = 0;
            for (size_t i = 0; i < warped.size(); ++i) {
                s += bw.full[i].at(x, y);
                if (!warped[i].mask.at(x, y)) CHECK(bw.full[i].at(x, y) == 0.0);
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
            ++checked;
        }
    REQUIRE(checked > 5000);

    ImageF blended = blend(warped, bw);
    long visible = 0, close = 0;
    for (int y = 0; y < virt.height; ++y)
        for (int x = 0; x < virt.width; ++x) {
            if (!bw.visible.at(x, y)) continue;
            ++visible;
            bool ok = true;
            for (int c = 0; c < 3; ++c)
                if (std::abs(255.0 * blended.at(x, y, c) - direct.color.at(x, y, c)) > 2.0)
                    ok = false;
            close += ok;
        }
    CHECK(double(close) / visible > 0.95);
}

TEST_CASE("blend scores: symmetry, lone view, and monotone penalties") {
    auto make = [](int qw, int qh, double dd, double dn, bool vis) {
        WarpedView wv;
        wv.color = ImageF(4 * qw, 4 * qh, 3, 0.5f);
        wv.mask = ImageU8(4 * qw, 4 * qh, 1, vis);
        wv.reach = wv.mask;
        wv.mask_q = ImageU8(qw, qh, 1, vis);
        wv.depth_in = ImageF(qw, qh, 1, 1.0f);
        wv.delta_d = ImageD(qw, qh, 1, dd);
        wv.delta_n = ImageD(qw, qh, 1, dn);
        return wv;
    };

    std::vector<WarpedView> sym;
    for (int i = 0; i < 4; ++i) sym.push_back(make(2, 2, 0.0, 0.0, true));
    BlendWeights bs = blend_scores(sym);
    for (int i = 0; i < 4; ++i) {
        CHECK(bs.norm[i].at(1, 1) == doctest::Approx(0.25).epsilon(1e-9));
        CHECK(bs.full[i].at(4, 4) == doctest::Approx(0.25).epsilon(1e-9));
    }

    std::vector<WarpedView> lone = {make(2, 2, 0.3, 1.0, true), make(2, 2, 0.0, 0.0, false)};
    BlendWeights bl = blend_scores(lone);
    CHECK(bl.norm[0].at(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(bl.norm[1].at(0, 0) == 0.0);
    CHECK(bl.full[0].at(3, 3) == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<WarpedView> pair = {make(2, 2, 0.0, 0.1, true), make(2, 2, 0.0, 0.5, true)};
    BlendWeights bp = blend_scores(pair);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) CHECK(bp.norm[0].at(x, y) > bp.norm[1].at(x, y));
    // Positive depth difference also penalizes, negative does not reward.
    std::vector<WarpedView> dd = {make(2, 2, 0.5, 0.0, true), make(2, 2, -0.5, 0.0, true)};
    BlendWeights bd = blend_scores(dd);
    CHECK(bd.norm[0].at(0, 0) < bd.norm[1].at(0, 0));
    std::vector<WarpedView> dneg = {make(2, 2, 0.0, 0.0, true), make(2, 2, -0.5, 0.0, true)};
    BlendWeights bn = blend_scores(dneg);
    CHECK(bn.norm[0].at(0, 0) == doctest::Approx(bn.norm[1].at(0, 0)).epsilon(1e-9));
}

TEST_CASE("blend: one-hot selection and brute-force weighted sums") {
    int qw = 2, qh = 2, fw = 8, fh = 8;
    std::vector<WarpedView> views(3);
    uint32_t state = 12345;
    auto next = [&state]() {
        state = state * 1664525u + 1013904223u;
        return (state >> 8) / double(1 << 24);
    };
    for (auto& wv : views) {
        wv.color = ImageF(fw, fh, 3, 0.0f);
        wv.mask = ImageU8(fw, fh, 1, 1);
        wv.mask_q = ImageU8(qw, qh, 1, 1);
        for (int y = 0; y < fh; ++y)
            for (int x = 0; x < fw; ++x)
                for (int c = 0; c < 3; ++c) wv.color.at(x, y, c) = static_cast<float>(next());
    }
    BlendWeights bw;
    bw.full.assign(3, ImageD(fw, fh, 1, 0.0));
    bw.visible = ImageU8(fw, fh, 1, 1);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x) {
            double a = next(), b = next(), c = next(), s = a + b + c;
            bw.full[0].at(x, y) = a / s;
            bw.full[1].at(x, y) = b / s;
            bw.full[2].at(x, y) = c / s;
        }
    ImageF out = blend(views, bw);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x)
            for (int c = 0; c < 3; ++c) {
                double want = 0;
                for (int i = 0; i < 3; ++i) want += bw.full[i].at(x, y) * views[i].color.at(x, y, c);
                CHECK(out.at(x, y, c) == doctest::Approx(want).epsilon(1e-6));
            }

    BlendWeights hot = bw;
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x) {
            hot.full[0].at(x, y) = 0;
            hot.full[1].at(x, y) = 1;
            hot.full[2].at(x, y) = 0;
        }
    ImageF sel = blend(views, hot);
    for (int y = 0; y < fh; ++y)
        for (int x = 0; x < fw; ++x)
            for (int c = 0; c < 3; ++c) CHECK(sel.at(x, y, c) == views[1].color.at(x, y, c));
}

TEST_CASE("postprocess: hole filling, interior stability, feathered edge") {
    int w = 64, h = 64;
    ImageF blended(w, h, 3, 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            blended.at(x, y, 0) = 0.6f;
            blended.at(x, y, 1) = 0.4f;
            blended.at(x, y, 2) = 0.2f;
        }
    ImageU8 visible(w, h, 1, 1);
    visible.at(20, 20) = 0;
    ImageU8 sil(w, h, 1, 1);
    PortraitFrame pf = postprocess(blended, visible, sil, 25);

    // Deep interior: alpha saturates and colors pass through premultiplied.
    CHECK(pf.alpha.at(32, 32) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(int(pf.color.at(32, 32, 0)) == 153);
    CHECK(int(pf.color.at(32, 32, 1)) == 102);
    CHECK(int(pf.color.at(32, 32, 2)) == 51);
    // The 1 px hole fills with the surrounding constant.
    CHECK(int(pf.color.at(20, 20, 0)) == 153);
    CHECK(pf.alpha.at(20, 20) == doctest::Approx(1.0).epsilon(1e-6));

    // Half-plane support: the feathered edge matches a 1-D convolution of the
    // eroded step with the 5-tap Gaussian.
    ImageU8 half(w, h, 1, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < 32; ++x) half.at(x, y) = 1;
    PortraitFrame pe = postprocess(blended, half, half, 25);
    double k[5], ks = 0;
    for (int i = -2; i <= 2; ++i) ks += (k[i + 2] = std::exp(-0.5 * i * i));
    for (double& v : k) v /= ks;
    int edge = 30;  // support ends at 31; one pixel eroded
    for (int x = 24; x < 40; ++x) {
        double want = 0;
        for (int i = -2; i <= 2; ++i)
            if (x + i <= edge) want += k[i + 2];
        CHECK(pf.alpha.width() == w);
        CHECK(pe.alpha.at(x, 32) == doctest::Approx(want).epsilon(1e-5));
    }
    // Alpha transitions monotonically across the feather band.
    for (int x = 25; x < 38; ++x) CHECK(pe.alpha.at(x + 1, 32) <= pe.alpha.at(x, 32) + 1e-9);
    // Fully transparent pixels store black.
    for (int c = 0; c < 3; ++c) CHECK(int(pe.color.at(50, 32, c)) == 0);
}

TEST_CASE("full render at an input viewpoint reproduces the capture") {
    SyntheticScene scene;
    CubeSpec rig = CubeSpec::standard();
    const CameraModel& cam = rig.cameras[1];
    int frame = 0;
    RgbdFrame input = render_rgbd(scene, cam, 1, frame, kClean);
    ImageU8 fg = figure_mask(scene, cam, frame);

    VirtualView vv{cam, cam.quarter()};
    ImageF refined;
    rasterize_depth(scene.figure_mesh(frame), vv.depth_cam, refined);
    refined = densify(refined);

    PortraitFrame pf = render_portrait({input}, {fg}, {cam}, refined, vv);
    ImageU8 interior = erode_n(fg, 3);
    long total = 0, good = 0;
    for (int y = 0; y < fg.height(); ++y)
        for (int x = 0; x < fg.width(); ++x) {
            if (!interior.at(x, y)) continue;
            ++total;
            double a = pf.alpha.at(x, y);
            if (a < 0.9) continue;
            bool ok = true;
            for (int c = 0; c < 3; ++c) {
                double got = pf.color.at(x, y, c) / a;
                if (std::abs(got - input.color.at(x, y, c)) > 2.0) ok = false;
            }
            good += ok;
        }
    REQUIRE(total > 30000);
    CHECK(double(good) / total > 0.99);
    for (int y = 0; y < pf.alpha.height(); ++y)
        for (int x = 0; x < pf.alpha.width(); ++x) {
            REQUIRE(pf.alpha.at(x, y) >= 0.0f);
            REQUIRE(pf.alpha.at(x, y) <= 1.0f + 1e-6f);
            if (pf.alpha.at(x, y) == 0.0f)
                for (int c = 0; c < 3; ++c) REQUIRE(int(pf.color.at(x, y, c)) == 0);
        }
}

TEST_CASE("resolution sensitivity: the nearer camera receives more weight") {
    CameraModel virt = plane_camera(Vector3d::Zero());
    VirtualView vv{virt, virt.quarter()};
    CameraModel near_cam = plane_camera(Vector3d(0.05, 0, 0));
    CameraModel far_cam = plane_camera(Vector3d(0.05, 0, -2.0));
    std::vector<RgbdFrame> inputs = {plane_frame(near_cam), plane_frame(far_cam)};
    std::vector<ImageU8> fgs = {ImageU8(128, 96, 1, 1), ImageU8(128, 96, 1, 1)};
    std::vector<CameraModel> cams = {near_cam, far_cam};
    ImageF refined(vv.depth_cam.width, vv.depth_cam.height, 1, 2.0f);

    auto warped = warp_inputs(inputs, fgs, cams, refined, vv, 0.05);
    BlendWeights bw = blend_scores(warped);
    double mean_near = 0, mean_far = 0;
    long n = 0;
    for (int y = 0; y < vv.depth_cam.height; ++y)
        for (int x = 0; x < vv.depth_cam.width; ++x) {
            if (!warped[0].mask_q.at(x, y) || !warped[1].mask_q.at(x, y)) continue;
            mean_near += bw.norm[0].at(x, y);
            mean_far += bw.norm[1].at(x, y);
            ++n;
        }
    REQUIRE(n > 300);
    CHECK(mean_near / n > mean_far / n);
    CHECK(mean_near / n > 0.9);  // a 2 m depth handicap at lambda_d=20 is decisive
}
