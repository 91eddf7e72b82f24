#include "vcube/view_depth.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace vcube {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

VirtualView VirtualView::at(const Vector3d& viewpoint, const CubeParams& cube) {
    Vector3d target = cube.seat + Vector3d(0, cube.eye_height, 0);
    if ((viewpoint - target).norm() < 1e-9)
        throw DegenerateFrustum("virtual viewpoint coincides with the seat eye");
    VirtualView v;
    v.full = CameraModel::look_at(viewpoint, target, cube.cam_fx, cube.cam_fy,
                                  cube.cam_res_x / 2.0, cube.cam_res_y / 2.0, cube.cam_res_x,
                                  cube.cam_res_y);
    v.depth_cam = v.full.quarter();
    return v;
}

namespace {

template <typename T>
Image<T> stride4(const Image<T>& full) {
    Image<T> out(full.width() / 4, full.height() / 4, full.channels());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            for (int c = 0; c < out.channels(); ++c)
                out.at(x, y, c) = full.at(4 * x + 2, 4 * y + 2, c);
    return out;
}

}  // namespace

ImageU8 quarter_color(const ImageU8& full) { return stride4(full); }
ImageF quarter_depth(const ImageF& full) { return stride4(full); }
ImageU8 quarter_mask(const ImageU8& full) { return stride4(full); }

TriMesh build_per_view_mesh(const ImageF& depth, const CameraModel& cam,
                            double discontinuity_thresh) {
    const int w = depth.width(), h = depth.height();
    TriMesh m;
    std::vector<int> vid(static_cast<size_t>(w) * h, -1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float d = depth.at(x, y);
            if (d <= 0.0f) continue;
            Vector3d p((x - cam.cx) / cam.fx * d, (y - cam.cy) / cam.fy * d, d);
            vid[static_cast<size_t>(y) * w + x] = static_cast<int>(m.vertices.size());
            m.vertices.push_back(p);
            m.normals.push_back(Vector3d(0, 0, -1));
        }
    }

    auto keep = [&](float a, float b, float c) {
        float lo = std::min({a, b, c}), hi = std::max({a, b, c});
        return hi - lo <= discontinuity_thresh;
    };
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            int v00 = vid[static_cast<size_t>(y) * w + x];
            int v10 = vid[static_cast<size_t>(y) * w + x + 1];
            int v01 = vid[static_cast<size_t>(y + 1) * w + x];
            int v11 = vid[static_cast<size_t>(y + 1) * w + x + 1];
            if (v00 < 0 || v10 < 0 || v01 < 0 || v11 < 0) continue;
            float d00 = depth.at(x, y), d10 = depth.at(x + 1, y);
            float d01 = depth.at(x, y + 1), d11 = depth.at(x + 1, y + 1);
            if (keep(d00, d10, d11)) m.tris.push_back({v00, v10, v11});
            if (keep(d00, d11, d01)) m.tris.push_back({v00, v11, v01});
        }
    }
    if (m.tris.empty()) throw EmptyDepth("no triangle survives depth lifting");
    return m;
}

ImageF project_view_mesh(const TriMesh& mesh_cam, const CameraModel& input_cam,
                         const CameraModel& virtual_cam) {
    RigidTransform to_cube = input_cam.extrinsics.inverse();
    TriMesh world = mesh_cam;
    for (auto& v : world.vertices) v = to_cube.apply(v);
    ImageF out;
    rasterize_depth(world, virtual_cam, out);
    return out;
}

ProjectedDepthSet project_depth_set(const std::vector<DepthInput>& inputs,
                                    const CameraModel& virtual_cam,
                                    double discontinuity_thresh) {
    ProjectedDepthSet ps;
    for (const auto& in : inputs) {
        ImageF d = in.depth;
        if (!in.valid.empty())
            for (int y = 0; y < d.height(); ++y)
                for (int x = 0; x < d.width(); ++x)
                    if (in.valid.at(x, y) == 0) d.at(x, y) = 0.0f;
        TriMesh mesh;
        try {
            mesh = build_per_view_mesh(d, in.cam, discontinuity_thresh);
        } catch (const EmptyDepth&) {
            continue;  // view contributes nothing
        }
        ImageF proj = project_view_mesh(mesh, in.cam, virtual_cam);
        ImageU8 mask(proj.width(), proj.height(), 1, 0);
        for (int y = 0; y < proj.height(); ++y)
            for (int x = 0; x < proj.width(); ++x) mask.at(x, y) = proj.at(x, y) > 0.0f;
        ps.depth.push_back(std::move(proj));
        ps.mask.push_back(std::move(mask));
    }
    if (ps.depth.empty()) throw EmptyDepth("no input view produced a mesh");
    return ps;
}

ImageF fuse_initial_depth(const ProjectedDepthSet& projected, ImageU8* union_mask) {
    if (projected.depth.empty()) throw EmptyDepth("no projected views to fuse");
    const int w = projected.depth[0].width(), h = projected.depth[0].height();
    ImageF dbar(w, h, 1, 0.0f);
    ImageU8 filled(w, h, 1, 0);
    long n_valid = 0;
    double valid_sum = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            int n = 0;
            for (size_t i = 0; i < projected.depth.size(); ++i) {
                if (projected.mask[i].at(x, y)) {
                    acc += projected.depth[i].at(x, y);
                    ++n;
                }
            }
            if (n > 0) {
                dbar.at(x, y) = static_cast<float>(acc / n);
                filled.at(x, y) = 1;
                valid_sum += acc / n;
                ++n_valid;
            }
        }
    }
    if (n_valid == 0) throw EmptyDepth("projected views cover no pixel");
    if (union_mask) *union_mask = filled;

    // Synchronous frontier diffusion: unfilled pixels take the mean of their
    // already-filled 4-neighbors, at most 64 sweeps.
    long remaining = static_cast<long>(w) * h - n_valid;
    for (int iter = 0; iter < 64 && remaining > 0; ++iter) {
        std::vector<std::pair<int, float>> updates;  // (flat index, value)
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (filled.at(x, y)) continue;
                double acc = 0.0;
                int n = 0;
                const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int nx = x + dx[k], ny = y + dy[k];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h || !filled.at(nx, ny)) continue;
                    acc += dbar.at(nx, ny);
                    ++n;
                }
                if (n > 0) updates.emplace_back(y * w + x, static_cast<float>(acc / n));
            }
        }
        if (updates.empty()) break;
        for (auto& [idx, v] : updates) {
            dbar.at(idx % w, idx / w) = v;
            filled.at(idx % w, idx / w) = 1;
        }
        remaining -= static_cast<long>(updates.size());
    }
    if (remaining > 0) {
        float mean = static_cast<float>(valid_sum / n_valid);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (!filled.at(x, y)) dbar.at(x, y) = mean;
    }
    return dbar;
}

ImageD extract_features(const ImageU8& color) {
    const int w = color.width(), h = color.height();
    ImageD f(w, h, kFeatureChannels, 0.0);
    ImageD luma(w, h, 1, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) f.at(x, y, c) = color.at(x, y, c) / 255.0;
            luma.at(x, y) = (0.299 * color.at(x, y, 0) + 0.587 * color.at(x, y, 1) +
                             0.114 * color.at(x, y, 2)) /
                            255.0;
        }
    }
    auto cl = [&](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
    ImageD grad(w, h, 2, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            auto L = [&](int dx, int dy) { return luma.at(cl(x + dx, w - 1), cl(y + dy, h - 1)); };
            double sx = (L(1, -1) + 2 * L(1, 0) + L(1, 1)) - (L(-1, -1) + 2 * L(-1, 0) + L(-1, 1));
            double sy = (L(-1, 1) + 2 * L(0, 1) + L(1, 1)) - (L(-1, -1) + 2 * L(0, -1) + L(1, -1));
            grad.at(x, y, 0) = std::abs(sx) / 2.0;
            grad.at(x, y, 1) = std::abs(sy) / 2.0;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int g = 0; g < 2; ++g) {
                double acc = 0.0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        acc += grad.at(cl(x + dx, w - 1), cl(y + dy, h - 1), g);
                f.at(x, y, 3 + g) = acc / 9.0;
            }
        }
    }
    return f;
}

CostVolume build_cost_volume(const std::vector<ImageD>& features,
                             const std::vector<CameraModel>& cams,
                             const std::vector<ImageU8>& valid_masks,
                             const HypothesisSet& hyp, const CameraModel& virtual_cam) {
    const size_t n_views = features.size();
    if (n_views < 2) throw TooFewViews("cost volume needs at least two input views");

    const int w = hyp.initial.width(), h = hyp.initial.height();
    const int n = hyp.count;

    // Cube-local ray directions scaled so that depth along the virtual
    // camera's z axis multiplies directly.
    RigidTransform inv = virtual_cam.extrinsics.inverse();
    std::vector<Vector3d> rays(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            rays[static_cast<size_t>(y) * w + x] =
                inv.R * Vector3d((x - virtual_cam.cx) / virtual_cam.fx,
                                 (y - virtual_cam.cy) / virtual_cam.fy, 1.0);
    const Vector3d origin = inv.t;

    CostVolume raw(w, h, n, kInf);
    for (int k = 0; k < n; ++k) {
        double sigma = hyp.sigma(k);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double d = hyp.initial.at(x, y) + sigma;
                if (d <= 0.0) continue;  // hypothesis in front of the camera only
                Vector3d X = origin + rays[static_cast<size_t>(y) * w + x] * d;

                double sum[kFeatureChannels] = {}, sum2[kFeatureChannels] = {};
                int nv = 0;
                for (size_t i = 0; i < n_views; ++i) {
                    const CameraModel& c = cams[i];
                    Vector3d p = c.extrinsics.apply(X);
                    if (p.z() <= 1e-9) continue;
                    double u = c.fx * p.x() / p.z() + c.cx;
                    double v = c.fy * p.y() / p.z() + c.cy;
                    int x0 = static_cast<int>(std::floor(u)), y0 = static_cast<int>(std::floor(v));
                    if (x0 < 0 || y0 < 0 || x0 + 1 >= c.width || y0 + 1 >= c.height) continue;
                    if (!valid_masks.empty() && !valid_masks[i].empty()) {
                        const ImageU8& m = valid_masks[i];
                        if (!m.at(x0, y0) || !m.at(x0 + 1, y0) || !m.at(x0, y0 + 1) ||
                            !m.at(x0 + 1, y0 + 1))
                            continue;
                    }
                    double fx = u - x0, fy = v - y0;
                    double w00 = (1 - fx) * (1 - fy), w10 = fx * (1 - fy);
                    double w01 = (1 - fx) * fy, w11 = fx * fy;
                    const ImageD& F = features[i];
                    for (int ch = 0; ch < kFeatureChannels; ++ch) {
                        double s = w00 * F.at(x0, y0, ch) + w10 * F.at(x0 + 1, y0, ch) +
                                   w01 * F.at(x0, y0 + 1, ch) + w11 * F.at(x0 + 1, y0 + 1, ch);
                        sum[ch] += s;
                        sum2[ch] += s * s;
                    }
                    ++nv;
                }
                if (nv < 2) continue;
                double cost = 0.0;
                for (int ch = 0; ch < kFeatureChannels; ++ch) {
                    double mean = sum[ch] / nv;
                    cost += std::max(0.0, sum2[ch] / nv - mean * mean);
                }
                raw.at(x, y, k) = cost;
            }
        }
    }

    // 5x5 box smoothing per slice over finite entries; +inf centers persist.
    CostVolume out(w, h, n, kInf);
    for (int k = 0; k < n; ++k) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!std::isfinite(raw.at(x, y, k))) continue;
                double acc = 0.0;
                int cnt = 0;
                for (int dy = -2; dy <= 2; ++dy) {
                    for (int dx = -2; dx <= 2; ++dx) {
                        int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        double v = raw.at(nx, ny, k);
                        if (!std::isfinite(v)) continue;
                        acc += v;
                        ++cnt;
                    }
                }
                out.at(x, y, k) = acc / cnt;
            }
        }
    }
    return out;
}

ProbabilityVolume cost_to_probability(const CostVolume& v, double tau) {
    ProbabilityVolume p(v.width, v.height, v.count, 0.0);
    for (int y = 0; y < v.height; ++y) {
        for (int x = 0; x < v.width; ++x) {
            double lo = kInf;
            for (int k = 0; k < v.count; ++k) lo = std::min(lo, v.at(x, y, k));
            if (!std::isfinite(lo)) {
                for (int k = 0; k < v.count; ++k) p.at(x, y, k) = 1.0 / v.count;
                continue;
            }
            double total = 0.0;
            for (int k = 0; k < v.count; ++k) {
                double c = v.at(x, y, k);
                double w = std::isfinite(c) ? std::exp(-(c - lo) / tau) : 0.0;
                p.at(x, y, k) = w;
                total += w;
            }
            for (int k = 0; k < v.count; ++k) p.at(x, y, k) /= total;
        }
    }
    return p;
}

ImageF expected_depth(const ProbabilityVolume& p, const HypothesisSet& hyp) {
    ImageF out(p.width, p.height, 1, 0.0f);
    for (int y = 0; y < p.height; ++y) {
        for (int x = 0; x < p.width; ++x) {
            double e = 0.0;
            for (int k = 0; k < p.count; ++k) e += p.at(x, y, k) * hyp.at(x, y, k);
            double base = hyp.initial.at(x, y);
            out.at(x, y) = static_cast<float>(
                std::clamp(e, base - hyp.delta_d, base + hyp.delta_d));
        }
    }
    return out;
}

DepthPrediction predict_depth(const VirtualView& view, const std::vector<DepthInput>& inputs,
                              const DepthParams& params) {
    ProjectedDepthSet ps = project_depth_set(inputs, view.depth_cam, params.discontinuity);
    DepthPrediction out;
    out.initial = fuse_initial_depth(ps, &out.coverage);

    HypothesisSet hyp{out.initial, params.delta_d, params.hypotheses};
    std::vector<ImageD> features;
    std::vector<CameraModel> cams;
    std::vector<ImageU8> masks;
    features.reserve(inputs.size());
    for (const auto& in : inputs) {
        features.push_back(extract_features(in.color));
        cams.push_back(in.cam);
        masks.push_back(in.valid);
    }
    CostVolume cost = build_cost_volume(features, cams, masks, hyp, view.depth_cam);
    ProbabilityVolume prob = cost_to_probability(cost, params.tau);
    out.refined = expected_depth(prob, hyp);
    return out;
}

void write_volume(const std::string& path, const Volume& v) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    f.write("VCVL", 4);
    uint32_t dims[3] = {static_cast<uint32_t>(v.height), static_cast<uint32_t>(v.width),
                        static_cast<uint32_t>(v.count)};
    f.write(reinterpret_cast<const char*>(dims), 12);
    for (int k = 0; k < v.count; ++k)
        for (int y = 0; y < v.height; ++y)
            for (int x = 0; x < v.width; ++x) {
                float val = static_cast<float>(v.at(x, y, k));
                f.write(reinterpret_cast<const char*>(&val), 4);
            }
    if (!f) throw IoError("short write to " + path);
}

Volume read_volume(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    char magic[4];
    uint32_t dims[3];
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(dims), 12);
    if (!f || std::memcmp(magic, "VCVL", 4) != 0) throw IoError("bad volume header in " + path);
    Volume v(static_cast<int>(dims[1]), static_cast<int>(dims[0]), static_cast<int>(dims[2]));
    for (int k = 0; k < v.count; ++k)
        for (int y = 0; y < v.height; ++y)
            for (int x = 0; x < v.width; ++x) {
                float val;
                f.read(reinterpret_cast<char*>(&val), 4);
                v.at(x, y, k) = val;
            }
    if (!f) throw IoError("truncated volume in " + path);
    return v;
}

}  // namespace vcube
