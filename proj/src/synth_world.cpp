#include "vcube/synth_world.hpp"

#include <cmath>
#include <memory>

#include "vcube/rng.hpp"

namespace vcube {

namespace {

// Fixed studio lighting and body plan. The backdrop renders emissive so its
// gray level matches the clear color exactly regardless of the light.
const Vector3d kLightDir = Vector3d(0.35, 0.9, -0.3).normalized();
constexpr double kAmbient = 0.45;
constexpr double kBackdropGray = 0.5;

const Vector3d kHeadCenter(0.0, 1.25, 1.0);
constexpr double kHeadRadius = 0.11;
const Vector3d kTorsoCenter(0.0, 0.93, 1.03);
const Vector3d kTorsoSemi(0.22, 0.27, 0.13);
const Vector3d kShoulder(0.20, 1.10, 1.00);
const Vector3d kHand(0.30, 0.78, 0.80);
constexpr double kArmRadius = 0.045;
constexpr double kMarkerLift = 0.0012;
constexpr double kEyeElevation = 0.15;  // radians above the head equator

const Vector3d kHeadTint(0.92, 0.80, 0.70);
const Vector3d kTorsoTint(0.75, 0.88, 0.70);
const Vector3d kArmTint(0.82, 0.74, 0.92);

constexpr double kTau = 6.283185307179586476925286766559;

// A plain parity checker re-aligns with itself when two views disagree by a
// whole cell, which hides exactly the misalignments the depth stage must
// detect. Hashing the cell index instead keeps the pattern aperiodic.
uint64_t cell_hash(long cx, long cy, long cz) {
    uint64_t h = 0x9E3779B97F4A7C15ull;
    for (long v : {cx, cy, cz}) {
        h += static_cast<uint64_t>(v) * 0x9E3779B97F4A7C15ull;
        h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
        h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
        h ^= h >> 31;
    }
    return h;
}

Vector3d checker_albedo(const SceneParams& p, const Vector3d& tint, const Vector3d& local,
                        double y_ref) {
    auto cell = [&](double v) { return static_cast<long>(std::floor(v / p.texture_cell)); };
    bool bright = cell_hash(cell(local.x()), cell(local.y()), cell(local.z())) & 1;
    double base = 0.5 + (bright ? p.texture_amp : -p.texture_amp);
    double ramp = p.ramp * (local.y() - y_ref);
    Vector3d c;
    for (int i = 0; i < 3; ++i) c[i] = std::clamp((base + ramp) * tint[i], 0.0, 1.0);
    return c;
}

struct MeshBuilder {
    TriMesh mesh;
    const SceneParams& p;

    explicit MeshBuilder(const SceneParams& params) : p(params) {}

    int add_vertex(const Vector3d& v, const Vector3d& n) {
        mesh.vertices.push_back(v);
        mesh.normals.push_back(n.normalized());
        return static_cast<int>(mesh.vertices.size()) - 1;
    }

    void add_face(int a, int b, int c, const Vector3d& albedo, bool emissive = false) {
        mesh.tris.push_back({a, b, c});
        mesh.face_albedo.push_back(albedo);
        mesh.face_emissive.push_back(emissive ? 1 : 0);
    }
};

// Lat-long ellipsoid (sphere when semi-axes are equal) in part-local frame,
// then posed. Per-face albedo is sampled at the local centroid so the texture
// is rigidly attached to the part.
void add_ellipsoid(MeshBuilder& b, const RigidTransform& pose, const Vector3d& semi,
                   const Vector3d& tint) {
    int stacks = std::max(8, static_cast<int>(std::lround(48 * b.p.tessellation)));
    int slices = std::max(16, static_cast<int>(std::lround(96 * b.p.tessellation)));

    std::vector<std::vector<int>> idx(stacks + 1, std::vector<int>(slices));
    std::vector<std::vector<Vector3d>> local(stacks + 1, std::vector<Vector3d>(slices));
    for (int i = 0; i <= stacks; ++i) {
        double theta = M_PI * i / stacks;
        for (int j = 0; j < slices; ++j) {
            double phi = kTau * j / slices;
            Vector3d u(std::sin(theta) * std::cos(phi), std::cos(theta),
                       std::sin(theta) * std::sin(phi));
            Vector3d pl = u.cwiseProduct(semi);
            Vector3d nl(u.x() / semi.x(), u.y() / semi.y(), u.z() / semi.z());
            local[i][j] = pl;
            idx[i][j] = b.add_vertex(pose.apply(pl), pose.rotate(nl.normalized()));
        }
    }
    for (int i = 0; i < stacks; ++i) {
        for (int j = 0; j < slices; ++j) {
            int jn = (j + 1) % slices;
            Vector3d c0 = (local[i][j] + local[i][jn] + local[i + 1][j]) / 3.0;
            Vector3d c1 = (local[i + 1][j] + local[i][jn] + local[i + 1][jn]) / 3.0;
            if (i > 0)
                b.add_face(idx[i][j], idx[i][jn], idx[i + 1][j],
                           checker_albedo(b.p, tint, c0, -semi.y()));
            if (i + 1 < stacks)
                b.add_face(idx[i + 1][j], idx[i][jn], idx[i + 1][jn],
                           checker_albedo(b.p, tint, c1, -semi.y()));
        }
    }
}

// Capsule built directly at its posed endpoints: cylinder plus hemisphere
// caps, smooth normals throughout.
void add_capsule(MeshBuilder& b, const Vector3d& pa, const Vector3d& pb, double radius,
                 const Vector3d& tint) {
    int slices = std::max(12, static_cast<int>(std::lround(48 * b.p.tessellation)));
    int cyl_rings = std::max(4, static_cast<int>(std::lround(12 * b.p.tessellation)));
    int cap_rings = std::max(4, static_cast<int>(std::lround(16 * b.p.tessellation)));

    Vector3d w = (pb - pa).normalized();
    Vector3d ref = std::abs(w.y()) < 0.9 ? Vector3d(0, 1, 0) : Vector3d(1, 0, 0);
    Vector3d u = ref.cross(w).normalized();
    Vector3d v = w.cross(u);

    // Ring centers and latitudes walk pole-a -> cylinder -> pole-b.
    std::vector<std::vector<int>> rings;
    std::vector<std::vector<Vector3d>> ring_local;
    auto add_ring = [&](const Vector3d& center, double ring_r, const Vector3d& n_axis_comp,
                        double axial) {
        std::vector<int> ring(slices);
        std::vector<Vector3d> rl(slices);
        for (int j = 0; j < slices; ++j) {
            double phi = kTau * j / slices;
            Vector3d radial = u * std::cos(phi) + v * std::sin(phi);
            Vector3d pos = center + radial * ring_r;
            Vector3d n = (radial * ring_r + n_axis_comp).normalized();
            ring[j] = b.add_vertex(pos, n);
            rl[j] = Vector3d(ring_r * std::cos(phi), axial, ring_r * std::sin(phi));
        }
        rings.push_back(ring);
        ring_local.push_back(rl);
    };

    for (int i = cap_rings; i >= 1; --i) {  // bottom cap (around pa)
        double a = M_PI_2 * i / cap_rings;
        add_ring(pa - w * (radius * std::sin(a)), radius * std::cos(a),
                 -w * (radius * std::sin(a)), -radius * std::sin(a));
    }
    double len = (pb - pa).norm();
    for (int i = 0; i <= cyl_rings; ++i) {
        double t = len * i / cyl_rings;
        add_ring(pa + w * t, radius, Vector3d::Zero(), t);
    }
    for (int i = 1; i <= cap_rings; ++i) {  // top cap (around pb)
        double a = M_PI_2 * i / cap_rings;
        add_ring(pb + w * (radius * std::sin(a)), radius * std::cos(a),
                 w * (radius * std::sin(a)), len + radius * std::sin(a));
    }

    for (size_t i = 0; i + 1 < rings.size(); ++i) {
        for (int j = 0; j < slices; ++j) {
            int jn = (j + 1) % slices;
            Vector3d c0 = (ring_local[i][j] + ring_local[i][jn] + ring_local[i + 1][j]) / 3.0;
            Vector3d c1 = (ring_local[i + 1][j] + ring_local[i][jn] + ring_local[i + 1][jn]) / 3.0;
            b.add_face(rings[i][j], rings[i][jn], rings[i + 1][j],
                       checker_albedo(b.p, tint, c0, 0.0));
            b.add_face(rings[i + 1][j], rings[i][jn], rings[i + 1][jn],
                       checker_albedo(b.p, tint, c1, 0.0));
        }
    }
}

void add_marker_disc(MeshBuilder& b, const Vector3d& center, const Vector3d& normal,
                     double radius) {
    Vector3d n = normal.normalized();
    Vector3d ref = std::abs(n.y()) < 0.9 ? Vector3d(0, 1, 0) : Vector3d(1, 0, 0);
    Vector3d u = ref.cross(n).normalized();
    Vector3d v = n.cross(u);
    Vector3d c = center + n * kMarkerLift;

    const Vector3d red(1.0, 0.0, 0.0);
    int hub = b.add_vertex(c, n);
    int segs = 16;
    std::vector<int> rim(segs);
    for (int j = 0; j < segs; ++j) {
        double phi = kTau * j / segs;
        rim[j] = b.add_vertex(c + (u * std::cos(phi) + v * std::sin(phi)) * radius, n);
    }
    for (int j = 0; j < segs; ++j) b.add_face(hub, rim[j], rim[(j + 1) % segs], red, true);
}

}  // namespace

SyntheticScene::SyntheticScene(SceneParams params) : params_(params) {}

PartSet SyntheticScene::parts(int frame) const {
    double f = frame;
    double a = params_.anim_amplitude;
    Vector3d sway(a * std::sin(kTau * f / 120.0), 0.0, 0.6 * a * std::sin(kTau * f / 90.0 + 0.7));

    PartSet ps;
    ps.head_radius = kHeadRadius;
    double head_yaw = 0.12 * std::sin(kTau * f / 75.0);
    ps.head_pose = compose(
        RigidTransform::translate(kHeadCenter + sway +
                                  Vector3d(0, 0.01 * std::sin(kTau * f / 60.0), 0)),
        RigidTransform::yaw(head_yaw));

    ps.torso_semi = kTorsoSemi;
    ps.torso_pose = compose(RigidTransform::translate(kTorsoCenter + sway),
                            RigidTransform::yaw(0.05 * std::sin(kTau * f / 120.0)));

    ps.arm_radius = kArmRadius;
    for (int side = 0; side < 2; ++side) {
        double sx = side == 0 ? 1.0 : -1.0;
        double phase = side == 0 ? 0.0 : 1.3;
        Vector3d wiggle(0, 0.02 * std::sin(kTau * f / 45.0 + phase),
                        0.015 * std::sin(kTau * f / 70.0 + phase));
        Vector3d sh = kShoulder, hd = kHand;
        sh.x() *= sx;
        hd.x() *= sx;
        ps.arm_a[side] = sh + sway;
        ps.arm_b[side] = hd + sway + wiggle;
    }

    // Eye markers ride rigidly on the head, symmetric about its sagittal
    // plane, facing the front screen (-Z).
    double half_sep = params_.eye_separation / 2.0;
    double cos_el = std::cos(kEyeElevation);
    double sin_phi = std::clamp(half_sep / (kHeadRadius * cos_el), -1.0, 1.0);
    double phi = std::asin(sin_phi);
    ps.marker_radius = params_.marker_radius;
    ps.marker_lift = kMarkerLift;
    for (int side = 0; side < 2; ++side) {
        double s = side == 0 ? 1.0 : -1.0;
        Vector3d dir(std::sin(s * phi) * cos_el, std::sin(kEyeElevation),
                     -std::cos(s * phi) * cos_el);
        ps.markers[side] = ps.head_pose.apply(dir * kHeadRadius);
        ps.marker_normals[side] = ps.head_pose.rotate(dir);
    }
    return ps;
}

TriMesh SyntheticScene::figure_mesh(int frame) const {
    PartSet ps = parts(frame);
    MeshBuilder b(params_);
    add_ellipsoid(b, ps.head_pose, Vector3d(kHeadRadius, kHeadRadius, kHeadRadius), kHeadTint);
    add_ellipsoid(b, ps.torso_pose, ps.torso_semi, kTorsoTint);
    for (int side = 0; side < 2; ++side)
        add_capsule(b, ps.arm_a[side], ps.arm_b[side], ps.arm_radius, kArmTint);
    for (int side = 0; side < 2; ++side)
        add_marker_disc(b, ps.markers[side], ps.marker_normals[side], ps.marker_radius);
    return std::move(b.mesh);
}

TriMesh SyntheticScene::backdrop_mesh() const {
    MeshBuilder b(params_);
    double hw = params_.backdrop_width / 2.0, z = params_.backdrop_depth;
    Vector3d n(0, 0, -1);
    int v0 = b.add_vertex({-hw, 0, z}, n);
    int v1 = b.add_vertex({hw, 0, z}, n);
    int v2 = b.add_vertex({hw, 2.0, z}, n);
    int v3 = b.add_vertex({-hw, 2.0, z}, n);
    Vector3d gray(kBackdropGray, kBackdropGray, kBackdropGray);
    b.add_face(v0, v1, v2, gray, true);
    b.add_face(v0, v2, v3, gray, true);
    return std::move(b.mesh);
}

bool SyntheticScene::figure_inside(const CubeParams& cube, int frame) const {
    PartSet ps = parts(frame);
    double hw = cube.floor_w / 2.0;
    auto inside = [&](const Vector3d& p, double r) {
        return p.x() - r >= -hw && p.x() + r <= hw && p.z() - r >= 0 && p.z() + r <= cube.floor_d;
    };
    bool ok = inside(ps.head_pose.t, ps.head_radius);
    ok = ok && inside(ps.torso_pose.t, ps.torso_semi.maxCoeff());
    for (int s = 0; s < 2; ++s)
        ok = ok && inside(ps.arm_a[s], ps.arm_radius) && inside(ps.arm_b[s], ps.arm_radius);
    return ok;
}

namespace {

// Mean over the clamped (2r+1)^2 window, via a summed-area table.
ImageD box_mean(const ImageD& in, int radius) {
    const int w = in.width(), h = in.height();
    const size_t stride = w + 1;
    std::vector<double> sat(stride * (h + 1), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            sat[(y + 1) * stride + (x + 1)] = in.at(x, y) + sat[y * stride + (x + 1)] +
                                              sat[(y + 1) * stride + x] - sat[y * stride + x];
    ImageD out(w, h);
    for (int y = 0; y < h; ++y) {
        int y0 = std::max(0, y - radius), y1 = std::min(h - 1, y + radius);
        for (int x = 0; x < w; ++x) {
            int x0 = std::max(0, x - radius), x1 = std::min(w - 1, x + radius);
            double s = sat[(y1 + 1) * stride + (x1 + 1)] - sat[y0 * stride + (x1 + 1)] -
                       sat[(y1 + 1) * stride + x0] + sat[y0 * stride + x0];
            out.at(x, y) = s / ((x1 - x0 + 1) * (y1 - y0 + 1));
        }
    }
    return out;
}

// Zero-mean Gaussian field low-passed to ~65 px correlation length, rescaled
// so its realized standard deviation over the image is exactly `std`.
ImageD smooth_field(Rng& rng, int w, int h, double std_target) {
    ImageD field(w, h);
    for (double& v : field.pixels()) v = rng.gaussian();
    field = box_mean(box_mean(field, 24), 24);
    double mean = 0.0, mean2 = 0.0;
    for (double v : field.pixels()) {
        mean += v;
        mean2 += v * v;
    }
    mean /= field.size();
    mean2 /= field.size();
    double s = std::sqrt(std::max(1e-30, mean2 - mean * mean));
    for (double& v : field.pixels()) v = (v - mean) / s * std_target;
    return field;
}

// Variance split of the depth error. Identical co-located sensors measure the
// range systematics of a scene alike, so the largest term is a smooth error
// field anchored in world space and shared by all cameras (averaging across
// views cannot cancel it). A smaller smooth per-camera image field covers
// unit-to-unit variation, and a few millimeters of per-pixel jitter match the
// random error of consumer depth cameras at short range. The pooled std of
// the sum is exactly depth_std.
constexpr double kDepthSharedShare = 0.90;   // world-anchored, all cameras
constexpr double kDepthViewShare = 0.09;     // per-camera image field
constexpr double kDepthJitterShare = 0.010;  // independent per pixel

// World lattice for the shared field: node values hashed from (seed, frame,
// node index), C1 smoothstep-trilinear interpolation, per-point weight
// normalization for an exact marginal std everywhere.
constexpr double kSharedCell = 0.25;  // meters
const Vector3d kSharedLo(-2.5, -1.0, -2.0);
constexpr int kSharedNx = 22, kSharedNy = 18, kSharedNz = 34;

uint64_t hash_mix(uint64_t h, uint64_t v) {
    h += v * 0x9E3779B97F4A7C15ull;
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
    h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
    return h ^ (h >> 31);
}

struct SharedField {
    std::vector<double> nodes;

    SharedField(uint64_t seed, uint64_t frame_key) : nodes(kSharedNx * kSharedNy * kSharedNz) {
        for (int iz = 0; iz < kSharedNz; ++iz)
            for (int iy = 0; iy < kSharedNy; ++iy)
                for (int ix = 0; ix < kSharedNx; ++ix) {
                    uint64_t h = hash_mix(hash_mix(hash_mix(hash_mix(seed, frame_key), ix), iy), iz);
                    uint64_t h2 = hash_mix(h, 0x5EED);
                    double u1 = ((h >> 11) + 1) * 0x1.0p-53;
                    double u2 = (h2 >> 11) * 0x1.0p-53;
                    nodes[(iz * kSharedNy + iy) * kSharedNx + ix] =
                        std::sqrt(-2.0 * std::log(u1)) * std::cos(kTau * u2);
                }
    }

    double at(const Vector3d& X) const {
        double ws[3][2];
        int base[3];
        for (int a = 0; a < 3; ++a) {
            double g = (X[a] - kSharedLo[a]) / kSharedCell;
            int dim = a == 0 ? kSharedNx : (a == 1 ? kSharedNy : kSharedNz);
            g = std::clamp(g, 0.0, dim - 1.001);
            base[a] = static_cast<int>(g);
            double f = g - base[a];
            double s = f * f * (3.0 - 2.0 * f);
            ws[a][0] = 1.0 - s;
            ws[a][1] = s;
        }
        double acc = 0.0, norm = 0.0;
        for (int dz = 0; dz < 2; ++dz)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    double w = ws[0][dx] * ws[1][dy] * ws[2][dz];
                    acc += w * nodes[((base[2] + dz) * kSharedNy + base[1] + dy) * kSharedNx +
                                     base[0] + dx];
                    norm += w * w;
                }
        return acc / std::sqrt(norm);
    }
};

void apply_noise(RgbdFrame& f, const CameraModel& view, const NoiseModel& noise,
                 uint64_t stream_frame) {
    if (noise.depth_std == 0.0 && noise.dropout == 0.0 && noise.color_std == 0.0) return;
    Rng rng = Rng::fork(noise.seed, static_cast<uint64_t>(f.camera_id), stream_frame);
    const int w = f.depth.width(), h = f.depth.height();
    ImageD view_field;
    std::unique_ptr<SharedField> shared;
    double jitter_std = 0.0, shared_std = 0.0;
    RigidTransform inv = view.extrinsics.inverse();
    if (noise.depth_std > 0.0) {
        view_field = smooth_field(rng, w, h, noise.depth_std * std::sqrt(kDepthViewShare));
        shared = std::make_unique<SharedField>(noise.seed, stream_frame);
        shared_std = noise.depth_std * std::sqrt(kDepthSharedShare);
        jitter_std = noise.depth_std * std::sqrt(kDepthJitterShare);
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float& d = f.depth.at(x, y);
            if (d > 0.0f) {
                double err = jitter_std * rng.gaussian();
                if (shared) {
                    Vector3d dir = inv.R * Vector3d((x - view.cx) / view.fx,
                                                    (y - view.cy) / view.fy, 1.0);
                    err += view_field.at(x, y) + shared_std * shared->at(inv.t + d * dir);
                }
                // Readings pushed outside the sensor's working range come back
                // invalid rather than clamped.
                double nd = d + err;
                d = (nd > 0.1 && nd < 10.0) ? static_cast<float>(nd) : 0.0f;
                if (rng.uniform() < noise.dropout) d = 0.0f;
            }
            for (int c = 0; c < 3; ++c) {
                double v = f.color.at(x, y, c) + noise.color_std * rng.gaussian();
                f.color.at(x, y, c) =
                    static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
}

RgbdFrame render_scene(const SyntheticScene& scene, const CameraModel& cam, int camera_id,
                       int frame_index, const NoiseModel& noise, bool with_figure,
                       uint64_t stream_frame) {
    TriMesh mesh = scene.backdrop_mesh();
    if (with_figure) mesh.append(scene.figure_mesh(frame_index));

    // Mounting error: a fixed small pose offset per (seed, camera), applied in
    // the camera frame so it is independent of where the camera points.
    CameraModel view = cam;
    if (noise.extrinsic_rot_mrad > 0.0 || noise.extrinsic_trans_mm > 0.0) {
        Rng rng = Rng::fork(noise.seed, static_cast<uint64_t>(camera_id), 0xECA1u);
        Vector3d axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
        double angle = noise.extrinsic_rot_mrad * 1e-3 * rng.gaussian();
        Vector3d dt(rng.gaussian(), rng.gaussian(), rng.gaussian());
        RigidTransform pert;
        pert.R = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
        pert.t = dt * (noise.extrinsic_trans_mm * 1e-3);
        view.extrinsics = compose(pert, cam.extrinsics);
    }

    RgbdFrame f;
    f.camera_id = camera_id;
    f.frame_index = frame_index;
    f.timestamp_ms = frame_index * 1000.0 / 30.0;
    rasterize(mesh, view, kLightDir, kAmbient, f.depth, &f.color);

    // Uncovered pixels show the clear color, matching the emissive backdrop.
    uint8_t clear = static_cast<uint8_t>(std::lround(kBackdropGray * 255.0));
    for (int y = 0; y < f.depth.height(); ++y)
        for (int x = 0; x < f.depth.width(); ++x)
            if (f.depth.at(x, y) == 0.0f)
                for (int c = 0; c < 3; ++c) f.color.at(x, y, c) = clear;

    apply_noise(f, view, noise, stream_frame);
    return f;
}

}  // namespace

RgbdFrame render_rgbd(const SyntheticScene& scene, const CameraModel& cam, int camera_id,
                      int frame_index, const NoiseModel& noise) {
    return render_scene(scene, cam, camera_id, frame_index, noise, true,
                        static_cast<uint64_t>(frame_index));
}

RgbdFrame render_background(const SyntheticScene& scene, const CameraModel& cam, int camera_id,
                            const NoiseModel& noise) {
    // Dedicated noise stream index so the empty-room capture differs from any
    // live frame's noise draw.
    return render_scene(scene, cam, camera_id, 0, noise, false, 0xB4CDu);
}

RgbdFrame render_figure_reference(const SyntheticScene& scene, const CameraModel& cam,
                                  int frame_index) {
    RgbdFrame f;
    f.camera_id = -1;
    f.frame_index = frame_index;
    f.timestamp_ms = frame_index * 1000.0 / 30.0;
    rasterize(scene.figure_mesh(frame_index), cam, kLightDir, kAmbient, f.depth, &f.color);
    return f;
}

int bt601_gray(uint8_t r, uint8_t g, uint8_t b) {
    return static_cast<int>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

ImageU8 segment_foreground(const RgbdFrame& frame, const RgbdFrame& background,
                           double depth_thresh, double color_thresh) {
    if (!frame.color.same_shape(background.color) || !frame.depth.same_shape(background.depth))
        throw DimensionMismatch("frame/background shapes differ");
    const int w = frame.depth.width(), h = frame.depth.height();
    ImageU8 mask(w, h, 1, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float d = frame.depth.at(x, y), db = background.depth.at(x, y);
            bool fg = false;
            if (d > 0.0f && db > 0.0f && std::abs(d - db) > depth_thresh) fg = true;
            if (!fg) {
                int g = bt601_gray(frame.color.at(x, y, 0), frame.color.at(x, y, 1),
                                   frame.color.at(x, y, 2));
                int gb = bt601_gray(background.color.at(x, y, 0), background.color.at(x, y, 1),
                                    background.color.at(x, y, 2));
                fg = std::abs(g - gb) > color_thresh;
            }
            mask.at(x, y) = fg ? 255 : 0;
        }
    }
    return mask;
}

}  // namespace vcube
