#include "vcube/gaze_track.hpp"

#include <cstdio>

#include "vcube/rng.hpp"

namespace vcube {

namespace {

// Salt so detector noise never shares a stream with render noise at the same
// (seed, camera, frame) key.
constexpr uint64_t kDetectorSalt = 0xE7E5u;

std::optional<Eigen::Vector2d> detect_marker(const CameraModel& cam, const Vector3d& marker,
                                             const Vector3d& normal, double noise_px,
                                             Rng& rng) {
    // An eye facing away from the camera cannot be detected.
    if (normal.dot(cam.center() - marker) <= 0.0) return std::nullopt;
    Eigen::Vector2d px;
    try {
        px = cam.project(marker);
    } catch (const BehindCamera&) {
        return std::nullopt;
    }
    if (noise_px > 0.0) {
        px.x() += noise_px * rng.gaussian();
        px.y() += noise_px * rng.gaussian();
    }
    if (!cam.in_bounds(px)) return std::nullopt;
    return px;
}

}  // namespace

EyeObservation observe_eyes(const SyntheticScene& scene, const CameraModel& cam, int camera_id,
                            int frame_index, double detector_noise_px, bool occluded,
                            uint64_t seed) {
    EyeObservation obs;
    obs.camera_id = camera_id;
    obs.frame_index = frame_index;
    if (occluded) return obs;

    PartSet ps = scene.parts(frame_index);
    Rng rng = Rng::fork(seed, kDetectorSalt + static_cast<uint64_t>(camera_id),
                        static_cast<uint64_t>(frame_index));
    obs.left = detect_marker(cam, ps.markers[0], ps.marker_normals[0], detector_noise_px, rng);
    obs.right = detect_marker(cam, ps.markers[1], ps.marker_normals[1], detector_noise_px, rng);
    return obs;
}

std::vector<EyeObservation> observe_all(const SyntheticScene& scene,
                                        const std::vector<CameraModel>& cams, int frame_index,
                                        double detector_noise_px,
                                        const std::vector<bool>& occluded, uint64_t seed) {
    std::vector<EyeObservation> out;
    out.reserve(cams.size());
    for (size_t i = 0; i < cams.size(); ++i) {
        bool occ = i < occluded.size() && occluded[i];
        out.push_back(observe_eyes(scene, cams[i], static_cast<int>(i), frame_index,
                                   detector_noise_px, occ, seed));
    }
    return out;
}

namespace {

// DLT estimate of one 3D point from >=2 pixel observations.
std::optional<Vector3d> dlt_point(
    const std::vector<std::pair<const CameraModel*, Eigen::Vector2d>>& views) {
    if (views.size() < 2) return std::nullopt;
    Eigen::MatrixXd A(2 * views.size(), 4);
    for (size_t i = 0; i < views.size(); ++i) {
        const CameraModel& c = *views[i].first;
        Eigen::Matrix<double, 3, 4> P;
        P.leftCols<3>() = c.extrinsics.R;
        P.col(3) = c.extrinsics.t;
        Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
        K(0, 0) = c.fx;
        K(1, 1) = c.fy;
        K(0, 2) = c.cx;
        K(1, 2) = c.cy;
        P = K * P;
        A.row(2 * i) = views[i].second.x() * P.row(2) - P.row(0);
        A.row(2 * i + 1) = views[i].second.y() * P.row(2) - P.row(1);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    Eigen::Vector4d h = svd.matrixV().col(3);
    if (std::abs(h(3)) < 1e-12) return std::nullopt;
    return Vector3d(h.head<3>() / h(3));
}

}  // namespace

Viewpoint triangulate(const std::vector<EyeObservation>& observations,
                      const std::vector<CameraModel>& cams, const CubeParams& cube) {
    Viewpoint vp;
    if (!observations.empty()) vp.frame_index = observations.front().frame_index;

    Vector3d eye[2];
    for (int e = 0; e < 2; ++e) {
        std::vector<std::pair<const CameraModel*, Eigen::Vector2d>> views;
        for (const auto& o : observations) {
            const auto& px = e == 0 ? o.left : o.right;
            if (!px || o.camera_id < 0 || o.camera_id >= static_cast<int>(cams.size()))
                continue;
            views.emplace_back(&cams[o.camera_id], *px);
        }
        auto p = dlt_point(views);
        if (!p) return vp;  // valid stays false
        eye[e] = *p;
    }

    vp.position = (eye[0] + eye[1]) / 2.0;
    double hw = cube.floor_w / 2.0;
    vp.valid = vp.position.x() >= -hw && vp.position.x() <= hw && vp.position.z() >= 0.0 &&
               vp.position.z() <= cube.floor_d && vp.position.y() >= 0.0 &&
               vp.position.y() <= 2.5;
    return vp;
}

std::string viewpoint_csv(const Viewpoint& vp) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d,%.9f,%.9f,%.9f,%d", vp.frame_index, vp.position.x(),
                  vp.position.y(), vp.position.z(), vp.valid ? 1 : 0);
    return buf;
}

}  // namespace vcube
