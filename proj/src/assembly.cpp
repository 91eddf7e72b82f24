#include "vcube/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace vcube {

namespace {

constexpr double kInchToMeter = 0.0254;

CameraModel rig_camera(const CubeParams& p, const Vector3d& pos, const Vector3d& seat_eye) {
    return CameraModel::look_at(pos, seat_eye, p.cam_fx, p.cam_fy, p.cam_res_x / 2.0,
                                p.cam_res_y / 2.0, p.cam_res_x, p.cam_res_y);
}

}  // namespace

CubeSpec CubeSpec::standard(const CubeParams& p) {
    double diag = p.screen_diag_in * kInchToMeter;
    double w = diag * 16.0 / std::hypot(16.0, 9.0);
    double h = diag * 9.0 / std::hypot(16.0, 9.0);
    double y_bot = p.screen_bottom, y_top = p.screen_bottom + h;
    double hw = w / 2.0;

    CubeSpec c;
    c.params = p;
    c.seat = p.seat;

    // Front screen occupies the z=0 wall; a viewer at +Z sees pixel u grow
    // toward -X and v grow downward.
    c.front = ScreenRect::make({hw, y_top, 0}, {-1, 0, 0}, {0, -1, 0}, w, h,
                               p.screen_res_x, p.screen_res_y);
    // Side screens are perpendicular to the front one, sharing its vertical
    // edges and extending into the room.
    c.left = ScreenRect::make({hw, y_top, w}, {0, 0, -1}, {0, -1, 0}, w, h,
                              p.screen_res_x, p.screen_res_y);
    c.right = ScreenRect::make({-hw, y_top, 0}, {0, 0, 1}, {0, -1, 0}, w, h,
                               p.screen_res_x, p.screen_res_y);

    Vector3d eye = c.seat_eye();
    // ids: 0 bottom-left, 1 bottom-mid, 2 bottom-right, 3 top-left,
    // 4 top-mid, 5 top-right (left/right in cube-local X).
    const double xs[3] = {-hw, 0.0, hw};
    for (double y : {y_bot, y_top})
        for (double x : xs) c.cameras.push_back(rig_camera(p, {x, y, 0.0}, eye));
    return c;
}

const ScreenRect& CubeSpec::screen(int idx) const {
    switch (idx) {
        case 0: return front;
        case 1: return left;
        case 2: return right;
        default: throw DimensionMismatch("screen index out of range");
    }
}

std::array<Vector2d, 4> CubeSpec::footprint() const {
    double hw = params.floor_w / 2.0, d = params.floor_d;
    return {Vector2d(-hw, 0), Vector2d(hw, 0), Vector2d(hw, d), Vector2d(-hw, d)};
}

bool CubeSpec::seat_in_footprint(double tol) const {
    double hw = params.floor_w / 2.0;
    return seat.x() >= -hw - tol && seat.x() <= hw + tol && seat.z() >= -tol &&
           seat.z() <= params.floor_d + tol;
}

bool CubeSpec::cameras_face_seat() const {
    for (const auto& cam : cameras) {
        Vector3d to_seat = seat_eye() - cam.center();
        if (cam.optical_axis().dot(to_seat) <= 0) return false;
    }
    return true;
}

const PlacedCube& AssemblyLayout::cube(int id) const {
    for (const auto& c : cubes)
        if (c.id == id) return c;
    throw UnknownCube("no cube with id " + std::to_string(id));
}

AssemblyLayout AssemblyLayout::face_to_face(const CubeSpec& spec, double gap) {
    AssemblyLayout l;
    l.topology = "face_to_face";
    l.cubes.push_back({0, spec, RigidTransform::identity()});
    RigidTransform m = compose(RigidTransform::translate({0, 0, -gap}), RigidTransform::yaw(M_PI));
    l.cubes.push_back({1, spec, m});
    return l;
}

AssemblyLayout AssemblyLayout::side_by_side(const CubeSpec& spec, double overlap) {
    AssemblyLayout l;
    l.topology = "side_by_side";
    l.cubes.push_back({0, spec, RigidTransform::identity()});
    l.cubes.push_back({1, spec, RigidTransform::translate({spec.params.floor_w - overlap, 0, 0})});
    return l;
}

AssemblyLayout AssemblyLayout::round_table(const CubeSpec& spec, int n, double seat_radius) {
    if (n < 2) throw InvalidLayout("round table needs at least two cubes");
    AssemblyLayout l;
    l.topology = "round_table";
    for (int i = 0; i < n; ++i) {
        double theta = 2.0 * M_PI * i / n;
        RigidTransform r = RigidTransform::yaw(theta);
        // Place the cube so its seat sits on a circle of seat_radius around
        // the global origin, facing the center.
        Vector3d out = r.rotate({0, 0, 1});
        RigidTransform m = r;
        m.t = (seat_radius - spec.seat.z()) * out;
        l.cubes.push_back({i, spec, m});
    }
    return l;
}

Vector3d cube_to_global(const AssemblyLayout& layout, int cube_id, const Vector3d& p) {
    return layout.cube(cube_id).to_global.apply(p);
}

Vector3d global_to_cube(const AssemblyLayout& layout, int cube_id, const Vector3d& p) {
    return layout.cube(cube_id).to_global.inverse().apply(p);
}

Vector3d viewpoint_transfer(const AssemblyLayout& layout, int sender_id, int receiver_id,
                            const Vector3d& viewpoint_receiver_local) {
    const RigidTransform& to_g = layout.cube(receiver_id).to_global;
    const RigidTransform& from_g = layout.cube(sender_id).to_global;
    return from_g.inverse().apply(to_g.apply(viewpoint_receiver_local));
}

std::vector<int> select_input_cameras(const CubeSpec& spec, const Vector3d& viewpoint,
                                      int count) {
    Vector3d anchor = spec.seat_eye();
    Vector3d vp_ray = anchor - viewpoint;
    double vn = vp_ray.norm();
    if (vn < 1e-12) throw DegenerateFrustum("viewpoint coincides with the seat eye");
    vp_ray /= vn;

    std::vector<std::pair<double, int>> ranked;
    for (size_t i = 0; i < spec.cameras.size(); ++i) {
        Vector3d cam_ray = (anchor - spec.cameras[i].center()).normalized();
        double d = std::clamp(cam_ray.dot(vp_ray), -1.0, 1.0);
        ranked.emplace_back(std::acos(d), static_cast<int>(i));
    }
    std::sort(ranked.begin(), ranked.end());  // (angle, id) ascending
    count = std::min<int>(count, static_cast<int>(ranked.size()));
    std::vector<int> ids(count);
    for (int i = 0; i < count; ++i) ids[i] = ranked[i].second;
    return ids;
}

namespace {

// Strictly-inside test against a convex CCW polygon; boundary counts as inside
// so that a seat on a wall still registers as a violation.
bool point_in_convex(const std::array<Vector2d, 4>& poly, const Vector2d& p, double tol) {
    for (size_t i = 0; i < poly.size(); ++i) {
        Vector2d a = poly[i], b = poly[(i + 1) % poly.size()];
        double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
        if (cross < -tol) return false;
    }
    return true;
}

}  // namespace

std::vector<LayoutViolation> validate_layout(const AssemblyLayout& layout) {
    std::vector<LayoutViolation> out;
    for (const auto& c : layout.cubes) {
        if (!c.to_global.is_floor_motion(1e-9))
            out.push_back({c.id, c.id, "floor-motion",
                           "placement of cube " + std::to_string(c.id) +
                               " is not a yaw-plus-floor-translation"});
    }
    for (const auto& a : layout.cubes) {
        Vector3d seat_g = a.to_global.apply(a.spec.seat);
        for (const auto& b : layout.cubes) {
            if (a.id == b.id) continue;
            // Seat of a, expressed in b's frame, against b's floor rectangle.
            Vector3d seat_in_b = b.to_global.inverse().apply(seat_g);
            std::array<Vector2d, 4> fp = b.spec.footprint();
            if (point_in_convex(fp, {seat_in_b.x(), seat_in_b.z()}, 1e-12))
                out.push_back({a.id, b.id, "seat-overlap",
                               "seat of cube " + std::to_string(a.id) +
                                   " lies inside the footprint of cube " + std::to_string(b.id)});
        }
    }
    return out;
}

}  // namespace vcube
