#include "vcube/geometry.hpp"

#include <cmath>

namespace vcube {

RigidTransform RigidTransform::yaw(double radians) {
    RigidTransform r;
    double c = std::cos(radians), s = std::sin(radians);
    // Rotation about +Y: maps +Z toward +X for positive angles.
    r.R << c, 0, s,
           0, 1, 0,
          -s, 0, c;
    return r;
}

RigidTransform RigidTransform::translate(const Vector3d& t) {
    RigidTransform r;
    r.t = t;
    return r;
}

RigidTransform RigidTransform::inverse() const {
    RigidTransform r;
    r.R = R.transpose();
    r.t = -(R.transpose() * t);
    return r;
}

bool RigidTransform::is_rigid(double tol) const {
    Matrix3d err = R.transpose() * R - Matrix3d::Identity();
    return err.cwiseAbs().maxCoeff() <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

bool RigidTransform::is_floor_motion(double tol) const {
    if (!is_rigid(std::max(tol, 1e-9))) return false;
    Vector3d up(0, 1, 0);
    return (R * up - up).cwiseAbs().maxCoeff() <= tol && std::abs(t.y()) <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform r;
    r.R = a.R * b.R;
    r.t = a.R * b.t + a.t;
    return r;
}

Vector2d CameraModel::project(const Vector3d& p_local, double* depth) const {
    Vector3d pc = extrinsics.apply(p_local);
    if (pc.z() <= 1e-9) throw BehindCamera("point at or behind the camera plane");
    if (depth) *depth = pc.z();
    return {fx * pc.x() / pc.z() + cx, fy * pc.y() / pc.z() + cy};
}

Vector3d CameraModel::unproject(const Vector2d& pixel, double depth) const {
    Vector3d pc((pixel.x() - cx) / fx * depth, (pixel.y() - cy) / fy * depth, depth);
    return extrinsics.inverse().apply(pc);
}

CameraModel CameraModel::quarter() const {
    CameraModel q = *this;
    q.fx = fx / 4.0;
    q.fy = fy / 4.0;
    q.cx = (cx - 2.0) / 4.0;
    q.cy = (cy - 2.0) / 4.0;
    q.width = width / 4;
    q.height = height / 4;
    return q;
}

CameraModel CameraModel::look_at(const Vector3d& position, const Vector3d& target,
                                 double fx, double fy, double cx, double cy, int w, int h) {
    Vector3d fwd = target - position;
    double n = fwd.norm();
    if (n < 1e-12) throw DegenerateFrustum("look_at target coincides with camera position");
    fwd /= n;
    Vector3d world_up(0, 1, 0);
    Vector3d right = world_up.cross(fwd);
    if (right.norm() < 1e-9) {
        // Looking straight up/down: pick an arbitrary horizontal right axis.
        right = Vector3d(1, 0, 0).cross(fwd);
    }
    right.normalize();
    Vector3d down = fwd.cross(right);  // y axis points down in image space

    CameraModel cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = cx;
    cam.cy = cy;
    cam.width = w;
    cam.height = h;
    cam.extrinsics.R.row(0) = right.transpose();
    cam.extrinsics.R.row(1) = down.transpose();
    cam.extrinsics.R.row(2) = fwd.transpose();
    cam.extrinsics.t = -(cam.extrinsics.R * position);
    return cam;
}

ScreenRect ScreenRect::make(const Vector3d& top_left, const Vector3d& right_dir,
                            const Vector3d& down_dir, double width_m, double height_m,
                            int res_x, int res_y) {
    ScreenRect s;
    Vector3d r = right_dir.normalized() * width_m;
    Vector3d d = down_dir.normalized() * height_m;
    s.corners = {top_left, top_left + r, top_left + r + d, top_left + d};
    s.res_x = res_x;
    s.res_y = res_y;
    return s;
}

Vector3d ScreenRect::point_at(double u_px, double v_px) const {
    Vector3d r = corners[1] - corners[0];
    Vector3d d = corners[3] - corners[0];
    return corners[0] + r * (u_px / res_x) + d * (v_px / res_y);
}

bool ScreenRect::is_rectangle(double tol) const {
    Vector3d r = corners[1] - corners[0];
    Vector3d d = corners[3] - corners[0];
    if (r.norm() < tol || d.norm() < tol) return false;
    if (std::abs(r.dot(d)) > tol * r.norm() * d.norm()) return false;
    Vector3d expect = corners[0] + r + d;
    return (corners[2] - expect).norm() <= tol;
}

Matrix4d offaxis_view_projection(const Vector3d& viewpoint, const ScreenRect& screen) {
    const Vector3d c0 = screen.corners[0];
    const Vector3d r_hat = screen.right_axis();
    const Vector3d d_hat = screen.down_axis();
    Vector3d n = screen.normal();
    double h = n.dot(viewpoint - c0);
    if (std::abs(h) < 1e-6)
        throw DegenerateFrustum("viewpoint lies in the screen plane");
    if (h < 0) {  // orient the normal toward the viewer side
        n = -n;
        h = -h;
    }

    // For a point X, with w(X) = n.(E - X):
    //   u_m(X) = [a (n.E - n.X) + h (r.X - r.E)] / w,  a = (E - c0).r
    // and likewise for v with the down axis. u_m is meters from the top-left
    // corner; scale to pixels.
    const Vector3d e = viewpoint;
    double a = (e - c0).dot(r_hat);
    double b = (e - c0).dot(d_hat);
    double su = screen.res_x / screen.width_m();
    double sv = screen.res_y / screen.height_m();

    Matrix4d m;
    m.row(0) << su * (h * r_hat - a * n).transpose(), su * (a * n.dot(e) - h * r_hat.dot(e));
    m.row(1) << sv * (h * d_hat - b * n).transpose(), sv * (b * n.dot(e) - h * d_hat.dot(e));
    m.row(2) << -n.transpose(), n.dot(c0);
    m.row(3) << -n.transpose(), n.dot(e);
    return m;
}

Vector2d offaxis_project(const Vector3d& viewpoint, const ScreenRect& screen,
                         const Vector3d& point) {
    Matrix4d m = offaxis_view_projection(viewpoint, screen);
    Eigen::Vector4d q = m * point.homogeneous();
    if (q.w() <= 1e-12) throw BehindCamera("point on or behind the eye plane");
    return {q.x() / q.w(), q.y() / q.w()};
}

}  // namespace vcube
