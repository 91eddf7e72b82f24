#pragma once

#include <Eigen/Dense>
#include <array>

#include "vcube/error.hpp"

namespace vcube {

using Eigen::Matrix3d;
using Eigen::Matrix4d;
using Eigen::Vector2d;
using Eigen::Vector3d;

// Proper rigid motion p -> R p + t. R is kept as a matrix; yaw-only placements
// build it from an angle about +Y.
struct RigidTransform {
    Matrix3d R = Matrix3d::Identity();
    Vector3d t = Vector3d::Zero();

    static RigidTransform identity() { return {}; }
    static RigidTransform yaw(double radians);
    static RigidTransform translate(const Vector3d& t);

    Vector3d apply(const Vector3d& p) const { return R * p + t; }
    Vector3d rotate(const Vector3d& v) const { return R * v; }
    RigidTransform inverse() const;

    // Orthonormal with det +1 within tol.
    bool is_rigid(double tol = 1e-9) const;
    // Rotation fixes +Y and translation stays on the floor plane (yaw-only).
    bool is_floor_motion(double tol = 1e-9) const;
};

// compose(a, b): apply b first, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

// Pinhole camera. `extrinsics` maps cube-local points into the camera frame
// (x right, y down, z forward); pixel centers sit at integer coordinates.
struct CameraModel {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;
    RigidTransform extrinsics;

    // Throws BehindCamera when the camera-frame z is <= 1e-9.
    Vector2d project(const Vector3d& p_local, double* depth = nullptr) const;
    Vector3d unproject(const Vector2d& pixel, double depth) const;

    Vector3d center() const { return extrinsics.inverse().t; }
    Vector3d optical_axis() const { return extrinsics.R.row(2).transpose(); }
    bool in_bounds(const Vector2d& px, double margin = 0.0) const {
        return px.x() >= -margin && px.x() <= width - 1 + margin && px.y() >= -margin &&
               px.y() <= height - 1 + margin;
    }

    // Quarter-resolution twin. Pixel (u,v) of the result sees the same ray as
    // full-resolution pixel (4u+2, 4v+2), so stride-4 downsampling at offset
    // (2,2) is geometrically exact.
    CameraModel quarter() const;

    static CameraModel look_at(const Vector3d& position, const Vector3d& target,
                               double fx, double fy, double cx, double cy, int w, int h);
};

// Physical screen rectangle with a pixel grid. Corner order: top-left,
// top-right, bottom-right, bottom-left as seen by a viewer facing the screen.
// Continuous pixel coordinates run from (0,0) at the top-left corner to
// (res_x, res_y) at the bottom-right corner.
struct ScreenRect {
    std::array<Vector3d, 4> corners;
    int res_x = 0, res_y = 0;

    static ScreenRect make(const Vector3d& top_left, const Vector3d& right_dir,
                           const Vector3d& down_dir, double width_m, double height_m,
                           int res_x, int res_y);

    Vector3d right_axis() const { return (corners[1] - corners[0]).normalized(); }
    Vector3d down_axis() const { return (corners[3] - corners[0]).normalized(); }
    Vector3d normal() const { return right_axis().cross(down_axis()).normalized(); }
    double width_m() const { return (corners[1] - corners[0]).norm(); }
    double height_m() const { return (corners[3] - corners[0]).norm(); }

    Vector3d point_at(double u_px, double v_px) const;
    bool is_rectangle(double tol = 1e-9) const;
};

// Projective map for a tracked-viewpoint display: apex at `viewpoint`, image
// rectangle equal to the physical screen. Rows of the result give, for a
// homogeneous cube-local point [X;1]:
//   row0/row3 = screen pixel u, row1/row3 = v,
//   row2/row3 = distance behind the screen plane over eye-plane distance.
// Points on the screen surface are fixed points of the pixel mapping.
// Throws DegenerateFrustum when the viewpoint is closer than 1e-6 m to the
// screen plane.
Matrix4d offaxis_view_projection(const Vector3d& viewpoint, const ScreenRect& screen);

// Convenience wrapper applying the matrix; w <= 0 (point on or behind the eye
// plane) throws BehindCamera.
Vector2d offaxis_project(const Vector3d& viewpoint, const ScreenRect& screen,
                         const Vector3d& point);

}  // namespace vcube
