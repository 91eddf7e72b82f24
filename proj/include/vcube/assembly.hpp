#pragma once

#include <string>
#include <vector>

#include "vcube/geometry.hpp"

namespace vcube {

// Build parameters for one instrumented cubicle. Cube-local frame: origin at
// the foot of the front screen's central vertical line, X along the front
// screen rows, Y up, Z = X x Y pointing from the front wall toward the seat.
struct CubeParams {
    double floor_w = 1.6;          // extent along X, centered on the origin
    double floor_d = 2.0;          // extent along Z, starting at the front wall
    double screen_diag_in = 65.0;  // 16:9 panel diagonal
    double screen_bottom = 0.7;    // height of the bottom screen edge
    int screen_res_x = 1280;
    int screen_res_y = 960;
    Vector3d seat{0.0, 0.0, 1.0};  // floor-level seat anchor
    double eye_height = 1.2;       // seated eye height above the seat anchor
    double cam_fx = 800.0;
    double cam_fy = 800.0;
    int cam_res_x = 1280;
    int cam_res_y = 960;
};

// One cubicle: floor footprint, three screens (front plus two sides joined at
// the front screen's vertical edges), six RGBD cameras on the front wall at
// the screen corners and the top/bottom edge midpoints, all aimed at the
// seated eye position.
struct CubeSpec {
    CubeParams params;
    ScreenRect front, left, right;      // "left" is the seated user's left (+X)
    std::vector<CameraModel> cameras;   // ids 0..5 by index
    Vector3d seat;

    static CubeSpec standard(const CubeParams& p = {});

    Vector3d seat_eye() const { return seat + Vector3d(0, params.eye_height, 0); }
    const ScreenRect& screen(int idx) const;  // 0 front, 1 left, 2 right
    // Floor footprint corners in cube-local XZ, counter-clockwise.
    std::array<Vector2d, 4> footprint() const;

    // Invariant checks used by tests and `validate`.
    bool seat_in_footprint(double tol = 0.0) const;
    bool cameras_face_seat() const;
};

struct PlacedCube {
    int id = 0;
    CubeSpec spec;
    RigidTransform to_global;  // yaw-only floor motion
};

struct AssemblyLayout {
    std::string topology;  // face_to_face | side_by_side | round_table | custom
    std::vector<PlacedCube> cubes;

    const PlacedCube& cube(int id) const;  // throws UnknownCube

    static AssemblyLayout face_to_face(const CubeSpec& spec, double gap = 0.0);
    static AssemblyLayout side_by_side(const CubeSpec& spec, double overlap = 0.4);
    static AssemblyLayout round_table(const CubeSpec& spec, int n = 3, double seat_radius = 1.2);
};

Vector3d cube_to_global(const AssemblyLayout& layout, int cube_id, const Vector3d& p);
Vector3d global_to_cube(const AssemblyLayout& layout, int cube_id, const Vector3d& p);

// Maps a viewpoint expressed in the receiver's cube frame into the sender's
// cube frame, through the shared global frame.
Vector3d viewpoint_transfer(const AssemblyLayout& layout, int sender_id, int receiver_id,
                            const Vector3d& viewpoint_receiver_local);

// Ranks cameras by the angle between the camera->seat-eye ray and the
// viewpoint->seat-eye ray and returns the `count` best ids, ascending-id on
// ties. `viewpoint` is sender-cube-local.
std::vector<int> select_input_cameras(const CubeSpec& spec, const Vector3d& viewpoint,
                                      int count = 4);

struct LayoutViolation {
    int cube_a = -1, cube_b = -1;
    std::string rule;    // "floor-motion" | "seat-overlap"
    std::string detail;
};

// Checks that every placement is a floor motion and that each cube's seat lies
// outside every other cube's footprint. Returns one entry per violation.
std::vector<LayoutViolation> validate_layout(const AssemblyLayout& layout);

}  // namespace vcube
