#include <doctest.h>

#include <algorithm>
#include <set>

#include "vcube/assembly.hpp"
#include "vcube/rng.hpp"

using namespace vcube;

TEST_CASE("standard cube geometry: screens, cameras, seat") {
    CubeSpec c = CubeSpec::standard();

    CHECK(c.front.is_rectangle(1e-9));
    CHECK(c.left.is_rectangle(1e-9));
    CHECK(c.right.is_rectangle(1e-9));
    CHECK(c.front.width_m() == doctest::Approx(1.43897).epsilon(1e-3));
    CHECK(c.front.height_m() == doctest::Approx(0.80942).epsilon(1e-3));

    // Front screen spans the z=0 wall with its bottom edge at 0.7 m.
    for (const auto& corner : c.front.corners) CHECK(std::abs(corner.z()) < 1e-12);
    CHECK(c.front.corners[3].y() == doctest::Approx(0.7));
    // Side screens share the front screen's vertical edges.
    CHECK((c.left.point_at(c.left.res_x, 0) - c.front.point_at(0, 0)).norm() < 1e-9);
    CHECK((c.right.point_at(0, 0) - c.front.point_at(c.front.res_x, 0)).norm() < 1e-9);
    // Perpendicular side screens.
    CHECK(std::abs(c.front.normal().dot(c.left.normal())) < 1e-9);
    CHECK(std::abs(c.front.normal().dot(c.right.normal())) < 1e-9);

    REQUIRE(c.cameras.size() == 6);
    std::set<double> xs, ys;
    for (const auto& cam : c.cameras) {
        Vector3d p = cam.center();
        CHECK(std::abs(p.z()) < 1e-9);  // mounted on the front wall
        xs.insert(std::round(p.x() * 1e6) / 1e6);
        ys.insert(std::round(p.y() * 1e6) / 1e6);
    }
    CHECK(xs.size() == 3);  // corner columns plus centerline
    CHECK(ys.size() == 2);  // bottom and top edge rows
    CHECK(c.cameras_face_seat());
    CHECK(c.seat_in_footprint());

    // Aiming: the seat eye lands on the principal point of every camera.
    for (const auto& cam : c.cameras) {
        Vector2d px = cam.project(c.seat_eye());
        CHECK(std::abs(px.x() - cam.cx) < 1e-6);
        CHECK(std::abs(px.y() - cam.cy) < 1e-6);
    }
}

TEST_CASE("face-to-face layout: coincident front walls, seats 2 m apart") {
    CubeSpec spec = CubeSpec::standard();
    AssemblyLayout l = AssemblyLayout::face_to_face(spec, 0.0);

    Vector3d s0 = cube_to_global(l, 0, spec.seat);
    Vector3d s1 = cube_to_global(l, 1, spec.seat);
    CHECK((s0 - s1).norm() == doctest::Approx(2.0).epsilon(1e-12));

    // Both front walls land in the global z=0 plane.
    for (const auto& corner : spec.front.corners) {
        CHECK(std::abs(cube_to_global(l, 0, corner).z()) < 1e-12);
        CHECK(std::abs(cube_to_global(l, 1, corner).z()) < 1e-12);
    }
    CHECK(validate_layout(l).empty());

    // Round trip through the global frame is the identity.
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        Vector3d p(rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(0, 2));
        CHECK((global_to_cube(l, 1, cube_to_global(l, 1, p)) - p).norm() < 1e-12);
    }
}

TEST_CASE("viewpoint transfer lands in front of the sender's screen") {
    CubeSpec spec = CubeSpec::standard();
    AssemblyLayout l = AssemblyLayout::face_to_face(spec, 0.0);

    Vector3d vp_receiver = spec.seat_eye();  // (0, 1.2, 1.0)
    Vector3d vp_sender = viewpoint_transfer(l, 0, 1, vp_receiver);
    CHECK((vp_sender - Vector3d(0, 1.2, -1.0)).norm() < 1e-12);
    // In front of the front screen, looking toward the seat along +Z.
    CHECK(vp_sender.z() < 0);
    CHECK((spec.seat_eye() - vp_sender).z() > 0);

    // Transfer to oneself is the identity; the two directions invert.
    CHECK((viewpoint_transfer(l, 0, 0, vp_receiver) - vp_receiver).norm() < 1e-12);
    Vector3d back = viewpoint_transfer(l, 1, 0, vp_sender);
    CHECK((back - vp_receiver).norm() < 1e-12);

    CHECK_THROWS_AS(viewpoint_transfer(l, 0, 7, vp_receiver), UnknownCube);
}

TEST_CASE("side-by-side layout overlaps footprints but not seats") {
    CubeSpec spec = CubeSpec::standard();
    AssemblyLayout l = AssemblyLayout::side_by_side(spec, 0.4);
    CHECK(validate_layout(l).empty());

    // Footprints share a strip 0.4 m wide.
    double right_edge_0 = spec.params.floor_w / 2.0;
    double left_edge_1 = cube_to_global(l, 1, Vector3d(-spec.params.floor_w / 2.0, 0, 0)).x();
    CHECK(right_edge_0 - left_edge_1 == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("round-table layout seats three participants facing the center") {
    CubeSpec spec = CubeSpec::standard();
    AssemblyLayout l = AssemblyLayout::round_table(spec, 3, 1.2);
    REQUIRE(l.cubes.size() == 3);
    CHECK(validate_layout(l).empty());

    for (int i = 0; i < 3; ++i) {
        Vector3d seat = cube_to_global(l, i, spec.seat);
        CHECK(seat.norm() == doctest::Approx(1.2).epsilon(1e-12));
        // Looking from the seat toward the front screen passes the center.
        Vector3d gaze = l.cube(i).to_global.rotate({0, 0, -1});
        Vector3d to_center = (-seat).normalized();
        CHECK(gaze.dot(to_center) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("layout validation flags seat/footprint conflicts by pair") {
    CubeSpec spec = CubeSpec::standard();
    AssemblyLayout l;
    l.topology = "custom";
    l.cubes.push_back({0, spec, RigidTransform::identity()});
    l.cubes.push_back({1, spec, RigidTransform::translate({0.2, 0, 0})});  // nearly coincident

    auto violations = validate_layout(l);
    REQUIRE(!violations.empty());
    bool found01 = false, found10 = false;
    for (const auto& v : violations) {
        CHECK(v.rule == "seat-overlap");
        if (v.cube_a == 0 && v.cube_b == 1) found01 = true;
        if (v.cube_a == 1 && v.cube_b == 0) found10 = true;
    }
    CHECK(found01);
    CHECK(found10);

    // Off-floor placement is reported as a non-floor motion.
    AssemblyLayout bad;
    bad.topology = "custom";
    bad.cubes.push_back({0, spec, RigidTransform::translate({0, 0.05, 0})});
    auto v2 = validate_layout(bad);
    REQUIRE(v2.size() == 1);
    CHECK(v2[0].rule == "floor-motion");
}

TEST_CASE("camera selection: proximity, symmetry and tie-breaks") {
    CubeSpec spec = CubeSpec::standard();

    // Viewpoint exactly at a camera's optical center ranks that camera first.
    for (int id = 0; id < 6; ++id) {
        auto ids = select_input_cameras(spec, spec.cameras[id].center(), 4);
        REQUIRE(ids.size() == 4);
        CHECK(ids[0] == id);
        CHECK(std::set<int>(ids.begin(), ids.end()).size() == 4);
    }

    // A viewpoint on the vertical symmetry plane selects a mirror-symmetric
    // camera set (ids 0<->2 and 3<->5 swap under x -> -x).
    auto mirror = [](int id) {
        switch (id) {
            case 0: return 2;
            case 2: return 0;
            case 3: return 5;
            case 5: return 3;
            default: return id;
        }
    };
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Vector3d vp(0.0, rng.uniform(0.8, 1.6), rng.uniform(-1.5, -0.2));
        auto ids = select_input_cameras(spec, vp, 4);
        std::set<int> sel(ids.begin(), ids.end());
        for (int id : sel) CHECK(sel.count(mirror(id)) == 1);
    }

    // Deterministic: same input, same ranking.
    Vector3d vp(0.31, 1.27, -0.9);
    auto a = select_input_cameras(spec, vp, 4);
    auto b = select_input_cameras(spec, vp, 4);
    CHECK(a == b);
}
