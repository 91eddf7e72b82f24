#pragma once

#include <array>
#include <vector>

#include "vcube/geometry.hpp"
#include "vcube/image.hpp"

namespace vcube {

// Indexed triangle mesh with per-vertex normals (smooth shading) and per-face
// albedo. Emissive faces bypass lighting; they mark fiducials that must keep
// their exact color in every view.
struct TriMesh {
    std::vector<Vector3d> vertices;
    std::vector<Vector3d> normals;
    std::vector<std::array<int, 3>> tris;
    std::vector<Vector3d> face_albedo;   // linear RGB in [0,1], one per face
    std::vector<uint8_t> face_emissive;  // 1 = unlit

    void append(const TriMesh& other);
    size_t face_count() const { return tris.size(); }
};

// Z-buffered software rasterizer. Depth output is camera-frame z in meters
// with 0.0 marking uncovered pixels. Interpolation of depth and vertex colors
// is perspective-correct. `light_dir` points from the scene toward the light;
// shade = ambient + (1 - ambient) * max(0, n.l). Triangles with any vertex
// closer than 1e-6 m to the camera plane are culled rather than clipped.
void rasterize(const TriMesh& mesh, const CameraModel& cam, const Vector3d& light_dir,
               double ambient, ImageF& depth, ImageU8* color);

inline void rasterize_depth(const TriMesh& mesh, const CameraModel& cam, ImageF& depth) {
    rasterize(mesh, cam, Vector3d(0, 1, 0), 1.0, depth, nullptr);
}

}  // namespace vcube
