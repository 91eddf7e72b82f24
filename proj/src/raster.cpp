#include "vcube/raster.hpp"

#include <algorithm>
#include <cmath>

namespace vcube {

void TriMesh::append(const TriMesh& other) {
    int base = static_cast<int>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    normals.insert(normals.end(), other.normals.begin(), other.normals.end());
    for (const auto& t : other.tris)
        tris.push_back({t[0] + base, t[1] + base, t[2] + base});
    face_albedo.insert(face_albedo.end(), other.face_albedo.begin(), other.face_albedo.end());
    face_emissive.insert(face_emissive.end(), other.face_emissive.begin(),
                         other.face_emissive.end());
}

namespace {

constexpr double kNearPlane = 1e-6;

inline uint8_t to_u8(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

}  // namespace

void rasterize(const TriMesh& mesh, const CameraModel& cam, const Vector3d& light_dir,
               double ambient, ImageF& depth, ImageU8* color) {
    const int w = cam.width, h = cam.height;
    depth = ImageF(w, h, 1, 0.0f);
    if (color) *color = ImageU8(w, h, 3, 0);

    Vector3d l = light_dir.normalized();
    const bool lit = ambient < 1.0;

    for (size_t f = 0; f < mesh.tris.size(); ++f) {
        const auto& tri = mesh.tris[f];
        Vector3d pc[3];
        double sx[3], sy[3], inv_z[3];
        bool cull = false;
        for (int k = 0; k < 3; ++k) {
            pc[k] = cam.extrinsics.apply(mesh.vertices[tri[k]]);
            if (pc[k].z() < kNearPlane) {
                cull = true;
                break;
            }
            inv_z[k] = 1.0 / pc[k].z();
            sx[k] = cam.fx * pc[k].x() * inv_z[k] + cam.cx;
            sy[k] = cam.fy * pc[k].y() * inv_z[k] + cam.cy;
        }
        if (cull) continue;

        double area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
        if (std::abs(area) < 1e-12) continue;
        double inv_area = 1.0 / area;

        int x0 = std::max(0, static_cast<int>(std::floor(std::min({sx[0], sx[1], sx[2]}))));
        int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({sx[0], sx[1], sx[2]}))));
        int y0 = std::max(0, static_cast<int>(std::floor(std::min({sy[0], sy[1], sy[2]}))));
        int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({sy[0], sy[1], sy[2]}))));
        if (x0 > x1 || y0 > y1) continue;

        // Per-vertex shaded color; interpolated perspective-correct below.
        double shade_rgb[3][3] = {};
        if (color) {
            const Vector3d& alb = mesh.face_albedo[f];
            bool emissive = mesh.face_emissive[f] != 0;
            for (int k = 0; k < 3; ++k) {
                double s = 1.0;
                if (lit && !emissive) {
                    double ndl = std::max(0.0, mesh.normals[tri[k]].dot(l));
                    s = ambient + (1.0 - ambient) * ndl;
                }
                for (int c = 0; c < 3; ++c) shade_rgb[k][c] = alb[c] * s;
            }
        }

        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                double px = x, py = y;
                double l0 = ((sx[1] - px) * (sy[2] - py) - (sy[1] - py) * (sx[2] - px)) * inv_area;
                double l1 = ((sx[2] - px) * (sy[0] - py) - (sy[2] - py) * (sx[0] - px)) * inv_area;
                double l2 = 1.0 - l0 - l1;
                if (l0 < 0 || l1 < 0 || l2 < 0) continue;

                double iz = l0 * inv_z[0] + l1 * inv_z[1] + l2 * inv_z[2];
                float z = static_cast<float>(1.0 / iz);
                float& zb = depth.at(x, y);
                if (zb != 0.0f && zb <= z) continue;
                zb = z;
                if (color) {
                    for (int c = 0; c < 3; ++c) {
                        double v = (l0 * shade_rgb[0][c] * inv_z[0] + l1 * shade_rgb[1][c] * inv_z[1] +
                                    l2 * shade_rgb[2][c] * inv_z[2]) /
                                   iz;
                        color->at(x, y, c) = to_u8(v);
                    }
                }
            }
        }
    }
}

}  // namespace vcube
