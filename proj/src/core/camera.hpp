#pragma once

#include "core/gaussian.hpp"
#include "core/vec.hpp"

namespace texsplat {

// Pinhole camera. Camera frame: x right, y down, z forward (pixel rays have
// positive z in camera space). world_to_cam: p_cam = rot * p_world + trans.
template <typename T> struct Camera {
    int width = 0, height = 0;
    T fx = 1, fy = 1, cx = 0, cy = 0;
    Mat3<T> rot;
    Vec3<T> trans;

    Vec3<T> position() const { return rot.transposed() * (-trans); }
    Vec3<T> to_cam(const Vec3<T>& p) const { return rot * p + trans; }
    Vec3<T> forward_axis() const { return rot.row(2); }

    // Ray through the center of pixel (px, py); px is the column index.
    Ray<T> pixel_ray(int px, int py) const {
        Vec3<T> d_cam{(T(px) + T(0.5) - cx) / fx, (T(py) + T(0.5) - cy) / fy, T(1)};
        Ray<T> r;
        r.origin = position();
        r.dir = (rot.transposed() * d_cam).normalized();
        return r;
    }

    // Perspective projection to pixel coordinates; caller checks depth.
    Vec2<T> project(const Vec3<T>& p_cam) const {
        return {fx * p_cam.x / p_cam.z + cx, fy * p_cam.y / p_cam.z + cy};
    }

    // Rows of d(pixel)/d(p_world) at p_cam, as world-space vectors.
    void projection_jacobian(const Vec3<T>& p_cam, Vec3<T>& jrow_x, Vec3<T>& jrow_y) const {
        T inv_z = T(1) / p_cam.z;
        Vec3<T> jx{fx * inv_z, 0, -fx * p_cam.x * inv_z * inv_z};
        Vec3<T> jy{0, fy * inv_z, -fy * p_cam.y * inv_z * inv_z};
        // right-multiply by rot: rows of J * R
        Mat3<T> Rt = rot.transposed();
        jrow_x = Rt * jx;
        jrow_y = Rt * jy;
    }
};

// Camera at `eye` looking at `target`; `up` is the world up hint (camera y
// points the other way, image rows grow downward).
template <typename T>
inline Camera<T> look_at_camera(const Vec3<T>& eye, const Vec3<T>& target, const Vec3<T>& up,
                                int width, int height, T fx, T fy) {
    Vec3<T> z = (target - eye).normalized();
    Vec3<T> x = cross(-up, z).normalized();
    Vec3<T> y = cross(z, x);
    Camera<T> cam;
    cam.width = width;
    cam.height = height;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = T(width) / 2;
    cam.cy = T(height) / 2;
    for (int j = 0; j < 3; ++j) {
        cam.rot.m[0][j] = x[j];
        cam.rot.m[1][j] = y[j];
        cam.rot.m[2][j] = z[j];
    }
    cam.trans = -(cam.rot * eye);
    return cam;
}

} // namespace texsplat
