#pragma once

#include "core/sh.hpp"
#include "core/vec.hpp"

#include <algorithm>
#include <array>
#include <optional>

namespace texsplat {

// Floor on exp(log_scale) applied before covariance / frame construction,
// keeps Sigma invertible.
inline constexpr double kScaleFloor = 1e-7;
// Rays with |dir . n| below this are treated as parallel to the plane.
inline constexpr double kParallelEps = 1e-8;

template <typename T> struct Gaussian {
    Vec3<T> mu;
    Vec4<T> quat{1, 0, 0, 0};
    Vec3<T> log_scale;
    T opacity_logit = 0;
    std::array<Vec3<T>, 16> sh{}; // (degree+1)^2 active entries, scene-level degree

    T opacity() const { return sigmoid(opacity_logit); }
    Vec3<T> scales() const {
        return {std::max(std::exp(log_scale.x), T(kScaleFloor)),
                std::max(std::exp(log_scale.y), T(kScaleFloor)),
                std::max(std::exp(log_scale.z), T(kScaleFloor))};
    }
};

// Plane through mu spanned by the two largest-scale axes; n is the
// smallest-scale axis. axis[0..2] are the original axis indices ordered by
// descending scale (r1, r2, n).
template <typename T> struct IntersectionFrame {
    Vec3<T> n;
    Vec3<T> r1, r2;
    T s1 = 1, s2 = 1;
    T sn = 1; // scale along the normal axis
    int axis[3] = {0, 1, 2};
};

template <typename T> struct Ray {
    Vec3<T> origin;
    Vec3<T> dir; // unit
};

// Sigma = R diag(s)^2 R^T.
template <typename T>
inline Mat3<T> build_covariance(const Mat3<T>& R, const Vec3<T>& scales) {
    Mat3<T> S2 = Mat3<T>::zero();
    S2.m[0][0] = scales.x * scales.x;
    S2.m[1][1] = scales.y * scales.y;
    S2.m[2][2] = scales.z * scales.z;
    return R * S2 * R.transposed();
}

template <typename T>
inline IntersectionFrame<T> frame_from(const Mat3<T>& R, const Vec3<T>& scales) {
    int idx[3] = {0, 1, 2};
    // Descending scale; stable so exact ties keep ascending axis index.
    std::stable_sort(idx, idx + 3, [&](int a, int b) { return scales[a] > scales[b]; });
    IntersectionFrame<T> f;
    f.axis[0] = idx[0];
    f.axis[1] = idx[1];
    f.axis[2] = idx[2];
    f.r1 = R.col(idx[0]);
    f.r2 = R.col(idx[1]);
    f.n = R.col(idx[2]);
    f.s1 = scales[idx[0]];
    f.s2 = scales[idx[1]];
    f.sn = scales[idx[2]];
    return f;
}

template <typename T> inline IntersectionFrame<T> intersection_frame(const Gaussian<T>& g) {
    return frame_from(quat_to_rotation(g.quat), g.scales());
}

// exp(-1/2 (x-mu)^T Sigma^-1 (x-mu)), evaluated in the rotated frame.
template <typename T> inline T eval_gaussian(const Gaussian<T>& g, const Vec3<T>& x) {
    Mat3<T> R = quat_to_rotation(g.quat);
    Vec3<T> s = g.scales();
    Vec3<T> d = x - g.mu;
    T q = 0;
    for (int k = 0; k < 3; ++k) {
        T w = dot(d, R.col(k)) / s[k];
        q += w * w;
    }
    return std::exp(T(-0.5) * q);
}

// x = origin + t * dir with t = ((mu - origin) . n) / (dir . n).
// No hit when the ray is parallel to the plane or the plane lies behind.
template <typename T>
inline std::optional<Vec3<T>> intersect_ray_plane(const Ray<T>& ray,
                                                  const IntersectionFrame<T>& frame,
                                                  const Vec3<T>& mu) {
    T den = dot(ray.dir, frame.n);
    if (std::abs(den) < T(kParallelEps)) return std::nullopt;
    T t = dot(mu - ray.origin, frame.n) / den;
    if (t <= T(0)) return std::nullopt;
    return ray.origin + ray.dir * t;
}

template <typename T> struct Uv {
    T u = 0, v = 0;
    bool in_range = false;
    T a = 0, b = 0; // local plane coordinates, kept for the backward pass
};

// Texture coordinates of x on the plane; the map spans +-m*sigma per axis.
template <typename T>
inline Uv<T> uv_map(const Vec3<T>& x, const Vec3<T>& mu, const IntersectionFrame<T>& frame,
                    T m, int tex_res) {
    Vec3<T> d = x - mu;
    Uv<T> uv;
    uv.a = dot(d, frame.r1);
    uv.b = dot(d, frame.r2);
    uv.u = (m * frame.s1 + uv.a) / (2 * m * frame.s1) * T(tex_res - 1);
    uv.v = (m * frame.s2 + uv.b) / (2 * m * frame.s2) * T(tex_res - 1);
    uv.in_range = std::abs(uv.a) <= m * frame.s1 && std::abs(uv.b) <= m * frame.s2;
    return uv;
}

// exp(entropy) of the normalized scales: 3 for isotropic, ~2 for flat disks,
// ->1 when one axis dominates.
template <typename T> inline T effective_rank(const Vec3<T>& scales) {
    T sum = scales.x + scales.y + scales.z;
    T h = 0;
    for (int k = 0; k < 3; ++k) {
        T p = scales[k] / sum;
        if (p > T(0)) h -= p * std::log(p);
    }
    return std::exp(h);
}

} // namespace texsplat
