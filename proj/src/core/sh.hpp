#pragma once

#include "core/vec.hpp"

#include <array>
#include <span>

namespace texsplat {

// Real spherical harmonics, reference 3DGS basis ordering and constants.
inline constexpr double kShC0 = 0.28209479177387814;
inline constexpr double kShC1 = 0.4886025119029199;
inline constexpr double kShC2[5] = {1.0925484305920792, -1.0925484305920792,
                                    0.31539156525252005, -1.0925484305920792,
                                    0.5462742152960396};
inline constexpr double kShC3[7] = {-0.5900435899266435, 2.890611442640554,
                                    -0.4570457994644658, 0.3731763325901154,
                                    -0.4570457994644658, 1.445305721320277,
                                    -0.5900435899266435};

inline constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

// Basis values y_l(dir) for all coefficients up to `degree`; dir must be unit.
template <typename T>
inline void sh_basis(int degree, const Vec3<T>& d, std::array<T, 16>& out) {
    const T x = d.x, y = d.y, z = d.z;
    out[0] = T(kShC0);
    if (degree < 1) return;
    out[1] = T(-kShC1) * y;
    out[2] = T(kShC1) * z;
    out[3] = T(-kShC1) * x;
    if (degree < 2) return;
    const T xx = x * x, yy = y * y, zz = z * z;
    out[4] = T(kShC2[0]) * x * y;
    out[5] = T(kShC2[1]) * y * z;
    out[6] = T(kShC2[2]) * (2 * zz - xx - yy);
    out[7] = T(kShC2[3]) * x * z;
    out[8] = T(kShC2[4]) * (xx - yy);
    if (degree < 3) return;
    out[9] = T(kShC3[0]) * y * (3 * xx - yy);
    out[10] = T(kShC3[1]) * x * y * z;
    out[11] = T(kShC3[2]) * y * (4 * zz - xx - yy);
    out[12] = T(kShC3[3]) * z * (2 * zz - 3 * xx - 3 * yy);
    out[13] = T(kShC3[4]) * x * (4 * zz - xx - yy);
    out[14] = T(kShC3[5]) * z * (xx - yy);
    out[15] = T(kShC3[6]) * x * (xx - yy);
}

// d(y_l)/d(dir), same ordering as sh_basis.
template <typename T>
inline void sh_basis_grad(int degree, const Vec3<T>& d, std::array<Vec3<T>, 16>& out) {
    const T x = d.x, y = d.y, z = d.z;
    out[0] = {0, 0, 0};
    if (degree < 1) return;
    out[1] = {0, T(-kShC1), 0};
    out[2] = {0, 0, T(kShC1)};
    out[3] = {T(-kShC1), 0, 0};
    if (degree < 2) return;
    const T xx = x * x, yy = y * y, zz = z * z;
    out[4] = {T(kShC2[0]) * y, T(kShC2[0]) * x, 0};
    out[5] = {0, T(kShC2[1]) * z, T(kShC2[1]) * y};
    out[6] = {T(kShC2[2]) * -2 * x, T(kShC2[2]) * -2 * y, T(kShC2[2]) * 4 * z};
    out[7] = {T(kShC2[3]) * z, 0, T(kShC2[3]) * x};
    out[8] = {T(kShC2[4]) * 2 * x, T(kShC2[4]) * -2 * y, 0};
    if (degree < 3) return;
    out[9] = {T(kShC3[0]) * 6 * x * y, T(kShC3[0]) * (3 * xx - 3 * yy), 0};
    out[10] = {T(kShC3[1]) * y * z, T(kShC3[1]) * x * z, T(kShC3[1]) * x * y};
    out[11] = {T(kShC3[2]) * -2 * x * y, T(kShC3[2]) * (4 * zz - xx - 3 * yy),
               T(kShC3[2]) * 8 * y * z};
    out[12] = {T(kShC3[3]) * -6 * x * z, T(kShC3[3]) * -6 * y * z,
               T(kShC3[3]) * (6 * zz - 3 * xx - 3 * yy)};
    out[13] = {T(kShC3[4]) * (4 * zz - 3 * xx - yy), T(kShC3[4]) * -2 * x * y,
               T(kShC3[4]) * 8 * x * z};
    out[14] = {T(kShC3[5]) * 2 * x * z, T(kShC3[5]) * -2 * y * z, T(kShC3[5]) * (xx - yy)};
    out[15] = {T(kShC3[6]) * (3 * xx - yy), T(kShC3[6]) * -2 * x * y, 0};
}

// SH expansion without the +0.5 offset or clamp.
template <typename T>
inline Vec3<T> eval_sh_raw(std::span<const Vec3<T>> coeffs, const Vec3<T>& dir, int degree) {
    std::array<T, 16> basis;
    sh_basis(degree, dir, basis);
    Vec3<T> c{0, 0, 0};
    const int n = sh_coeff_count(degree);
    for (int l = 0; l < n; ++l) c += coeffs[l] * basis[l];
    return c;
}

// View-dependent color: SH expansion plus the 0.5 offset, clamped at 0 from
// below (reference 3DGS convention).
template <typename T>
inline Vec3<T> eval_sh(std::span<const Vec3<T>> coeffs, const Vec3<T>& dir, int degree) {
    Vec3<T> c = eval_sh_raw(coeffs, dir, degree) + Vec3<T>{T(0.5), T(0.5), T(0.5)};
    return {std::max(c.x, T(0)), std::max(c.y, T(0)), std::max(c.z, T(0))};
}

// Backward of eval_sh. `d_color` is dL/d(clamped color); `preclamp` the value
// before clamping (to zero the subgradient where the clamp is active).
// Accumulates into d_coeffs and returns dL/d(dir).
template <typename T>
inline Vec3<T> eval_sh_backward(std::span<const Vec3<T>> coeffs, const Vec3<T>& dir, int degree,
                                const Vec3<T>& d_color, const Vec3<T>& preclamp,
                                std::span<Vec3<T>> d_coeffs) {
    Vec3<T> up{preclamp.x > 0 ? d_color.x : T(0), preclamp.y > 0 ? d_color.y : T(0),
               preclamp.z > 0 ? d_color.z : T(0)};
    std::array<T, 16> basis;
    std::array<Vec3<T>, 16> basis_grad;
    sh_basis(degree, dir, basis);
    sh_basis_grad(degree, dir, basis_grad);
    Vec3<T> d_dir{0, 0, 0};
    const int n = sh_coeff_count(degree);
    for (int l = 0; l < n; ++l) {
        d_coeffs[l] += up * basis[l];
        d_dir += basis_grad[l] * dot(coeffs[l], up);
    }
    return d_dir;
}

} // namespace texsplat
