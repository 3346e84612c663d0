#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace texsplat {

template <typename T> struct Vec2 {
    T x = 0, y = 0;

    Vec2() = default;
    Vec2(T x_, T y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(T s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    T norm() const { return std::sqrt(x * x + y * y); }
};

template <typename T> struct Vec3 {
    T x = 0, y = 0, z = 0;

    Vec3() = default;
    Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

    T& operator[](int i) { return (&x)[i]; }
    T operator[](int i) const { return (&x)[i]; }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(T s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(T s) { x *= s; y *= s; z *= s; return *this; }

    Vec3 cwise_mul(const Vec3& o) const { return {x * o.x, y * o.y, z * o.z}; }
    T norm2() const { return x * x + y * y + z * z; }
    T norm() const { return std::sqrt(norm2()); }
    Vec3 normalized() const {
        T n = norm();
        return {x / n, y / n, z / n};
    }
};

template <typename T> inline Vec3<T> operator*(T s, const Vec3<T>& v) { return v * s; }

template <typename T> inline T dot(const Vec3<T>& a, const Vec3<T>& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename T> inline Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Quaternion stored (w, x, y, z).
template <typename T> struct Vec4 {
    T w = 1, x = 0, y = 0, z = 0;

    Vec4() = default;
    Vec4(T w_, T x_, T y_, T z_) : w(w_), x(x_), y(y_), z(z_) {}

    T& operator[](int i) { return (&w)[i]; }
    T operator[](int i) const { return (&w)[i]; }

    Vec4 operator+(const Vec4& o) const { return {w + o.w, x + o.x, y + o.y, z + o.z}; }
    Vec4 operator*(T s) const { return {w * s, x * s, y * s, z * s}; }
    Vec4& operator+=(const Vec4& o) { w += o.w; x += o.x; y += o.y; z += o.z; return *this; }
    T norm2() const { return w * w + x * x + y * y + z * z; }
    T norm() const { return std::sqrt(norm2()); }
};

// Row-major 3x3 matrix.
template <typename T> struct Mat3 {
    T m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    static Mat3 identity() { return Mat3{}; }
    static Mat3 zero() {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = 0;
        return r;
    }

    Vec3<T> col(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
    Vec3<T> row(int i) const { return {m[i][0], m[i][1], m[i][2]}; }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    Vec3<T> operator*(const Vec3<T>& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r = zero();
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                for (int j = 0; j < 3; ++j) r.m[i][j] += m[i][k] * o.m[k][j];
        return r;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }
};

template <typename T> inline T sigmoid(T v) { return T(1) / (T(1) + std::exp(-v)); }

template <typename T> inline T inverse_sigmoid(T v) { return std::log(v / (T(1) - v)); }

// Rotation matrix from a quaternion; the input is normalized internally.
// Throws on a zero-norm quaternion.
template <typename T> inline Mat3<T> quat_to_rotation(const Vec4<T>& q_raw) {
    T n = q_raw.norm();
    if (!(n > T(0))) throw std::invalid_argument("degenerate rotation");
    T w = q_raw.w / n, x = q_raw.x / n, y = q_raw.y / n, z = q_raw.z / n;
    Mat3<T> R;
    R.m[0][0] = 1 - 2 * (y * y + z * z);
    R.m[0][1] = 2 * (x * y - w * z);
    R.m[0][2] = 2 * (x * z + w * y);
    R.m[1][0] = 2 * (x * y + w * z);
    R.m[1][1] = 1 - 2 * (x * x + z * z);
    R.m[1][2] = 2 * (y * z - w * x);
    R.m[2][0] = 2 * (x * z - w * y);
    R.m[2][1] = 2 * (y * z + w * x);
    R.m[2][2] = 1 - 2 * (x * x + y * y);
    return R;
}

// Backward of quat_to_rotation: contracts dL/dR with dR/dq and maps the result
// through the normalization Jacobian back to the raw (unnormalized) quaternion.
template <typename T>
inline Vec4<T> quat_rotation_backward(const Vec4<T>& q_raw, const Mat3<T>& dR) {
    T n = q_raw.norm();
    T w = q_raw.w / n, x = q_raw.x / n, y = q_raw.y / n, z = q_raw.z / n;

    auto contract = [&](const T dRdq[3][3]) {
        T s = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += dR.m[i][j] * dRdq[i][j];
        return s;
    };

    const T dw[3][3] = {{0, -2 * z, 2 * y}, {2 * z, 0, -2 * x}, {-2 * y, 2 * x, 0}};
    const T dx[3][3] = {{0, 2 * y, 2 * z}, {2 * y, -4 * x, -2 * w}, {2 * z, 2 * w, -4 * x}};
    const T dy[3][3] = {{-4 * y, 2 * x, 2 * w}, {2 * x, 0, 2 * z}, {-2 * w, 2 * z, -4 * y}};
    const T dz[3][3] = {{-4 * z, -2 * w, 2 * x}, {2 * w, -4 * z, 2 * y}, {2 * x, 2 * y, 0}};

    Vec4<T> g_unit{contract(dw), contract(dx), contract(dy), contract(dz)};

    // d(q/||q||)/dq = (I - u u^T) / ||q||, u = q/||q||
    Vec4<T> u{w, x, y, z};
    T proj = g_unit.w * u.w + g_unit.x * u.x + g_unit.y * u.y + g_unit.z * u.z;
    return Vec4<T>{(g_unit.w - u.w * proj) / n, (g_unit.x - u.x * proj) / n,
                   (g_unit.y - u.y * proj) / n, (g_unit.z - u.z * proj) / n};
}

} // namespace texsplat
