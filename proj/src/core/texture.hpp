#pragma once

#include "core/vec.hpp"

#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <vector>

namespace texsplat {

enum class TextureVariant { None = 0, AlphaOnly = 1, RGB = 2, RGBA = 3 };

inline int channel_count(TextureVariant v) {
    switch (v) {
    case TextureVariant::None: return 0;
    case TextureVariant::AlphaOnly: return 1;
    case TextureVariant::RGB: return 3;
    case TextureVariant::RGBA: return 4;
    }
    return 0;
}

inline bool has_rgb(TextureVariant v) {
    return v == TextureVariant::RGB || v == TextureVariant::RGBA;
}
inline bool has_alpha(TextureVariant v) {
    return v == TextureVariant::AlphaOnly || v == TextureVariant::RGBA;
}

// RGB channels precede the alpha channel when both are present.
inline int alpha_channel_index(TextureVariant v) {
    return v == TextureVariant::AlphaOnly ? 0 : 3;
}

inline constexpr double kTexRgbInit = 25.0 / 255.0;
// Alpha texels are stored as logits; sigmoid(10) ~ 0.99995 realizes the
// "initialized to 1" contract under unconstrained gradient descent.
inline constexpr double kTexAlphaLogitInit = 10.0;

// One Gaussian's texture: tex_res x tex_res x K scalars, row-major
// (v indexes rows, u columns), channel-interleaved. RGB texels are an
// unconstrained additive residual; alpha texels are logits.
template <typename T> struct TextureMap {
    int res = 0;
    TextureVariant variant = TextureVariant::None;
    std::vector<T> texels;

    T& at(int row, int col, int k) { return texels[(size_t(row) * res + col) * channel_count(variant) + k]; }
    T at(int row, int col, int k) const { return texels[(size_t(row) * res + col) * channel_count(variant) + k]; }
};

template <typename T> inline TextureMap<T> create_texture(int res, TextureVariant variant) {
    if (res < 1) throw std::invalid_argument("texture resolution must be >= 1");
    TextureMap<T> map;
    map.res = res;
    map.variant = variant;
    const int K = channel_count(variant);
    map.texels.assign(size_t(res) * res * K, T(0));
    const int ka = alpha_channel_index(variant);
    for (int r = 0; r < res; ++r)
        for (int c = 0; c < res; ++c)
            for (int k = 0; k < K; ++k) {
                bool is_alpha = has_alpha(variant) && k == ka;
                map.at(r, c, k) = is_alpha ? T(kTexAlphaLogitInit) : T(kTexRgbInit);
            }
    return map;
}

// Bilinear interpolation footprint; weights sum to 1.
template <typename T> struct BilinearTap {
    int c0, c1, r0, r1;
    T fu, fv;           // fractional parts after clamping
    bool u_clamped, v_clamped;
};

template <typename T> inline BilinearTap<T> bilinear_tap(int res, T u, T v) {
    BilinearTap<T> t;
    t.u_clamped = u < T(0) || u > T(res - 1);
    t.v_clamped = v < T(0) || v > T(res - 1);
    u = std::min(std::max(u, T(0)), T(res - 1));
    v = std::min(std::max(v, T(0)), T(res - 1));
    t.c0 = std::min(int(u), res - 1);
    t.r0 = std::min(int(v), res - 1);
    t.c1 = std::min(t.c0 + 1, res - 1);
    t.r1 = std::min(t.r0 + 1, res - 1);
    t.fu = u - T(t.c0);
    t.fv = v - T(t.r0);
    return t;
}

template <typename T> struct TexSample {
    Vec3<T> rgb{0, 0, 0};    // 0 when the variant has no RGB channels
    T alpha = 1;             // 1 when the variant has no alpha channel
    T alpha_logit = 0;       // interpolated stored logit (valid iff has_alpha)
};

// Interpolates raw stored texels (uv clamped to the map), then decodes:
// alpha = sigmoid(interpolated logit). Missing channels take neutral values.
template <typename T>
inline TexSample<T> sample_bilinear(std::span<const T> texels, int res, TextureVariant variant,
                                    T u, T v) {
    TexSample<T> s;
    const int K = channel_count(variant);
    if (K == 0) return s;
    BilinearTap<T> t = bilinear_tap(res, u, v);
    auto lerp2 = [&](int k) {
        auto texel = [&](int r, int c) { return texels[(size_t(r) * res + c) * K + k]; };
        T top = texel(t.r0, t.c0) * (1 - t.fu) + texel(t.r0, t.c1) * t.fu;
        T bot = texel(t.r1, t.c0) * (1 - t.fu) + texel(t.r1, t.c1) * t.fu;
        return top * (1 - t.fv) + bot * t.fv;
    };
    if (has_rgb(variant)) s.rgb = {lerp2(0), lerp2(1), lerp2(2)};
    if (has_alpha(variant)) {
        s.alpha_logit = lerp2(alpha_channel_index(variant));
        s.alpha = sigmoid(s.alpha_logit);
    }
    return s;
}

template <typename T>
inline TexSample<T> sample_bilinear(const TextureMap<T>& map, T u, T v) {
    return sample_bilinear<T>(std::span<const T>(map.texels), map.res, map.variant, u, v);
}

// Backward of sample_bilinear. Scatters per-channel upstream gradients to the
// four texels (alpha upstream routed through the sigmoid) and returns
// (dL/du, dL/dv); positional gradients are zero at clamped borders.
template <typename T>
inline Vec2<T> sample_bilinear_grad(std::span<const T> texels, std::span<T> d_texels, int res,
                                    TextureVariant variant, T u, T v, const Vec3<T>& d_rgb,
                                    T d_alpha) {
    const int K = channel_count(variant);
    if (K == 0) return {0, 0};
    BilinearTap<T> t = bilinear_tap(res, u, v);

    T up[4] = {0, 0, 0, 0};
    if (has_rgb(variant)) {
        up[0] = d_rgb.x;
        up[1] = d_rgb.y;
        up[2] = d_rgb.z;
    }
    if (has_alpha(variant)) {
        // alpha = sigmoid(logit)
        TexSample<T> s = sample_bilinear<T>(texels, res, variant, u, v);
        up[alpha_channel_index(variant)] = d_alpha * s.alpha * (1 - s.alpha);
    }

    T du = 0, dv = 0;
    for (int k = 0; k < K; ++k) {
        if (up[k] == T(0)) continue;
        auto texel = [&](int r, int c) { return texels[(size_t(r) * res + c) * K + k]; };
        auto d_texel = [&](int r, int c) -> T& { return d_texels[(size_t(r) * res + c) * K + k]; };
        d_texel(t.r0, t.c0) += up[k] * (1 - t.fu) * (1 - t.fv);
        d_texel(t.r0, t.c1) += up[k] * t.fu * (1 - t.fv);
        d_texel(t.r1, t.c0) += up[k] * (1 - t.fu) * t.fv;
        d_texel(t.r1, t.c1) += up[k] * t.fu * t.fv;
        T top = texel(t.r0, t.c0) * (1 - t.fu) + texel(t.r0, t.c1) * t.fu;
        T bot = texel(t.r1, t.c0) * (1 - t.fu) + texel(t.r1, t.c1) * t.fu;
        du += up[k] * ((texel(t.r0, t.c1) - texel(t.r0, t.c0)) * (1 - t.fv) +
                       (texel(t.r1, t.c1) - texel(t.r1, t.c0)) * t.fv);
        dv += up[k] * (bot - top);
    }
    if (t.u_clamped) du = 0;
    if (t.v_clamped) dv = 0;
    return {du, dv};
}

// Shared texture resolution under a fixed total texel budget.
inline int texel_budget_alloc(size_t n_gaussians, size_t total_texels) {
    if (n_gaussians < 1) throw std::invalid_argument("texel budget needs at least one Gaussian");
    if (total_texels < n_gaussians) {
        std::fprintf(stderr, "[texsplat] warning: texel budget %zu below Gaussian count %zu, using 1x1 maps\n",
                     total_texels, n_gaussians);
        return 1;
    }
    int res = int(std::sqrt(double(total_texels) / double(n_gaussians)));
    while (size_t(res + 1) * size_t(res + 1) * n_gaussians <= total_texels) ++res;
    while (res > 1 && size_t(res) * size_t(res) * n_gaussians > total_texels) --res;
    return std::max(res, 1);
}

} // namespace texsplat
