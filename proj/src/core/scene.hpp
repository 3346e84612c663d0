#pragma once

#include "core/gaussian.hpp"
#include "core/texture.hpp"
#include "core/vec.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace texsplat {

// The set of Gaussians plus global settings. When variant != None every
// Gaussian owns one tex_res x tex_res x K texture row in `texels`, aligned by
// Gaussian index.
template <typename T> struct Scene {
    std::vector<Gaussian<T>> gaussians;
    TextureVariant variant = TextureVariant::None;
    int tex_res = 0;
    std::vector<T> texels;
    int sh_degree = 0;
    T m_extent = 3; // texture spans +-m*sigma in the plane
    Vec3<T> background{0, 0, 0};
    // Gaussian count at stage-1 end; reference for fraction pruning.
    size_t baseline_count = 0;

    size_t size() const { return gaussians.size(); }

    size_t texels_per_gaussian() const {
        return size_t(tex_res) * tex_res * channel_count(variant);
    }

    std::span<const T> texel_row(size_t i) const {
        size_t n = texels_per_gaussian();
        return std::span<const T>(texels.data() + i * n, n);
    }
    std::span<T> texel_row(size_t i) {
        size_t n = texels_per_gaussian();
        return std::span<T>(texels.data() + i * n, n);
    }

    void attach_textures(int res, TextureVariant v) {
        variant = v;
        tex_res = res;
        if (v == TextureVariant::None) {
            texels.clear();
            return;
        }
        TextureMap<T> init = create_texture<T>(res, v);
        texels.resize(init.texels.size() * size());
        for (size_t i = 0; i < size(); ++i)
            std::copy(init.texels.begin(), init.texels.end(), texels.begin() + i * init.texels.size());
    }

    // Rejects non-finite parameters, naming the offending Gaussian.
    void validate() const {
        auto fin = [](T v) { return std::isfinite(double(v)); };
        for (size_t i = 0; i < gaussians.size(); ++i) {
            const Gaussian<T>& g = gaussians[i];
            bool ok = fin(g.mu.x) && fin(g.mu.y) && fin(g.mu.z) && fin(g.quat.w) && fin(g.quat.x) &&
                      fin(g.quat.y) && fin(g.quat.z) && fin(g.log_scale.x) && fin(g.log_scale.y) &&
                      fin(g.log_scale.z) && fin(g.opacity_logit);
            for (int l = 0; ok && l < sh_coeff_count(sh_degree); ++l)
                ok = fin(g.sh[l].x) && fin(g.sh[l].y) && fin(g.sh[l].z);
            if (!ok)
                throw std::runtime_error("gaussian " + std::to_string(i) + ": non-finite parameter");
        }
        for (T v : texels)
            if (!fin(v)) throw std::runtime_error("texture store: non-finite texel");
    }
};

// Per-parameter gradient accumulators mirroring every optimizable field,
// plus the per-Gaussian screen-space densification statistics.
template <typename T> struct GradientBuffer {
    std::vector<Vec3<T>> d_mu;
    std::vector<Vec4<T>> d_quat;
    std::vector<Vec3<T>> d_log_scale;
    std::vector<T> d_opacity_logit;
    std::vector<Vec3<T>> d_sh; // n * 16, same layout as Gaussian::sh
    std::vector<T> d_texels;   // same layout as Scene::texels

    // Densification raw material: per-pixel view-space positional gradients
    // reduced as a vector sum and a sum of magnitudes. Accumulated in double
    // so the triangle inequality between the two reductions is checkable
    // exactly.
    std::vector<Vec2<double>> screen_grad_sum;
    std::vector<double> screen_grad_abs_sum;
    std::vector<uint32_t> touched;

    void resize_for(const Scene<T>& scene) {
        size_t n = scene.size();
        d_mu.assign(n, {});
        d_quat.assign(n, {0, 0, 0, 0});
        d_log_scale.assign(n, {});
        d_opacity_logit.assign(n, T(0));
        d_sh.assign(n * 16, {});
        d_texels.assign(scene.texels.size(), T(0));
        screen_grad_sum.assign(n, {});
        screen_grad_abs_sum.assign(n, 0.0);
        touched.assign(n, 0);
    }

    void add(const GradientBuffer& o) {
        auto acc = [](auto& dst, const auto& src) {
            for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
        };
        acc(d_mu, o.d_mu);
        acc(d_quat, o.d_quat);
        acc(d_log_scale, o.d_log_scale);
        acc(d_opacity_logit, o.d_opacity_logit);
        acc(d_sh, o.d_sh);
        acc(d_texels, o.d_texels);
        acc(screen_grad_sum, o.screen_grad_sum);
        acc(screen_grad_abs_sum, o.screen_grad_abs_sum);
        acc(touched, o.touched);
    }
};

inline TextureVariant variant_from_string(const std::string& s) {
    if (s == "none") return TextureVariant::None;
    if (s == "alpha") return TextureVariant::AlphaOnly;
    if (s == "rgb") return TextureVariant::RGB;
    if (s == "rgba") return TextureVariant::RGBA;
    throw std::invalid_argument("unknown variant: " + s);
}

inline const char* variant_to_string(TextureVariant v) {
    switch (v) {
    case TextureVariant::None: return "none";
    case TextureVariant::AlphaOnly: return "alpha";
    case TextureVariant::RGB: return "rgb";
    case TextureVariant::RGBA: return "rgba";
    }
    return "none";
}

} // namespace texsplat
