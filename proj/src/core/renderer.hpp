#pragma once

#include "core/camera.hpp"
#include "core/image.hpp"
#include "core/scene.hpp"
#include "core/threadpool.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace texsplat {

inline constexpr int kTileSize = 16;
inline constexpr double kNearPlane = 0.01;
inline constexpr double kAlphaSkip = 1.0 / 255.0;
inline constexpr double kTransmittanceStop = 1e-4;

template <typename T> struct RenderOptions {
    int threads = 1;
    bool decompose = false;
};

template <typename T> struct RenderOutput {
    ImageT<T> color;         // raw composite, clamped only at image output
    ImageT<T> alpha;         // 1 - final transmittance
    ImageT<T> transmittance; // final per-pixel transmittance
    std::vector<uint16_t> hit_count;
    ImageT<T> base, tex;     // filled when RenderOptions::decompose

    ImageT<T> color_clamped() const { return color.clamped01(); }
};

// Conservative screen-space footprint of one Gaussian.
template <typename T> struct ProjectedBound {
    int index = 0;
    T depth = 0;
    Vec2<T> center_px;
    T radius_px = 0;        // 3 * sqrt(max eigenvalue of Sigma2D)
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0; // inclusive pixel bbox used for binning
};

// ---------------------------------------------------------------------------
// Per-render precomputed Gaussian state.

template <typename T> struct PrepGaussian {
    Vec3<T> mu;
    IntersectionFrame<T> frame;
    T opacity = 0;
    Vec3<T> c_base;     // clamped SH color
    Vec3<T> c_base_pre; // before the clamp (backward mask)
    Vec3<T> view_dir;
    T view_len = 1;
    T plane_num = 0; // (mu - cam_origin) . n
    T depth = 0;
    Vec3<T> jrow_x, jrow_y; // projection Jacobian rows (world space)
};

template <typename T>
inline PrepGaussian<T> prep_gaussian(const Gaussian<T>& g, int sh_degree, const Vec3<T>& cam_pos) {
    PrepGaussian<T> p;
    p.mu = g.mu;
    p.frame = intersection_frame(g);
    p.opacity = g.opacity();
    Vec3<T> to_mu = g.mu - cam_pos;
    p.view_len = to_mu.norm();
    p.view_dir = to_mu / p.view_len;
    p.c_base_pre = eval_sh_raw(std::span<const Vec3<T>>(g.sh.data(), g.sh.size()), p.view_dir,
                               sh_degree) +
                   Vec3<T>{T(0.5), T(0.5), T(0.5)};
    p.c_base = {std::max(p.c_base_pre.x, T(0)), std::max(p.c_base_pre.y, T(0)),
                std::max(p.c_base_pre.z, T(0))};
    p.plane_num = dot(to_mu, p.frame.n);
    return p;
}

// ---------------------------------------------------------------------------
// Single-hit shading: textured color and alpha at the exact ray-plane
// intersection.

template <typename T> struct ShadePoint {
    Vec3<T> color;  // c_base + c_tex
    Vec3<T> c_tex;
    T alpha = 0;    // alpha_tex * G * o
    // cached intermediates for the backward pass
    Vec3<T> x;
    T t = 0, den = 0;
    T a = 0, b = 0, w3 = 0;
    T gauss = 0;
    T u = 0, v = 0;
    bool tex_sampled = false;
    T alpha_tex = 1;
};

template <typename T>
inline std::optional<ShadePoint<T>> shade_point(const PrepGaussian<T>& p,
                                                std::span<const T> texrow, TextureVariant variant,
                                                int tex_res, T m, const Ray<T>& ray) {
    ShadePoint<T> s;
    s.den = dot(ray.dir, p.frame.n);
    if (std::abs(s.den) < T(kParallelEps)) return std::nullopt;
    s.t = p.plane_num / s.den;
    if (s.t <= T(0)) return std::nullopt;
    s.x = ray.origin + ray.dir * s.t;

    Vec3<T> d = s.x - p.mu;
    s.a = dot(d, p.frame.r1);
    s.b = dot(d, p.frame.r2);
    s.w3 = dot(d, p.frame.n);
    T q = (s.a / p.frame.s1) * (s.a / p.frame.s1) + (s.b / p.frame.s2) * (s.b / p.frame.s2) +
          (s.w3 / p.frame.sn) * (s.w3 / p.frame.sn);
    s.gauss = std::exp(T(-0.5) * q);

    bool in_range = std::abs(s.a) <= m * p.frame.s1 && std::abs(s.b) <= m * p.frame.s2;
    s.c_tex = {0, 0, 0};
    s.alpha_tex = 1;
    if (variant != TextureVariant::None && in_range) {
        s.u = (m * p.frame.s1 + s.a) / (2 * m * p.frame.s1) * T(tex_res - 1);
        s.v = (m * p.frame.s2 + s.b) / (2 * m * p.frame.s2) * T(tex_res - 1);
        TexSample<T> ts = sample_bilinear<T>(texrow, tex_res, variant, s.u, s.v);
        s.c_tex = ts.rgb;
        s.alpha_tex = ts.alpha;
        s.tex_sampled = true;
    }
    s.alpha = s.alpha_tex * s.gauss * p.opacity;
    if (s.alpha < T(kAlphaSkip)) return std::nullopt;
    s.color = p.c_base + s.c_tex;
    return s;
}

// Spec-level op: one Gaussian, one ray. The texture map may be null.
template <typename T>
inline std::optional<std::pair<Vec3<T>, T>> shade_hit(const Gaussian<T>& g,
                                                      const TextureMap<T>* tex, const Ray<T>& ray,
                                                      T m, int sh_degree = 0) {
    PrepGaussian<T> p = prep_gaussian(g, sh_degree, ray.origin);
    std::span<const T> row;
    TextureVariant variant = TextureVariant::None;
    int res = 0;
    if (tex != nullptr) {
        row = std::span<const T>(tex->texels);
        variant = tex->variant;
        res = tex->res;
    }
    auto s = shade_point<T>(p, row, variant, res, m, ray);
    if (!s) return std::nullopt;
    return std::make_pair(s->color, s->alpha);
}

// ---------------------------------------------------------------------------
// Front-to-back alpha compositing.

template <typename T> struct CompositeHit {
    Vec3<T> color;
    T alpha;
};

template <typename T>
inline std::pair<Vec3<T>, T> composite_pixel(std::span<const CompositeHit<T>> hits,
                                             const Vec3<T>& background) {
    Vec3<T> color{0, 0, 0};
    T trans = 1;
    for (const CompositeHit<T>& h : hits) {
        if (!(h.alpha >= T(0) && h.alpha < T(1)))
            throw std::runtime_error("composite_pixel: alpha outside [0,1)");
        T next = trans * (1 - h.alpha);
        if (next < T(kTransmittanceStop)) break;
        color += h.color * (h.alpha * trans);
        trans = next;
    }
    color += background * trans;
    return {color, 1 - trans};
}

// ---------------------------------------------------------------------------
// Projection and conservative screen-space bounding.

namespace detail {

// Largest eigenvalue of the symmetric 2x2 [[a, b], [b, c]].
template <typename T> inline T eig_max_2x2(T a, T b, T c) {
    T mid = (a + c) / 2;
    T d = (a - c) / 2;
    return mid + std::sqrt(d * d + b * b);
}

template <typename T> struct BoundResult {
    ProjectedBound<T> bound;
    bool visible = false;
};

template <typename T>
inline BoundResult<T> project_bound(const Gaussian<T>& g, const Camera<T>& cam, int index) {
    BoundResult<T> r;
    Vec3<T> mu_cam = cam.to_cam(g.mu);
    if (mu_cam.z <= T(kNearPlane)) return r;
    T o = g.opacity();
    if (T(255) * o <= T(1)) return r; // alpha can never reach the skip threshold

    Mat3<T> R = quat_to_rotation(g.quat);
    Vec3<T> s = g.scales();

    // Sigma2D via the local affine approximation; bounding-report radius only.
    Mat3<T> cov = build_covariance(R, s);
    Mat3<T> cov_cam = cam.rot * cov * cam.rot.transposed();
    T iz = T(1) / mu_cam.z;
    T jx[3] = {cam.fx * iz, 0, -cam.fx * mu_cam.x * iz * iz};
    T jy[3] = {0, cam.fy * iz, -cam.fy * mu_cam.y * iz * iz};
    auto quad = [&](const T u[3], const T v[3]) {
        T acc = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) acc += u[i] * cov_cam.m[i][j] * v[j];
        return acc;
    };
    T s2d_a = quad(jx, jx), s2d_b = quad(jx, jy), s2d_c = quad(jy, jy);

    ProjectedBound<T>& b = r.bound;
    b.index = index;
    b.depth = mu_cam.z;
    b.center_px = cam.project(mu_cam);
    b.radius_px = 3 * std::sqrt(std::max(eig_max_2x2(s2d_a, s2d_b, s2d_c), T(0)));

    // Traversal bbox: project the corners of the rho-scaled oriented bounding
    // box. The perspective image of a convex body is contained in the convex
    // hull of its projected vertices, so this bbox is conservative for every
    // point where alpha could exceed the skip threshold.
    T rho = std::sqrt(2 * std::log(T(255) * o));
    Vec3<T> e1 = R.col(0) * (rho * s.x), e2 = R.col(1) * (rho * s.y), e3 = R.col(2) * (rho * s.z);
    T min_x = std::numeric_limits<T>::max(), max_x = std::numeric_limits<T>::lowest();
    T min_y = min_x, max_y = max_x;
    bool fallback = false;
    for (int mask = 0; mask < 8; ++mask) {
        Vec3<T> corner = g.mu + e1 * ((mask & 1) ? T(1) : T(-1)) + e2 * ((mask & 2) ? T(1) : T(-1)) +
                         e3 * ((mask & 4) ? T(1) : T(-1));
        Vec3<T> c_cam = cam.to_cam(corner);
        if (c_cam.z <= T(kNearPlane)) {
            fallback = true; // extends toward the camera: bound the whole image
            break;
        }
        Vec2<T> px = cam.project(c_cam);
        min_x = std::min(min_x, px.x);
        max_x = std::max(max_x, px.x);
        min_y = std::min(min_y, px.y);
        max_y = std::max(max_y, px.y);
    }
    if (fallback) {
        b.x0 = 0;
        b.y0 = 0;
        b.x1 = cam.width - 1;
        b.y1 = cam.height - 1;
    } else {
        b.x0 = std::max(0, int(std::floor(min_x - 1)));
        b.y0 = std::max(0, int(std::floor(min_y - 1)));
        b.x1 = std::min(cam.width - 1, int(std::ceil(max_x + 1)));
        b.y1 = std::min(cam.height - 1, int(std::ceil(max_y + 1)));
        if (b.x0 > b.x1 || b.y0 > b.y1) return r; // off screen
    }
    r.visible = true;
    return r;
}

} // namespace detail

template <typename T>
inline std::optional<ProjectedBound<T>> project_and_bound(const Gaussian<T>& g,
                                                          const Camera<T>& cam, int index = 0) {
    auto r = detail::project_bound(g, cam, index);
    if (!r.visible) return std::nullopt;
    return r.bound;
}

// ---------------------------------------------------------------------------
// Tiled traversal.

namespace detail {

template <typename T> struct RenderContext {
    std::vector<PrepGaussian<T>> preps;          // indexed by Gaussian
    std::vector<std::vector<int>> tile_bins;     // depth-sorted Gaussian indices per tile
    int tiles_x = 0, tiles_y = 0;
};

template <typename T>
inline RenderContext<T> build_context(const Scene<T>& scene, const Camera<T>& cam) {
    scene.validate();
    RenderContext<T> ctx;
    ctx.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
    ctx.tiles_y = (cam.height + kTileSize - 1) / kTileSize;
    ctx.tile_bins.resize(size_t(ctx.tiles_x) * ctx.tiles_y);
    ctx.preps.resize(scene.size());

    Vec3<T> cam_pos = cam.position();
    std::vector<std::pair<T, int>> order; // (depth, index) of visible Gaussians
    std::vector<ProjectedBound<T>> bounds(scene.size());
    for (size_t i = 0; i < scene.size(); ++i) {
        auto r = project_bound(scene.gaussians[i], cam, int(i));
        if (!r.visible) continue;
        bounds[i] = r.bound;
        order.emplace_back(r.bound.depth, int(i));
        ctx.preps[i] = prep_gaussian(scene.gaussians[i], scene.sh_degree, cam_pos);
    }
    // Depth sort with index tie-break; bins stay sorted because insertion
    // follows this global order.
    std::sort(order.begin(), order.end());
    for (auto& [depth, i] : order) {
        const ProjectedBound<T>& b = bounds[i];
        for (int ty = b.y0 / kTileSize; ty <= b.y1 / kTileSize; ++ty)
            for (int tx = b.x0 / kTileSize; tx <= b.x1 / kTileSize; ++tx)
                ctx.tile_bins[size_t(ty) * ctx.tiles_x + tx].push_back(i);
    }
    return ctx;
}

// Walks one pixel's depth-sorted hits; calls on_hit(index, shade, trans) for
// every composited hit and returns the final transmittance. The hit that
// would push transmittance below the stop threshold is skipped and traversal
// ends (reference 3DGS behavior).
template <typename T, typename F>
inline T walk_pixel(const Scene<T>& scene, const RenderContext<T>& ctx,
                    std::span<const int> bin, const Ray<T>& ray, F&& on_hit) {
    T trans = 1;
    for (int i : bin) {
        std::span<const T> row;
        if (scene.variant != TextureVariant::None) row = scene.texel_row(size_t(i));
        auto s = shade_point<T>(ctx.preps[i], row, scene.variant, scene.tex_res, scene.m_extent, ray);
        if (!s) continue;
        T next = trans * (1 - s->alpha);
        if (next < T(kTransmittanceStop)) break;
        on_hit(i, *s, trans);
        trans = next;
    }
    return trans;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Forward rendering.

template <typename T>
inline RenderOutput<T> render_forward(const Scene<T>& scene, const Camera<T>& cam,
                                      const RenderOptions<T>& opts = {}) {
    detail::RenderContext<T> ctx = detail::build_context(scene, cam);

    RenderOutput<T> out;
    out.color = ImageT<T>(cam.height, cam.width, 3);
    out.alpha = ImageT<T>(cam.height, cam.width, 1);
    out.transmittance = ImageT<T>(cam.height, cam.width, 1);
    out.hit_count.assign(size_t(cam.height) * cam.width, 0);
    if (opts.decompose) {
        out.base = ImageT<T>(cam.height, cam.width, 3);
        out.tex = ImageT<T>(cam.height, cam.width, 3);
    }

    int n_tiles = ctx.tiles_x * ctx.tiles_y;
    parallel_strided(n_tiles, resolve_threads(opts.threads), [&](int tile, int) {
        const auto& bin = ctx.tile_bins[tile];
        int tx = tile % ctx.tiles_x, ty = tile / ctx.tiles_x;
        int x_end = std::min((tx + 1) * kTileSize, cam.width);
        int y_end = std::min((ty + 1) * kTileSize, cam.height);
        for (int y = ty * kTileSize; y < y_end; ++y)
            for (int x = tx * kTileSize; x < x_end; ++x) {
                Ray<T> ray = cam.pixel_ray(x, y);
                Vec3<T> color{0, 0, 0}, base{0, 0, 0}, texc{0, 0, 0};
                int hits = 0;
                T trans = detail::walk_pixel(scene, ctx, std::span<const int>(bin), ray,
                                             [&](int i, const ShadePoint<T>& s, T t_cur) {
                                                 T w = s.alpha * t_cur;
                                                 color += s.color * w;
                                                 if (opts.decompose) {
                                                     base += ctx.preps[i].c_base * w;
                                                     texc += s.c_tex * w;
                                                 }
                                                 ++hits;
                                             });
                color += scene.background * trans;
                for (int ch = 0; ch < 3; ++ch) out.color.at(y, x, ch) = color[ch];
                out.alpha.at(y, x, 0) = 1 - trans;
                out.transmittance.at(y, x, 0) = trans;
                out.hit_count[size_t(y) * cam.width + x] = uint16_t(std::min(hits, 65535));
                if (opts.decompose) {
                    texc += scene.background * trans; // background term lives in the tex image
                    for (int ch = 0; ch < 3; ++ch) {
                        out.base.at(y, x, ch) = base[ch];
                        out.tex.at(y, x, ch) = texc[ch];
                    }
                }
            }
    });
    return out;
}

// Composite with per-hit color replaced by c_base only / c_tex only,
// alphas unchanged.
template <typename T>
inline std::pair<ImageT<T>, ImageT<T>> render_decomposition(const Scene<T>& scene,
                                                            const Camera<T>& cam,
                                                            const RenderOptions<T>& opts = {}) {
    RenderOptions<T> o = opts;
    o.decompose = true;
    RenderOutput<T> out = render_forward(scene, cam, o);
    return {std::move(out.base), std::move(out.tex)};
}

// ---------------------------------------------------------------------------
// Backward rendering: analytic gradients for every optimizable parameter.

template <typename T>
inline GradientBuffer<T> render_backward(const Scene<T>& scene, const Camera<T>& cam,
                                         const ImageT<T>& upstream, const RenderOutput<T>& fwd,
                                         const RenderOptions<T>& opts = {}) {
    if (upstream.h != cam.height || upstream.w != cam.width || upstream.c != 3)
        throw std::runtime_error("render_backward: upstream image shape mismatch");
    if (fwd.color.h != cam.height || fwd.color.w != cam.width)
        throw std::runtime_error("render_backward: forward/backward input mismatch");
    for (T v : upstream.data)
        if (!std::isfinite(double(v))) throw std::runtime_error("render_backward: non-finite upstream");

    detail::RenderContext<T> ctx = detail::build_context(scene, cam);

    // Projection Jacobians for the view-space densification statistic.
    for (size_t i = 0; i < scene.size(); ++i) {
        Vec3<T> mu_cam = cam.to_cam(scene.gaussians[i].mu);
        if (mu_cam.z > T(kNearPlane))
            cam.projection_jacobian(mu_cam, ctx.preps[i].jrow_x, ctx.preps[i].jrow_y);
    }

    int n_threads = resolve_threads(opts.threads);
    int n_tiles = ctx.tiles_x * ctx.tiles_y;
    n_threads = std::max(1, std::min(n_threads, n_tiles));
    std::vector<GradientBuffer<T>> locals(n_threads);
    for (auto& l : locals) l.resize_for(scene);

    parallel_strided(n_tiles, n_threads, [&](int tile, int worker) {
        GradientBuffer<T>& grad = locals[worker];
        const auto& bin = ctx.tile_bins[tile];
        if (bin.empty()) return;
        int tx = tile % ctx.tiles_x, ty = tile / ctx.tiles_x;
        int x_end = std::min((tx + 1) * kTileSize, cam.width);
        int y_end = std::min((ty + 1) * kTileSize, cam.height);
        for (int y = ty * kTileSize; y < y_end; ++y)
            for (int x = tx * kTileSize; x < x_end; ++x) {
                Vec3<T> g_pix{upstream.at(y, x, 0), upstream.at(y, x, 1), upstream.at(y, x, 2)};
                if (g_pix.x == 0 && g_pix.y == 0 && g_pix.z == 0) continue;
                Vec3<T> c_total{fwd.color.at(y, x, 0), fwd.color.at(y, x, 1), fwd.color.at(y, x, 2)};
                Ray<T> ray = cam.pixel_ray(x, y);
                Vec3<T> composited{0, 0, 0};

                detail::walk_pixel(scene, ctx, std::span<const int>(bin), ray,
                                   [&](int i, const ShadePoint<T>& s, T t_cur) {
                    const PrepGaussian<T>& p = ctx.preps[i];
                    const Gaussian<T>& g = scene.gaussians[i];
                    Vec3<T> contrib = s.color * (s.alpha * t_cur);
                    Vec3<T> suffix = c_total - composited - contrib;
                    composited += contrib;

                    Vec3<T> d_ci = g_pix * (s.alpha * t_cur);
                    T d_alpha = 0;
                    for (int ch = 0; ch < 3; ++ch)
                        d_alpha += g_pix[ch] * (s.color[ch] * t_cur - suffix[ch] / (1 - s.alpha));

                    Vec3<T> d_mu_local{0, 0, 0};

                    // c_i = c_base + c_tex; SH chain including the view direction.
                    {
                        std::span<Vec3<T>> d_sh_row(grad.d_sh.data() + size_t(i) * 16, 16);
                        Vec3<T> d_dir = eval_sh_backward(
                            std::span<const Vec3<T>>(g.sh.data(), g.sh.size()), p.view_dir,
                            scene.sh_degree, d_ci, p.c_base_pre, d_sh_row);
                        d_mu_local += (d_dir - p.view_dir * dot(p.view_dir, d_dir)) / p.view_len;
                    }

                    // alpha_i = alpha_tex * G * o
                    T d_gauss = d_alpha * s.alpha_tex * p.opacity;
                    T d_opac = d_alpha * s.alpha_tex * s.gauss;
                    grad.d_opacity_logit[i] += d_opac * p.opacity * (1 - p.opacity);

                    T d_a = 0, d_b = 0, d_w3 = 0;
                    T d_s1 = 0, d_s2 = 0, d_sn = 0;

                    if (s.tex_sampled) {
                        Vec3<T> d_ctex = has_rgb(scene.variant) ? d_ci : Vec3<T>{0, 0, 0};
                        T d_atex = has_alpha(scene.variant) ? d_alpha * s.gauss * p.opacity : T(0);
                        size_t stride = scene.texels_per_gaussian();
                        Vec2<T> duv = sample_bilinear_grad<T>(
                            scene.texel_row(size_t(i)),
                            std::span<T>(grad.d_texels.data() + size_t(i) * stride, stride),
                            scene.tex_res, scene.variant, s.u, s.v, d_ctex, d_atex);
                        // u = (m s1 + a) / (2 m s1) * (res-1)
                        T ku = T(scene.tex_res - 1) / (2 * scene.m_extent * p.frame.s1);
                        T kv = T(scene.tex_res - 1) / (2 * scene.m_extent * p.frame.s2);
                        d_a += duv.x * ku;
                        d_s1 += -duv.x * ku * s.a / p.frame.s1;
                        d_b += duv.y * kv;
                        d_s2 += -duv.y * kv * s.b / p.frame.s2;
                    }

                    // G = exp(-q/2), q = (a/s1)^2 + (b/s2)^2 + (w3/sn)^2
                    {
                        T dq = d_gauss * s.gauss * T(-0.5);
                        d_a += dq * 2 * s.a / (p.frame.s1 * p.frame.s1);
                        d_b += dq * 2 * s.b / (p.frame.s2 * p.frame.s2);
                        d_w3 += dq * 2 * s.w3 / (p.frame.sn * p.frame.sn);
                        d_s1 += dq * -2 * s.a * s.a / (p.frame.s1 * p.frame.s1 * p.frame.s1);
                        d_s2 += dq * -2 * s.b * s.b / (p.frame.s2 * p.frame.s2 * p.frame.s2);
                        d_sn += dq * -2 * s.w3 * s.w3 / (p.frame.sn * p.frame.sn * p.frame.sn);
                    }

                    // a = (x-mu).r1, b = (x-mu).r2, w3 = (x-mu).n
                    Vec3<T> delta = s.x - p.mu;
                    Vec3<T> d_x = p.frame.r1 * d_a + p.frame.r2 * d_b + p.frame.n * d_w3;
                    d_mu_local -= d_x;
                    Vec3<T> d_r1 = delta * d_a;
                    Vec3<T> d_r2 = delta * d_b;
                    Vec3<T> d_n = delta * d_w3;

                    // x = origin + t*dir, t = plane_num / den
                    T d_t = dot(ray.dir, d_x);
                    T d_num = d_t / s.den;
                    T d_den = -d_t * s.t / s.den;
                    d_mu_local += p.frame.n * d_num;
                    d_n += (p.mu - ray.origin) * d_num + ray.dir * d_den;

                    // scales: s_k = exp(log_scale_k), zero subgradient below the floor
                    auto scale_grad = [&](int axis, T d_s, T s_val) {
                        if (std::exp(g.log_scale[axis]) > T(kScaleFloor))
                            grad.d_log_scale[i][axis] += d_s * s_val;
                    };
                    scale_grad(p.frame.axis[0], d_s1, p.frame.s1);
                    scale_grad(p.frame.axis[1], d_s2, p.frame.s2);
                    scale_grad(p.frame.axis[2], d_sn, p.frame.sn);

                    // axes back to the rotation, then to the quaternion
                    Mat3<T> d_R = Mat3<T>::zero();
                    for (int rr = 0; rr < 3; ++rr) {
                        d_R.m[rr][p.frame.axis[0]] += d_r1[rr];
                        d_R.m[rr][p.frame.axis[1]] += d_r2[rr];
                        d_R.m[rr][p.frame.axis[2]] += d_n[rr];
                    }
                    grad.d_quat[i] += quat_rotation_backward(g.quat, d_R);

                    grad.d_mu[i] += d_mu_local;
                    grad.touched[i] += 1;

                    // View-space positional gradient of this pixel, kept as
                    // both densification reductions.
                    Vec2<double> g2{double(dot(p.jrow_x, d_mu_local)),
                                    double(dot(p.jrow_y, d_mu_local))};
                    grad.screen_grad_sum[i] += g2;
                    grad.screen_grad_abs_sum[i] += g2.norm();
                });
            }
    });

    GradientBuffer<T> total = std::move(locals[0]);
    for (int w = 1; w < n_threads; ++w) total.add(locals[w]);
    return total;
}

// Explicit per-pixel ray for callers outside the renderer.
template <typename T> inline Ray<T> pixel_ray(const Camera<T>& cam, int px, int py) {
    return cam.pixel_ray(px, py);
}

} // namespace texsplat
