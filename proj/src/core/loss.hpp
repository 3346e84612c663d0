#pragma once

#include "core/image.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace texsplat {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

namespace detail {

template <typename T> inline std::array<T, kSsimWindow> ssim_kernel() {
    std::array<T, kSsimWindow> k;
    T sum = 0;
    for (int i = 0; i < kSsimWindow; ++i) {
        T d = T(i - kSsimWindow / 2);
        k[i] = std::exp(-d * d / T(2 * kSsimSigma * kSsimSigma));
        sum += k[i];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// Separable valid convolution of one channel; out is (h-10) x (w-10).
template <typename T>
inline void conv_valid(const ImageT<T>& img, int ch, const std::array<T, kSsimWindow>& k,
                       ImageT<T>& out, int out_ch) {
    const int oh = img.h - kSsimWindow + 1, ow = img.w - kSsimWindow + 1;
    ImageT<T> tmp(img.h, ow, 1);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < ow; ++x) {
            T acc = 0;
            for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * img.at(y, x + i, ch);
            tmp.at(y, x, 0) = acc;
        }
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            T acc = 0;
            for (int i = 0; i < kSsimWindow; ++i) acc += k[i] * tmp.at(y + i, x, 0);
            out.at(y, x, out_ch) = acc;
        }
}

// Adjoint of conv_valid: scatters the valid-grid field back onto the image.
template <typename T>
inline void conv_valid_adjoint(const ImageT<T>& field, int ch, const std::array<T, kSsimWindow>& k,
                               ImageT<T>& out, int out_ch) {
    const int oh = field.h, ow = field.w;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            T g = field.at(y, x, ch);
            if (g == T(0)) continue;
            for (int i = 0; i < kSsimWindow; ++i)
                for (int j = 0; j < kSsimWindow; ++j)
                    out.at(y + i, x + j, out_ch) += g * k[i] * k[j];
        }
}

} // namespace detail

// Mean local SSIM plus dSSIM/da. 11x11 Gaussian window, sigma 1.5, valid
// region, per-channel mean. `b` is treated as constant (the ground truth).
template <typename T>
inline T ssim_with_grad(const ImageT<T>& a, const ImageT<T>& b, ImageT<T>* d_a) {
    if (!a.same_shape(b)) throw std::runtime_error("ssim: image shape mismatch");
    if (a.h < kSsimWindow || a.w < kSsimWindow)
        throw std::runtime_error("ssim: image smaller than the 11x11 window");

    const auto k = detail::ssim_kernel<T>();
    const int oh = a.h - kSsimWindow + 1, ow = a.w - kSsimWindow + 1;
    const T c1 = T(kSsimC1), c2 = T(kSsimC2);
    const size_t count = size_t(oh) * ow * a.c;

    if (d_a != nullptr) *d_a = ImageT<T>(a.h, a.w, a.c);

    // Products convolved per channel.
    ImageT<T> aa(a.h, a.w, 1), bb(a.h, a.w, 1), ab(a.h, a.w, 1);
    ImageT<T> mu_a(oh, ow, 1), mu_b(oh, ow, 1), g_aa(oh, ow, 1), g_bb(oh, ow, 1), g_ab(oh, ow, 1);
    ImageT<T> d_mu_a(oh, ow, 1), d_g_aa(oh, ow, 1), d_g_ab(oh, ow, 1);

    T total = 0;
    for (int ch = 0; ch < a.c; ++ch) {
        for (int y = 0; y < a.h; ++y)
            for (int x = 0; x < a.w; ++x) {
                T av = a.at(y, x, ch), bv = b.at(y, x, ch);
                aa.at(y, x, 0) = av * av;
                bb.at(y, x, 0) = bv * bv;
                ab.at(y, x, 0) = av * bv;
            }
        detail::conv_valid(a, ch, k, mu_a, 0);
        detail::conv_valid(b, ch, k, mu_b, 0);
        detail::conv_valid(aa, 0, k, g_aa, 0);
        detail::conv_valid(bb, 0, k, g_bb, 0);
        detail::conv_valid(ab, 0, k, g_ab, 0);

        if (d_a != nullptr) {
            std::fill(d_mu_a.data.begin(), d_mu_a.data.end(), T(0));
            std::fill(d_g_aa.data.begin(), d_g_aa.data.end(), T(0));
            std::fill(d_g_ab.data.begin(), d_g_ab.data.end(), T(0));
        }

        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                T ma = mu_a.at(y, x, 0), mb = mu_b.at(y, x, 0);
                T va = g_aa.at(y, x, 0) - ma * ma;
                T vb = g_bb.at(y, x, 0) - mb * mb;
                T cov = g_ab.at(y, x, 0) - ma * mb;
                T a1 = 2 * ma * mb + c1;
                T a2 = 2 * cov + c2;
                T b1 = ma * ma + mb * mb + c1;
                T b2 = va + vb + c2;
                T s = (a1 * a2) / (b1 * b2);
                total += s;

                if (d_a != nullptr) {
                    // dS w.r.t. the intermediate fields of image a
                    T inv = T(1) / (b1 * b2);
                    T ds_da1 = a2 * inv;
                    T ds_da2 = a1 * inv;
                    T ds_db1 = -s / b1;
                    T ds_db2 = -s / b2;
                    T ds_dma = ds_da1 * 2 * mb + ds_db1 * 2 * ma + ds_db2 * (-2 * ma) +
                               ds_da2 * 2 * (-mb);
                    T ds_dgaa = ds_db2;
                    T ds_dgab = ds_da2 * 2;
                    d_mu_a.at(y, x, 0) = ds_dma;
                    d_g_aa.at(y, x, 0) = ds_dgaa;
                    d_g_ab.at(y, x, 0) = ds_dgab;
                }
            }

        if (d_a != nullptr) {
            ImageT<T> back(a.h, a.w, 3); // adjoints of mu_a, g_aa, g_ab
            detail::conv_valid_adjoint(d_mu_a, 0, k, back, 0);
            detail::conv_valid_adjoint(d_g_aa, 0, k, back, 1);
            detail::conv_valid_adjoint(d_g_ab, 0, k, back, 2);
            for (int y = 0; y < a.h; ++y)
                for (int x = 0; x < a.w; ++x)
                    d_a->at(y, x, ch) = back.at(y, x, 0) + 2 * a.at(y, x, ch) * back.at(y, x, 1) +
                                        b.at(y, x, ch) * back.at(y, x, 2);
        }
    }

    if (d_a != nullptr)
        for (T& v : d_a->data) v /= T(count); // mean over valid pixels and channels
    return total / T(count);
}

template <typename T> struct LossResult {
    T value = 0;
    T l1 = 0;
    T ssim = 0;
    ImageT<T> d_image; // dL/d(render)
};

// L = lambda * L1 + (1 - lambda) * (1 - SSIM). Returns the analytic
// image gradient alongside the value.
template <typename T>
inline LossResult<T> photometric_loss(const ImageT<T>& render, const ImageT<T>& gt, T lambda) {
    if (!render.same_shape(gt)) throw std::runtime_error("photometric_loss: image shape mismatch");
    LossResult<T> r;
    r.d_image = ImageT<T>(render.h, render.w, render.c);

    T n = T(render.data.size());
    T l1 = 0;
    for (size_t i = 0; i < render.data.size(); ++i) {
        T d = render.data[i] - gt.data[i];
        l1 += std::abs(d);
        r.d_image.data[i] = lambda * (d > 0 ? T(1) : (d < 0 ? T(-1) : T(0))) / n;
    }
    r.l1 = l1 / n;

    if (lambda < T(1)) {
        ImageT<T> d_ssim;
        r.ssim = ssim_with_grad(render, gt, &d_ssim);
        for (size_t i = 0; i < render.data.size(); ++i)
            r.d_image.data[i] += (1 - lambda) * -d_ssim.data[i];
    } else {
        r.ssim = 0;
    }
    r.value = lambda * r.l1 + (1 - lambda) * (1 - r.ssim);
    return r;
}

} // namespace texsplat
