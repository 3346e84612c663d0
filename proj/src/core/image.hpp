#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace texsplat {

// Dense H x W x C float image, row-major, channel-interleaved.
template <typename T> struct ImageT {
    int h = 0, w = 0, c = 0;
    std::vector<T> data;

    ImageT() = default;
    ImageT(int h_, int w_, int c_, T fill = T(0)) : h(h_), w(w_), c(c_) {
        data.assign(size_t(h) * w * c, fill);
    }

    T& at(int y, int x, int ch) { return data[(size_t(y) * w + x) * c + ch]; }
    T at(int y, int x, int ch) const { return data[(size_t(y) * w + x) * c + ch]; }
    size_t size() const { return data.size(); }
    bool same_shape(const ImageT& o) const { return h == o.h && w == o.w && c == o.c; }

    ImageT clamped01() const {
        ImageT r = *this;
        for (T& v : r.data) v = std::min(std::max(v, T(0)), T(1));
        return r;
    }

    template <typename U> ImageT<U> cast() const {
        ImageT<U> r(h, w, c);
        for (size_t i = 0; i < data.size(); ++i) r.data[i] = U(data[i]);
        return r;
    }
};

using Image = ImageT<float>;

// 8-bit PNG (RGB or RGBA, non-interlaced). Values are clamped to [0,1] and
// quantized on save; loads return values in [0,1].
Image load_png(const std::string& path);
void save_png(const Image& img, const std::string& path);

// Raw float image dump: magic "TGIM", H u32, W u32, C u32, then H*W*C
// little-endian 32-bit floats.
Image load_tgim(const std::string& path);
void save_tgim(const Image& img, const std::string& path);

} // namespace texsplat
