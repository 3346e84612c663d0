#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace texsplat {

// Standard Adam, beta = (0.9, 0.999), eps = 1e-15 (reference 3DGS value).
// One group per parameter family; moments are remapped alongside the scene
// when density control adds or removes Gaussians.
struct AdamGroup {
    std::string name;
    double lr = 0;
    std::vector<float> m, v;

    AdamGroup() = default;
    explicit AdamGroup(std::string name_) : name(std::move(name_)) {}

    void resize(size_t n) {
        m.assign(n, 0.f);
        v.assign(n, 0.f);
    }

    // Rebuild moments under an index remap: entry i of the new layout comes
    // from slot src[i] of the old one (-1 starts fresh at zero). `width` is
    // the number of scalars per Gaussian in this group.
    void remap(const std::vector<int>& src, size_t width) {
        std::vector<float> nm(src.size() * width, 0.f), nv(src.size() * width, 0.f);
        for (size_t i = 0; i < src.size(); ++i) {
            if (src[i] < 0) continue;
            for (size_t k = 0; k < width; ++k) {
                nm[i * width + k] = m[size_t(src[i]) * width + k];
                nv[i * width + k] = v[size_t(src[i]) * width + k];
            }
        }
        m = std::move(nm);
        v = std::move(nv);
    }
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-15;

// One Adam step over a parameter family accessed through `for_each`, which
// must invoke its callback as callback(flat_index, param_ref, grad_value).
template <typename ForEach>
inline void adam_step(AdamGroup& group, int64_t step, ForEach&& for_each) {
    const double b1 = kAdamBeta1, b2 = kAdamBeta2;
    const double bc1 = 1.0 - std::pow(b1, double(step));
    const double bc2 = 1.0 - std::pow(b2, double(step));
    for_each([&](size_t idx, float& param, float grad) {
        if (!std::isfinite(grad))
            throw std::runtime_error("adam: non-finite gradient in group '" + group.name + "'");
        double m = b1 * group.m[idx] + (1.0 - b1) * grad;
        double v = b2 * group.v[idx] + (1.0 - b2) * double(grad) * grad;
        group.m[idx] = float(m);
        group.v[idx] = float(v);
        double m_hat = m / bc1;
        double v_hat = v / bc2;
        param = float(param - group.lr * m_hat / (std::sqrt(v_hat) + kAdamEps));
    });
}

} // namespace texsplat
