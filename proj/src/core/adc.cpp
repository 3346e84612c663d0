#include "core/adc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace texsplat {

namespace {

// Sample within the parent's support: normal in the rotated frame, rejected
// until the Mahalanobis distance is inside the 3-sigma ellipsoid.
Vec3<float> sample_offset(const Gaussian<float>& g, Rng& rng) {
    Vec3<float> xi;
    do {
        xi = {float(rng.normal()), float(rng.normal()), float(rng.normal())};
    } while (xi.norm2() > 9.0f);
    Mat3<float> R = quat_to_rotation(g.quat);
    Vec3<float> s = g.scales();
    return R * xi.cwise_mul(s);
}

void apply_remap(Scene<float>& scene, const std::vector<Gaussian<float>>& next,
                 const std::vector<int>& remap) {
    scene.gaussians = next;
    if (scene.variant != TextureVariant::None) {
        size_t stride = scene.texels_per_gaussian();
        std::vector<float> texels(next.size() * stride, 0.f);
        TextureMap<float> init = create_texture<float>(scene.tex_res, scene.variant);
        for (size_t i = 0; i < remap.size(); ++i) {
            if (remap[i] >= 0)
                std::copy_n(scene.texels.begin() + size_t(remap[i]) * stride, stride,
                            texels.begin() + i * stride);
            else
                std::copy(init.texels.begin(), init.texels.end(), texels.begin() + i * stride);
        }
        scene.texels = std::move(texels);
    }
}

} // namespace

AdcResult adc_step(Scene<float>& scene, AdcState& adc, const AdcConfig& cfg, Rng& rng) {
    AdcResult res;
    const size_t n = scene.size();
    std::vector<Gaussian<float>> next;
    next.reserve(n + n / 4);

    const float split_limit = float(cfg.percent_dense * cfg.scene_extent);

    for (size_t i = 0; i < n; ++i) {
        const Gaussian<float>& g = scene.gaussians[i];
        if (g.opacity() < float(cfg.prune_opacity)) {
            ++res.n_pruned;
            continue;
        }
        double score =
            adc.observations[i] > 0 ? adc.score_sum_mag[i] / double(adc.observations[i]) : 0.0;
        Vec3<float> s = g.scales();
        float max_scale = std::max({s.x, s.y, s.z});

        if (score > cfg.tau && max_scale <= split_limit) {
            // clone: keep the original, add a duplicate offset inside the parent
            next.push_back(g);
            res.remap.push_back(int(i));
            Gaussian<float> dup = g;
            dup.mu = g.mu + sample_offset(g, rng);
            next.push_back(dup);
            res.remap.push_back(-1);
            ++res.n_cloned;
        } else if (score > cfg.tau) {
            // split: two children sampled within the parent, scales shrunk
            for (int c = 0; c < 2; ++c) {
                Gaussian<float> child = g;
                child.mu = g.mu + sample_offset(g, rng);
                child.log_scale = g.log_scale - Vec3<float>{1, 1, 1} * std::log(float(cfg.split_factor));
                next.push_back(child);
                res.remap.push_back(-1);
            }
            ++res.n_split;
        } else {
            next.push_back(g);
            res.remap.push_back(int(i));
        }
    }

    if (next.empty()) throw std::runtime_error("adc_step: all Gaussians pruned");
    res.changed = res.n_cloned + res.n_split + res.n_pruned > 0;
    if (res.changed) apply_remap(scene, next, res.remap);
    adc.resize(scene.size());
    return res;
}

void reset_opacities(Scene<float>& scene, float ceiling) {
    float logit = inverse_sigmoid(ceiling);
    for (auto& g : scene.gaussians) g.opacity_logit = std::min(g.opacity_logit, logit);
}

AdcResult prune_to_fraction(Scene<float>& scene, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw std::invalid_argument("prune_to_fraction: fraction must be in (0, 1]");
    if (scene.gaussians.empty()) throw std::runtime_error("prune_to_fraction: empty scene");
    if (scene.baseline_count == 0) scene.baseline_count = scene.size();

    size_t keep = size_t(std::ceil(fraction * double(scene.baseline_count)));
    keep = std::min(std::max<size_t>(keep, 1), scene.size());

    std::vector<size_t> idx(scene.size());
    std::iota(idx.begin(), idx.end(), size_t(0));
    auto importance = [&](size_t i) {
        const Gaussian<float>& g = scene.gaussians[i];
        Vec3<float> s = g.scales();
        return double(g.opacity()) * double(s.x) * double(s.y) * double(s.z);
    };
    std::stable_sort(idx.begin(), idx.end(),
                     [&](size_t a, size_t b) { return importance(a) > importance(b); });
    idx.resize(keep);
    std::sort(idx.begin(), idx.end()); // preserve original order among survivors

    AdcResult res;
    res.n_pruned = scene.size() - keep;
    res.changed = res.n_pruned > 0;
    std::vector<Gaussian<float>> next;
    next.reserve(keep);
    for (size_t i : idx) {
        next.push_back(scene.gaussians[i]);
        res.remap.push_back(int(i));
    }
    if (res.changed) apply_remap(scene, next, res.remap);
    return res;
}

} // namespace texsplat
