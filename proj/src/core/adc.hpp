#pragma once

#include "core/rng.hpp"
#include "core/scene.hpp"

#include <cstdint>
#include <vector>

namespace texsplat {

struct AdcConfig {
    double tau = 0.6;             // densify threshold on the mean sum-of-magnitudes score
    int interval = 100;           // densify every N steps
    int start = 500;              // first step eligible for densification
    int end = 15000;              // last step eligible
    double percent_dense = 0.01;  // clone/split boundary, fraction of scene extent
    double prune_opacity = 0.005;
    double split_factor = 1.6;
    int opacity_reset_interval = 3000;
    double scene_extent = 1.0;
};

// Per-Gaussian densification score accumulators. Accumulates the revised
// sum-of-magnitudes statistic alongside the classic magnitude-of-sums for
// comparison; asserting score_sum_mag >= score_mag_sum per step is exact.
struct AdcState {
    std::vector<double> score_sum_mag; // revised statistic: sum of per-pixel magnitudes
    std::vector<double> score_mag_sum; // classic statistic: magnitude of the summed vector
    std::vector<uint32_t> observations;
    uint64_t triangle_violations = 0;

    void resize(size_t n) {
        score_sum_mag.assign(n, 0.0);
        score_mag_sum.assign(n, 0.0);
        observations.assign(n, 0);
    }

    void clear_scores() {
        std::fill(score_sum_mag.begin(), score_sum_mag.end(), 0.0);
        std::fill(score_mag_sum.begin(), score_mag_sum.end(), 0.0);
        std::fill(observations.begin(), observations.end(), 0u);
    }

    // Folds one backward pass's screen-space gradients into the scores.
    void update(const GradientBuffer<float>& grads) {
        for (size_t i = 0; i < score_sum_mag.size(); ++i) {
            if (grads.touched[i] == 0) continue;
            double a6 = grads.screen_grad_abs_sum[i];
            double a5 = grads.screen_grad_sum[i].norm();
            if (a6 < a5) ++triangle_violations;
            score_sum_mag[i] += a6;
            score_mag_sum[i] += a5;
            observations[i] += 1;
        }
    }
};

struct AdcResult {
    // new scene slot i was copied from old slot src[i]; -1 means fresh state
    std::vector<int> remap;
    size_t n_cloned = 0, n_split = 0, n_pruned = 0;
    bool changed = false;
};

// One densify/prune pass: high-score small Gaussians are cloned (duplicate
// offset by a sample from the parent), high-score large ones split into two
// children with scales divided by split_factor; low-opacity Gaussians are
// pruned. Scores are cleared afterwards.
AdcResult adc_step(Scene<float>& scene, AdcState& adc, const AdcConfig& cfg, Rng& rng);

// Opacity reset: o <- min(o, ceiling), in logit space.
void reset_opacities(Scene<float>& scene, float ceiling = 0.01f);

// Keeps the ceil(fraction * baseline) highest-importance Gaussians
// (importance = opacity * product of scales); deterministic index tie-break.
// The baseline is the recorded stage-1-end count, making the op idempotent
// at a fixed fraction.
AdcResult prune_to_fraction(Scene<float>& scene, double fraction);

} // namespace texsplat
