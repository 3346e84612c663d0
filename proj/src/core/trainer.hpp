#pragma once

#include "core/config.hpp"
#include "core/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace texsplat {

struct TrainReport {
    std::string checkpoint_dir;
    double final_loss = 0;
    double final_psnr = 0;
    double final_ssim = 0;
    size_t n_gaussians = 0;
    int tex_res = 0;
    uint64_t adc_triangle_violations = 0;
    std::vector<float> loss_history; // one entry per iteration, both stages
};

// Two-stage optimization: stage 1 fits an untextured model with adaptive
// density control; stage 2 attaches per-Gaussian texture maps and jointly
// optimizes everything with density control disabled. Writes the checkpoint,
// loss curve CSV, and periodic validation renders under cfg "out".
TrainReport train_two_stage(const Config& cfg);

} // namespace texsplat
