#pragma once

#include "core/image.hpp"

#include <string>
#include <vector>

namespace texsplat {

inline constexpr double kPsnrCap = 99.0;

// 10*log10(1/MSE) over float images in [0,1]; identical images cap at 99 dB.
double psnr(const Image& a, const Image& b);

// Mean local SSIM, shared implementation with the training loss.
double ssim(const Image& a, const Image& b);

struct MetricReport {
    struct PerImage {
        std::string name;
        double psnr = 0;
        double ssim = 0;
    };
    std::vector<PerImage> images;
    double mean_psnr = 0;
    double mean_ssim = 0;
    size_t n_gaussians = 0;
    size_t texel_count = 0;
    size_t model_bytes = 0;

    void finalize();
    void write_csv(const std::string& path) const;
    void write_json(const std::string& path) const;
};

} // namespace texsplat
