#include "core/metrics.hpp"

#include "core/loss.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace texsplat {

double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw std::runtime_error("psnr: image shape mismatch");
    double mse = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = double(a.data[i]) - double(b.data[i]);
        mse += d * d;
    }
    mse /= double(a.data.size());
    if (mse <= 0) return kPsnrCap;
    return std::min(10.0 * std::log10(1.0 / mse), kPsnrCap);
}

double ssim(const Image& a, const Image& b) {
    ImageT<double> ad = a.cast<double>();
    ImageT<double> bd = b.cast<double>();
    return ssim_with_grad<double>(ad, bd, nullptr);
}

void MetricReport::finalize() {
    mean_psnr = 0;
    mean_ssim = 0;
    for (const auto& im : images) {
        mean_psnr += im.psnr;
        mean_ssim += im.ssim;
    }
    if (!images.empty()) {
        mean_psnr /= double(images.size());
        mean_ssim /= double(images.size());
    }
}

void MetricReport::write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write report: " + path);
    f << "image_name,psnr,ssim\n";
    char line[256];
    for (const auto& im : images) {
        std::snprintf(line, sizeof(line), "%s,%.6f,%.6f\n", im.name.c_str(), im.psnr, im.ssim);
        f << line;
    }
}

void MetricReport::write_json(const std::string& path) const {
    nlohmann::json j;
    j["mean_psnr"] = mean_psnr;
    j["mean_ssim"] = mean_ssim;
    j["n_images"] = images.size();
    j["n_gaussians"] = n_gaussians;
    j["texel_count"] = texel_count;
    j["bytes"] = model_bytes;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write report: " + path);
    f << j.dump(2) << "\n";
}

} // namespace texsplat
