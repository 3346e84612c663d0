#include "core/dataset.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace texsplat {

namespace fs = std::filesystem;

const std::vector<CameraFrame>& Dataset::split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "test") return test;
    throw std::invalid_argument("unknown split: " + name);
}

std::vector<CameraFrame> load_split(const std::string& dir, const std::string& split,
                                    const Vec3<float>& background) {
    fs::path json_path = fs::path(dir) / ("transforms_" + split + ".json");
    std::ifstream f(json_path);
    if (!f) throw std::runtime_error("missing transforms file: " + json_path.string());

    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed JSON in " + json_path.string() + ": " + e.what());
    }
    if (!j.contains("camera_angle_x") || !j.contains("frames"))
        throw std::runtime_error("malformed transforms file (camera_angle_x/frames): " +
                                 json_path.string());

    double angle_x = j["camera_angle_x"].get<double>();
    std::vector<CameraFrame> frames;
    int width = -1, height = -1;

    for (const auto& fr : j["frames"]) {
        std::string file_path = fr.at("file_path").get<std::string>();
        fs::path img_path = fs::path(dir) / file_path;
        if (!fs::exists(img_path)) img_path = fs::path(dir) / (file_path + ".png");
        if (!fs::exists(img_path))
            throw std::runtime_error("missing image file: " + img_path.string());

        Image src = load_png(img_path.string());
        if (width < 0) {
            width = src.w;
            height = src.h;
        } else if (src.w != width || src.h != height) {
            throw std::runtime_error("inconsistent image size in dataset: " + img_path.string());
        }

        // straight-alpha compositing onto the configured background;
        // src is gray, gray+alpha, RGB, or RGBA
        Image rgb(src.h, src.w, 3);
        const bool gray = src.c <= 2;
        const int alpha_ch = src.c == 2 ? 1 : (src.c == 4 ? 3 : -1);
        for (int y = 0; y < src.h; ++y)
            for (int x = 0; x < src.w; ++x) {
                float a = alpha_ch >= 0 ? src.at(y, x, alpha_ch) : 1.0f;
                for (int ch = 0; ch < 3; ++ch) {
                    float v = src.at(y, x, gray ? 0 : ch);
                    rgb.at(y, x, ch) = v * a + background[ch] * (1 - a);
                }
            }

        const auto& m = fr.at("transform_matrix");
        if (m.size() < 3) throw std::runtime_error("malformed transform_matrix: " + json_path.string());
        // row-major camera-to-world, OpenGL axes (x right, y up, z backward)
        Mat3<float> c2w;
        Vec3<float> pos;
        for (int r = 0; r < 3; ++r) {
            c2w.m[r][0] = m[r][0].get<float>();
            c2w.m[r][1] = -m[r][1].get<float>(); // flip to y down
            c2w.m[r][2] = -m[r][2].get<float>(); // flip to z forward
            pos[r] = m[r][3].get<float>();
        }

        Camera<float> cam;
        cam.width = width;
        cam.height = height;
        cam.fx = cam.fy = float(0.5 * width / std::tan(0.5 * angle_x));
        cam.cx = float(width) / 2.0f;
        cam.cy = float(height) / 2.0f;
        cam.rot = c2w.transposed();
        cam.trans = -(cam.rot * pos);

        // rigid-transform sanity: R R^T = I within 1e-5
        Mat3<float> should_be_i = cam.rot * cam.rot.transposed();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                float want = r == c ? 1.0f : 0.0f;
                if (std::abs(should_be_i.m[r][c] - want) > 1e-4f)
                    throw std::runtime_error("non-rigid camera pose in " + json_path.string());
            }

        frames.push_back({cam, std::move(rgb), file_path});
    }
    return frames;
}

Dataset load_dataset(const std::string& path, const Vec3<float>& background) {
    if (path.rfind("toy:", 0) == 0) return make_toy_scene(parse_toy_uri(path), background);

    Dataset ds;
    ds.background = background;
    ds.train = load_split(path, "train", background);
    if (fs::exists(fs::path(path) / "transforms_test.json"))
        ds.test = load_split(path, "test", background);
    if (ds.train.empty()) throw std::runtime_error("dataset has no training frames: " + path);
    ds.width = ds.train.front().cam.width;
    ds.height = ds.train.front().cam.height;
    return ds;
}

} // namespace texsplat
