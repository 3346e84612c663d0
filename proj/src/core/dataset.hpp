#pragma once

#include "core/camera.hpp"
#include "core/image.hpp"
#include "core/vec.hpp"

#include <string>
#include <vector>

namespace texsplat {

struct CameraFrame {
    Camera<float> cam;
    Image image; // RGB in [0,1], already composited onto the background
    std::string name;
};

struct Dataset {
    std::vector<CameraFrame> train, test;
    Vec3<float> background{1, 1, 1};
    int width = 0, height = 0;

    const std::vector<CameraFrame>& split(const std::string& name) const;
};

// NeRF-synthetic layout: transforms_{split}.json with camera_angle_x and
// frames[].{file_path, transform_matrix} (row-major camera-to-world, OpenGL
// axes), images as PNG. RGBA sources are composited onto `background` with
// straight alpha. Paths starting with "toy:" are procedural toy datasets.
Dataset load_dataset(const std::string& path, const Vec3<float>& background);

std::vector<CameraFrame> load_split(const std::string& dir, const std::string& split,
                                    const Vec3<float>& background);

// ---------------------------------------------------------------------------
// Procedural toy scenes: deterministic analytic ground truth, independent of
// the renderer.

struct ToySpec {
    std::string generator; // checkerboard-quad | two-quads-occlusion | textured-sphere-poles
    int train_views = 8;
    int test_views = 4;
    int res = 64;
    uint64_t seed = 1;
};

ToySpec parse_toy_uri(const std::string& uri); // toy:<name>?views=..&test=..&res=..&seed=..

struct ToyFrames {
    std::vector<Camera<float>> cams;
    std::vector<Image> rgba; // 4-channel analytic renders
    std::vector<std::string> names;
};

ToyFrames make_toy_frames(const ToySpec& spec, const std::string& split);

Dataset make_toy_scene(const ToySpec& spec, const Vec3<float>& background);

// Writes a toy dataset to disk in the NeRF-synthetic layout (RGBA PNGs).
void write_toy_dataset(const ToySpec& spec, const std::string& dir);

} // namespace texsplat
