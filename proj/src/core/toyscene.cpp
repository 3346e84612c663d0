#include "core/dataset.hpp"

#include "core/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace texsplat {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kToyAngleX = 0.69; // ~40 degree horizontal FOV

Camera<float> look_at(const Vec3<float>& eye, const Vec3<float>& target, const Vec3<float>& up,
                      int res, double angle_x) {
    float focal = float(0.5 * res / std::tan(0.5 * angle_x));
    return look_at_camera(eye, target, up, res, res, focal, focal);
}

// Cameras on a spherical cap around +z looking at the origin. Azimuths follow
// a golden-angle sequence offset by the seed, elevations alternate in a band.
std::vector<Camera<float>> cap_cameras(int count, int res, uint64_t seed, double phase) {
    Rng rng(seed, fnv1a("toy-cameras"));
    double offset = rng.uniform() * 2 * kPi + phase;
    std::vector<Camera<float>> cams;
    for (int i = 0; i < count; ++i) {
        double az = offset + i * 2.399963229728653; // golden angle
        double el = (0.55 + 0.25 * ((i % 3) / 2.0)) * kPi / 2; // 49..72 deg from the plane
        double r = 3.4;
        Vec3<float> eye{float(r * std::cos(el) * std::cos(az)), float(r * std::cos(el) * std::sin(az)),
                        float(r * std::sin(el))};
        cams.push_back(look_at(eye, {0, 0, 0}, {0, 0, 1}, res, kToyAngleX));
    }
    return cams;
}

struct ToyHit {
    Vec3<float> color;
    bool hit = false;
    float depth = 0;
};

// The generators carry their own ray and intersection math so the ground
// truth stays independent of the rendering engine.
Vec3<float> toy_ray_dir(const Camera<float>& cam, double px, double py) {
    Vec3<float> d_cam{float((px - cam.cx) / cam.fx), float((py - cam.cy) / cam.fy), 1.0f};
    return (cam.rot.transposed() * d_cam).normalized();
}

// Cell tones are deliberately unbalanced (0.9 / 0.25) so the untextured
// best fit is a nonzero blob rather than an empty scene, and partial alpha
// over a black background can reproduce the dark cells exactly.
ToyHit checkerboard_quad_hit(const Vec3<float>& o, const Vec3<float>& d) {
    ToyHit h;
    if (std::abs(d.z) < 1e-8f) return h;
    float t = -o.z / d.z;
    if (t <= 0) return h;
    Vec3<float> p = o + d * t;
    if (std::abs(p.x) > 1 || std::abs(p.y) > 1) return h;
    int cx = int(std::floor((p.x + 1) / 0.25f));
    int cy = int(std::floor((p.y + 1) / 0.25f));
    float v = ((cx + cy) % 2 == 0) ? 0.9f : 0.25f;
    h.color = {v, v, v};
    h.hit = true;
    h.depth = t;
    return h;
}

ToyHit quad_hit(const Vec3<float>& o, const Vec3<float>& d, float z_plane, float x0, float x1,
                float y0, float y1, const Vec3<float>& color) {
    ToyHit h;
    if (std::abs(d.z) < 1e-8f) return h;
    float t = (z_plane - o.z) / d.z;
    if (t <= 0) return h;
    Vec3<float> p = o + d * t;
    if (p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1) return h;
    h.color = color;
    h.hit = true;
    h.depth = t;
    return h;
}

ToyHit two_quads_hit(const Vec3<float>& o, const Vec3<float>& d) {
    ToyHit front = quad_hit(o, d, 0.8f, -0.2f, 1.0f, -0.6f, 0.6f, {0.2f, 0.3f, 0.9f});
    ToyHit back = quad_hit(o, d, 0.0f, -1.0f, 0.4f, -0.8f, 0.8f, {0.9f, 0.5f, 0.1f});
    if (front.hit && back.hit) return front.depth <= back.depth ? front : back;
    return front.hit ? front : back;
}

ToyHit sphere_poles_hit(const Vec3<float>& o, const Vec3<float>& d) {
    ToyHit h;
    const float r = 0.9f;
    float b = dot(o, d);
    float c = o.norm2() - r * r;
    float disc = b * b - c;
    if (disc <= 0) return h;
    float t = -b - std::sqrt(disc);
    if (t <= 0) return h;
    Vec3<float> p = o + d * t;
    float sin_lat = p.z / r;
    if (sin_lat > 0.8f) h.color = {0.9f, 0.15f, 0.15f};
    else if (sin_lat < -0.8f) h.color = {0.15f, 0.25f, 0.9f};
    else {
        int band = int(std::floor((sin_lat + 1.0f) * 3.0f));
        h.color = (band % 2 == 0) ? Vec3<float>{0.9f, 0.85f, 0.25f} : Vec3<float>{0.2f, 0.65f, 0.3f};
    }
    h.hit = true;
    h.depth = t;
    return h;
}

template <typename HitFn>
Image render_analytic(const Camera<float>& cam, HitFn&& hit_fn) {
    Image rgba(cam.height, cam.width, 4);
    Vec3<float> origin = cam.position();
    const double sub[2] = {0.25, 0.75}; // 2x2 supersampling
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            Vec3<float> color{0, 0, 0};
            float alpha = 0;
            for (double sy : sub)
                for (double sx : sub) {
                    Vec3<float> dir = toy_ray_dir(cam, x + sx, y + sy);
                    ToyHit h = hit_fn(origin, dir);
                    if (h.hit) {
                        color += h.color;
                        alpha += 1;
                    }
                }
            for (int ch = 0; ch < 3; ++ch) rgba.at(y, x, ch) = color[ch] / 4.0f;
            rgba.at(y, x, 3) = alpha / 4.0f;
        }
    return rgba;
}

} // namespace

ToySpec parse_toy_uri(const std::string& uri) {
    if (uri.rfind("toy:", 0) != 0) throw std::invalid_argument("not a toy dataset URI: " + uri);
    ToySpec spec;
    std::string rest = uri.substr(4);
    size_t q = rest.find('?');
    spec.generator = rest.substr(0, q);
    if (spec.generator != "checkerboard-quad" && spec.generator != "two-quads-occlusion" &&
        spec.generator != "textured-sphere-poles")
        throw std::invalid_argument("unknown toy generator: " + spec.generator);
    if (q != std::string::npos) {
        std::string params = rest.substr(q + 1);
        size_t pos = 0;
        while (pos < params.size()) {
            size_t amp = params.find('&', pos);
            std::string kv = params.substr(pos, amp == std::string::npos ? amp : amp - pos);
            size_t eq = kv.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("bad toy URI param: " + kv);
            std::string key = kv.substr(0, eq);
            long val = std::stol(kv.substr(eq + 1));
            if (key == "views") spec.train_views = int(val);
            else if (key == "test") spec.test_views = int(val);
            else if (key == "res") spec.res = int(val);
            else if (key == "seed") spec.seed = uint64_t(val);
            else throw std::invalid_argument("unknown toy URI param: " + key);
            pos = amp == std::string::npos ? params.size() : amp + 1;
        }
    }
    return spec;
}

ToyFrames make_toy_frames(const ToySpec& spec, const std::string& split) {
    bool is_test = split == "test";
    int count = is_test ? spec.test_views : spec.train_views;
    // Test azimuths sit between the training ones.
    double phase = is_test ? 0.7 : 0.0;

    ToyFrames frames;
    frames.cams = cap_cameras(count, spec.res, spec.seed, phase);

    if (spec.generator == "two-quads-occlusion" && !frames.cams.empty()) {
        // keep one exact head-on view so the front quad provably hides the overlap
        frames.cams[0] = look_at({0, 0, 4}, {0, 0, 0}, {0, 1, 0}, spec.res, kToyAngleX);
    }

    for (int i = 0; i < count; ++i) {
        const Camera<float>& cam = frames.cams[i];
        Image rgba;
        if (spec.generator == "checkerboard-quad")
            rgba = render_analytic(cam, [](const Vec3<float>& o, const Vec3<float>& d) {
                return checkerboard_quad_hit(o, d);
            });
        else if (spec.generator == "two-quads-occlusion")
            rgba = render_analytic(cam, [](const Vec3<float>& o, const Vec3<float>& d) {
                return two_quads_hit(o, d);
            });
        else
            rgba = render_analytic(cam, [](const Vec3<float>& o, const Vec3<float>& d) {
                return sphere_poles_hit(o, d);
            });
        frames.rgba.push_back(std::move(rgba));
        frames.names.push_back("./" + split + "/r_" + std::to_string(i));
    }
    return frames;
}

namespace {

Image composite_rgba(const Image& rgba, const Vec3<float>& bg) {
    Image rgb(rgba.h, rgba.w, 3);
    for (int y = 0; y < rgba.h; ++y)
        for (int x = 0; x < rgba.w; ++x) {
            float a = rgba.at(y, x, 3);
            for (int ch = 0; ch < 3; ++ch)
                rgb.at(y, x, ch) = rgba.at(y, x, ch) * a + bg[ch] * (1 - a);
        }
    return rgb;
}

} // namespace

Dataset make_toy_scene(const ToySpec& spec, const Vec3<float>& background) {
    Dataset ds;
    ds.background = background;
    ds.width = ds.height = spec.res;
    for (const char* split : {"train", "test"}) {
        ToyFrames frames = make_toy_frames(spec, split);
        auto& out = std::string(split) == "train" ? ds.train : ds.test;
        for (size_t i = 0; i < frames.cams.size(); ++i)
            out.push_back({frames.cams[i], composite_rgba(frames.rgba[i], background),
                           frames.names[i]});
    }
    return ds;
}

void write_toy_dataset(const ToySpec& spec, const std::string& dir) {
    namespace fs = std::filesystem;
    for (const char* split : {"train", "test"}) {
        ToyFrames frames = make_toy_frames(spec, split);
        fs::create_directories(fs::path(dir) / split);
        nlohmann::json j;
        j["camera_angle_x"] = kToyAngleX;
        j["frames"] = nlohmann::json::array();
        for (size_t i = 0; i < frames.cams.size(); ++i) {
            const Camera<float>& cam = frames.cams[i];
            // camera-to-world in OpenGL axes (x right, y up, z backward)
            Mat3<float> c2w_cv = cam.rot.transposed();
            nlohmann::json m = nlohmann::json::array();
            Vec3<float> pos = cam.position();
            for (int r = 0; r < 3; ++r) {
                float sign[3] = {1, -1, -1};
                m.push_back({c2w_cv.m[r][0] * sign[0], c2w_cv.m[r][1] * sign[1],
                             c2w_cv.m[r][2] * sign[2], pos[r]});
            }
            m.push_back({0.0, 0.0, 0.0, 1.0});
            nlohmann::json frame;
            frame["file_path"] = frames.names[i];
            frame["transform_matrix"] = m;
            j["frames"].push_back(frame);
            save_png(frames.rgba[i], (fs::path(dir) / (frames.names[i].substr(2) + ".png")).string());
        }
        std::ofstream f(fs::path(dir) / ("transforms_" + std::string(split) + ".json"));
        f << j.dump(2) << "\n";
    }
}

} // namespace texsplat
