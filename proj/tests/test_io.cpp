#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/checkpoint.hpp"
#include "core/dataset.hpp"
#include "core/image.hpp"
#include "testutil.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace texsplat;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("texsplat_io_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

bool scenes_bit_equal(const Scene<float>& a, const Scene<float>& b) {
    if (a.size() != b.size() || a.texels.size() != b.texels.size()) return false;
    auto feq = [](float x, float y) { return std::memcmp(&x, &y, 4) == 0; };
    for (size_t i = 0; i < a.size(); ++i) {
        const auto &ga = a.gaussians[i], &gb = b.gaussians[i];
        for (int k = 0; k < 3; ++k)
            if (!feq(ga.mu[k], gb.mu[k]) || !feq(ga.log_scale[k], gb.log_scale[k])) return false;
        for (int k = 0; k < 4; ++k)
            if (!feq(ga.quat[k], gb.quat[k])) return false;
        if (!feq(ga.opacity_logit, gb.opacity_logit)) return false;
        for (int l = 0; l < sh_coeff_count(a.sh_degree); ++l)
            for (int k = 0; k < 3; ++k)
                if (!feq(ga.sh[l][k], gb.sh[l][k])) return false;
    }
    for (size_t j = 0; j < a.texels.size(); ++j)
        if (!feq(a.texels[j], b.texels[j])) return false;
    return true;
}

} // namespace

TEST_CASE("png round trip is exact for quantized values") {
    Rng rng(1);
    for (int channels : {3, 4}) {
        Image img(13, 17, channels);
        for (auto& v : img.data) v = float(rng.uniform_int(256)) / 255.0f;
        fs::path p = temp_dir("png") / ("img" + std::to_string(channels) + ".png");
        save_png(img, p.string());
        Image back = load_png(p.string());
        REQUIRE(back.c == channels);
        REQUIRE(back.h == 13);
        REQUIRE(back.w == 17);
        for (size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == img.data[i]);
    }
    CHECK_THROWS_AS((void)load_png("/nonexistent/file.png"), std::runtime_error);
}

TEST_CASE("tgim round trip") {
    Rng rng(2);
    Image img(7, 9, 3);
    for (auto& v : img.data) v = float(rng.uniform(-2, 2));
    fs::path p = temp_dir("tgim") / "img.tgim";
    save_tgim(img, p.string());
    Image back = load_tgim(p.string());
    CHECK(back.h == 7);
    CHECK(back.w == 9);
    CHECK(std::memcmp(back.data.data(), img.data.data(), img.data.size() * 4) == 0);
}

TEST_CASE("toy generators are deterministic and contract-complete") {
    ToySpec spec = parse_toy_uri("toy:checkerboard-quad?views=8&test=3&res=64&seed=1");
    CHECK(spec.train_views == 8);
    CHECK(spec.test_views == 3);
    CHECK(spec.res == 64);

    Dataset ds = make_toy_scene(spec, {0, 0, 0});
    CHECK(ds.train.size() == 8);
    CHECK(ds.test.size() == 3);
    CHECK(ds.width == 64);

    // checkerboard visible in every view: both dark and bright pixels
    for (const auto& f : ds.train) {
        int bright = 0, dark = 0;
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) {
                float v = f.image.at(y, x, 0);
                if (v > 0.8f) ++bright;
                if (v < 0.2f) ++dark;
            }
        CHECK(bright > 100);
        CHECK(dark > 100);
    }

    // identical spec and seed give identical bytes
    Dataset ds2 = make_toy_scene(spec, {0, 0, 0});
    for (size_t i = 0; i < ds.train.size(); ++i)
        CHECK(std::memcmp(ds.train[i].image.data.data(), ds2.train[i].image.data.data(),
                          ds.train[i].image.data.size() * 4) == 0);

    CHECK_THROWS_AS((void)parse_toy_uri("toy:unknown-generator"), std::invalid_argument);
}

TEST_CASE("two-quads-occlusion hides the overlap from the head-on view") {
    ToySpec spec = parse_toy_uri("toy:two-quads-occlusion?views=4&test=1&res=64&seed=1");
    ToyFrames frames = make_toy_frames(spec, "train");
    // frame 0 is the exact head-on view; overlap region x in [-0.2, 0.4]
    const Camera<float>& cam = frames.cams[0];
    const Image& img = frames.rgba[0];
    Vec3<float> front_color{0.2f, 0.3f, 0.9f};
    // world (0.1, 0, 0.8) on the front quad projects inside the overlap
    Vec3<float> pc = cam.to_cam({0.1f, 0.0f, 0.8f});
    int px = int(cam.fx * pc.x / pc.z + cam.cx);
    int py = int(cam.fy * pc.y / pc.z + cam.cy);
    CHECK(img.at(py, px, 2) == doctest::Approx(front_color.z).epsilon(0.05));
    CHECK(img.at(py, px, 0) == doctest::Approx(front_color.x).epsilon(0.05));
}

TEST_CASE("textured-sphere-poles renders distinct pole caps") {
    ToySpec spec = parse_toy_uri("toy:textured-sphere-poles?views=2&test=1&res=48&seed=2");
    Dataset ds = make_toy_scene(spec, {1, 1, 1});
    CHECK(ds.train.size() == 2);
    bool saw_band = false;
    for (const auto& f : ds.train)
        for (int y = 0; y < 48 && !saw_band; ++y)
            for (int x = 0; x < 48 && !saw_band; ++x)
                if (f.image.at(y, x, 0) > 0.8f && f.image.at(y, x, 1) > 0.75f &&
                    f.image.at(y, x, 2) < 0.4f)
                    saw_band = true; // the yellow latitude band
    CHECK(saw_band);
}

TEST_CASE("toy dataset written to disk loads back through the NeRF loader") {
    ToySpec spec = parse_toy_uri("toy:checkerboard-quad?views=3&test=2&res=32&seed=5");
    fs::path dir = temp_dir("toydisk");
    write_toy_dataset(spec, dir.string());

    CHECK(fs::exists(dir / "transforms_train.json"));
    CHECK(fs::exists(dir / "transforms_test.json"));
    CHECK(fs::exists(dir / "train" / "r_0.png"));

    Vec3<float> bg{0, 0, 0};
    Dataset from_disk = load_dataset(dir.string(), bg);
    Dataset in_memory = make_toy_scene(spec, bg);
    REQUIRE(from_disk.train.size() == in_memory.train.size());

    for (size_t i = 0; i < from_disk.train.size(); ++i) {
        const Camera<float>&a = from_disk.train[i].cam, &b = in_memory.train[i].cam;
        CHECK(a.fx == doctest::Approx(b.fx).epsilon(1e-5));
        CHECK((a.position() - b.position()).norm() < 1e-4f);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(a.rot.m[r][c] == doctest::Approx(b.rot.m[r][c]).epsilon(2e-4));
        // images differ only by 8-bit quantization
        double worst = 0;
        for (size_t k = 0; k < from_disk.train[i].image.data.size(); ++k)
            worst = std::max(worst, std::abs(double(from_disk.train[i].image.data[k]) -
                                             double(in_memory.train[i].image.data[k])));
        CHECK(worst <= 1.0 / 255.0 + 1e-6);
    }
}

TEST_CASE("dataset loader errors are distinct and informative") {
    fs::path dir = temp_dir("dserr");

    // missing transforms file
    CHECK_THROWS_WITH_AS((void)load_split(dir.string(), "train", {0, 0, 0}),
                         doctest::Contains("missing transforms"), std::runtime_error);

    // malformed JSON
    std::ofstream(dir / "transforms_train.json") << "{ not json";
    CHECK_THROWS_WITH_AS((void)load_split(dir.string(), "train", {0, 0, 0}),
                         doctest::Contains("malformed JSON"), std::runtime_error);

    // referenced image missing
    std::ofstream(dir / "transforms_train.json", std::ios::trunc)
        << R"({"camera_angle_x": 0.7, "frames": [{"file_path": "./train/r_0",
             "transform_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,4],[0,0,0,1]]}]})";
    CHECK_THROWS_WITH_AS((void)load_split(dir.string(), "train", {0, 0, 0}),
                         doctest::Contains("missing image"), std::runtime_error);
}

TEST_CASE("loader focal length and alpha compositing") {
    fs::path dir = temp_dir("dsfocal");
    fs::create_directories(dir / "train");

    Image rgba(4, 800, 4);
    for (int x = 0; x < 800; ++x) {
        // column 0: opaque red; column 1: fully transparent
        for (int y = 0; y < 4; ++y) {
            rgba.at(y, x, 0) = 1.0f;
            rgba.at(y, x, 3) = x == 0 ? 1.0f : 0.0f;
        }
    }
    save_png(rgba, (dir / "train" / "r_0.png").string());

    std::ofstream(dir / "transforms_train.json")
        << R"({"camera_angle_x": 1.5707963267948966, "frames": [{"file_path": "./train/r_0",
             "transform_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,4],[0,0,0,1]]}]})";

    auto frames = load_split(dir.string(), "train", {1, 1, 1});
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].cam.fx == doctest::Approx(400.0)); // 0.5 * 800 / tan(pi/4)

    // opaque pixel keeps its color; transparent pixel becomes the background
    CHECK(frames[0].image.at(0, 0, 0) == doctest::Approx(1.0));
    CHECK(frames[0].image.at(0, 0, 1) == doctest::Approx(0.0));
    CHECK(frames[0].image.at(0, 1, 0) == doctest::Approx(1.0));
    CHECK(frames[0].image.at(0, 1, 1) == doctest::Approx(1.0));
}

TEST_CASE("checkpoint round trip is bit-exact for every variant and resolution") {
    Rng rng(21);
    for (TextureVariant variant : {TextureVariant::None, TextureVariant::AlphaOnly,
                                   TextureVariant::RGB, TextureVariant::RGBA}) {
        for (int res : {1, 2, 4, 8, 16}) {
            if (variant == TextureVariant::None && res > 1) continue;
            Scene<float> scene = testutil::random_scene<float>(
                rng, 10, variant, variant == TextureVariant::None ? 0 : res, 3);
            CheckpointMeta meta;
            meta.variant = variant_to_string(variant);
            meta.tex_res = scene.tex_res;
            meta.sh_degree = 3;
            meta.m = 3.0f;
            meta.background = {0, 0, 0};
            meta.iterations = 123;
            meta.seed = 7;
            fs::path dir = temp_dir("ckpt");
            save_checkpoint(scene, meta, dir.string());

            CheckpointMeta back_meta;
            Scene<float> back = load_checkpoint(dir.string(), &back_meta);
            CHECK(scenes_bit_equal(scene, back));
            CHECK(back_meta.iterations == 123);
            CHECK(back_meta.variant == meta.variant);

            if (variant == TextureVariant::None)
                CHECK_FALSE(fs::exists(dir / "textures.tgtx"));
        }
    }
}

TEST_CASE("checkpoint corruption is detected") {
    Rng rng(22);
    Scene<float> scene = testutil::random_scene<float>(rng, 6, TextureVariant::RGBA, 4, 1);
    CheckpointMeta meta;
    meta.variant = "rgba";
    meta.tex_res = 4;
    meta.sh_degree = 1;
    fs::path dir = temp_dir("ckptbad");
    save_checkpoint(scene, meta, dir.string());

    // TGTX count mismatch with the PLY
    save_tgtx((dir / "textures.tgtx").string(),
              std::vector<float>(5 * 4 * 4 * 4, 0.f), 5, 4, 4);
    CHECK_THROWS_WITH_AS((void)load_checkpoint(dir.string()), doctest::Contains("count mismatch"),
                         std::runtime_error);

    // truncated blob
    save_checkpoint(scene, meta, dir.string());
    {
        auto path = (dir / "textures.tgtx").string();
        std::ifstream in(path, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes.resize(bytes.size() - 8);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), std::streamsize(bytes.size()));
    }
    CHECK_THROWS_WITH_AS((void)load_checkpoint(dir.string()), doctest::Contains("truncated"),
                         std::runtime_error);

    // bad version
    save_checkpoint(scene, meta, dir.string());
    {
        auto path = (dir / "textures.tgtx").string();
        std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
        f.seekp(4);
        uint32_t bad = 99;
        f.write(reinterpret_cast<const char*>(&bad), 4);
    }
    CHECK_THROWS_WITH_AS((void)load_checkpoint(dir.string()), doctest::Contains("version"),
                         std::runtime_error);

    // missing TGTX for a textured variant
    save_checkpoint(scene, meta, dir.string());
    fs::remove(dir / "textures.tgtx");
    CHECK_THROWS_WITH_AS((void)load_checkpoint(dir.string()), doctest::Contains("textures.tgtx"),
                         std::runtime_error);
}

TEST_CASE("frame order follows the JSON order") {
    ToySpec spec = parse_toy_uri("toy:checkerboard-quad?views=5&test=1&res=16&seed=9");
    fs::path dir = temp_dir("order");
    write_toy_dataset(spec, dir.string());
    auto frames = load_split(dir.string(), "train", {0, 0, 0});
    REQUIRE(frames.size() == 5);
    for (size_t i = 0; i < 5; ++i)
        CHECK(frames[i].name == "./train/r_" + std::to_string(i));
}
