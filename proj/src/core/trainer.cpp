#include "core/trainer.hpp"

#include "core/adam.hpp"
#include "core/adc.hpp"
#include "core/checkpoint.hpp"
#include "core/dataset.hpp"
#include "core/log.hpp"
#include "core/loss.hpp"
#include "core/metrics.hpp"
#include "core/renderer.hpp"
#include "core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace texsplat {

namespace fs = std::filesystem;

namespace {

struct Groups {
    AdamGroup mu{"position"}, quat{"rotation"}, log_scale{"scale"}, opacity{"opacity"},
        sh_dc{"sh_dc"}, sh_rest{"sh_rest"}, tex{"texture"};

    void resize(const Scene<float>& scene) {
        size_t n = scene.size();
        mu.resize(n * 3);
        quat.resize(n * 4);
        log_scale.resize(n * 3);
        opacity.resize(n);
        sh_dc.resize(n * 3);
        sh_rest.resize(n * 45);
        tex.resize(scene.texels.size());
    }

    void remap(const std::vector<int>& src) {
        mu.remap(src, 3);
        quat.remap(src, 4);
        log_scale.remap(src, 3);
        opacity.remap(src, 1);
        sh_dc.remap(src, 3);
        sh_rest.remap(src, 45);
    }
};

double position_lr(const Config& cfg, double extent, int step, int max_steps) {
    double lr0 = cfg.get_double("lr_position") * extent;
    double lr1 = cfg.get_double("lr_position_final") * extent;
    if (lr0 <= 0.0 || lr1 <= 0.0) return 0.0; // log-lerp needs positive rates
    double t = std::clamp(double(step) / std::max(1, max_steps), 0.0, 1.0);
    return std::exp(std::log(lr0) * (1.0 - t) + std::log(lr1) * t);
}

// Mean distance to the 3 nearest neighbors, the reference initial scale.
float mean_knn_distance(const std::vector<Vec3<float>>& pts, size_t i) {
    float best[3] = {1e30f, 1e30f, 1e30f};
    for (size_t j = 0; j < pts.size(); ++j) {
        if (j == i) continue;
        float d = (pts[j] - pts[i]).norm();
        if (d < best[0]) { best[2] = best[1]; best[1] = best[0]; best[0] = d; }
        else if (d < best[1]) { best[2] = best[1]; best[1] = d; }
        else if (d < best[2]) { best[2] = d; }
    }
    int cnt = int(std::min<size_t>(3, pts.size() - 1));
    float sum = 0;
    for (int k = 0; k < cnt; ++k) sum += best[k];
    return cnt > 0 ? sum / float(cnt) : 0.1f;
}

Scene<float> init_scene(const Config& cfg, const Dataset& ds, double scene_extent) {
    Rng rng = make_stream(uint64_t(cfg.get_int("seed")), "init");
    size_t n = size_t(std::max(1, cfg.get_int("init_gaussians")));
    float radius = float(cfg.get_double("init_radius"));

    std::vector<Vec3<float>> pts;
    while (pts.size() < n) {
        Vec3<float> p{float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))};
        if (p.norm2() <= 1.0f) pts.push_back(p * radius);
    }

    Scene<float> scene;
    scene.background = ds.background;
    scene.m_extent = float(cfg.get_double("m"));
    scene.sh_degree = 0;
    scene.gaussians.resize(n);
    for (size_t i = 0; i < n; ++i) {
        Gaussian<float>& g = scene.gaussians[i];
        g.mu = pts[i];
        g.quat = {1, 0, 0, 0};
        float s = std::max(mean_knn_distance(pts, i), 1e-4f);
        g.log_scale = {std::log(s), std::log(s), std::log(s)};
        g.opacity_logit = inverse_sigmoid(0.1f);
        g.sh = {}; // gray: SH dc of 0 plus the 0.5 offset
    }
    (void)scene_extent;
    return scene;
}

void adam_all(Groups& groups, Scene<float>& scene, const GradientBuffer<float>& grads,
              int64_t step, const Config& cfg, double pos_lr) {
    size_t n = scene.size();
    groups.mu.lr = pos_lr;
    groups.quat.lr = cfg.get_double("lr_rotation");
    groups.log_scale.lr = cfg.get_double("lr_scale");
    groups.opacity.lr = cfg.get_double("lr_opacity");
    groups.sh_dc.lr = cfg.get_double("lr_sh");
    groups.sh_rest.lr = cfg.get_double("lr_sh") / 20.0;
    groups.tex.lr = cfg.get_double("lr_texture");

    adam_step(groups.mu, step, [&](auto&& upd) {
        for (size_t i = 0; i < n; ++i)
            for (int k = 0; k < 3; ++k) upd(i * 3 + k, scene.gaussians[i].mu[k], grads.d_mu[i][k]);
    });
    adam_step(groups.quat, step, [&](auto&& upd) {
        for (size_t i = 0; i < n; ++i)
            for (int k = 0; k < 4; ++k) upd(i * 4 + k, scene.gaussians[i].quat[k], grads.d_quat[i][k]);
    });
    adam_step(groups.log_scale, step, [&](auto&& upd) {
        for (size_t i = 0; i < n; ++i)
            for (int k = 0; k < 3; ++k)
                upd(i * 3 + k, scene.gaussians[i].log_scale[k], grads.d_log_scale[i][k]);
    });
    adam_step(groups.opacity, step, [&](auto&& upd) {
        for (size_t i = 0; i < n; ++i) upd(i, scene.gaussians[i].opacity_logit, grads.d_opacity_logit[i]);
    });
    adam_step(groups.sh_dc, step, [&](auto&& upd) {
        for (size_t i = 0; i < n; ++i)
            for (int k = 0; k < 3; ++k) upd(i * 3 + k, scene.gaussians[i].sh[0][k], grads.d_sh[i * 16][k]);
    });
    adam_step(groups.sh_rest, step, [&](auto&& upd) {
        for (size_t i = 0; i < n; ++i)
            for (int l = 1; l < 16; ++l)
                for (int k = 0; k < 3; ++k)
                    upd(i * 45 + (l - 1) * 3 + k, scene.gaussians[i].sh[l][k],
                        grads.d_sh[i * 16 + l][k]);
    });
    if (!scene.texels.empty())
        adam_step(groups.tex, step, [&](auto&& upd) {
            for (size_t j = 0; j < scene.texels.size(); ++j) upd(j, scene.texels[j], grads.d_texels[j]);
        });
}

} // namespace

TrainReport train_two_stage(const Config& cfg) {
    const uint64_t seed = uint64_t(cfg.get_int("seed"));
    const std::string out_dir = cfg.get("out");
    fs::create_directories(out_dir);
    fs::create_directories(fs::path(out_dir) / "val");

    Vec3<float> bg = cfg.get_background();
    Dataset ds = load_dataset(cfg.get("dataset"), bg);
    if (ds.train.empty()) throw std::runtime_error("dataset has no training frames");

    // Scene extent from the camera rig, the reference positional-LR scale.
    Vec3<float> center{0, 0, 0};
    for (const auto& f : ds.train) center += f.cam.position();
    center = center / float(ds.train.size());
    float extent = 0;
    for (const auto& f : ds.train) extent = std::max(extent, (f.cam.position() - center).norm());
    extent *= 1.1f;

    Scene<float> scene = init_scene(cfg, ds, extent);
    const TextureVariant variant = variant_from_string(cfg.get("variant"));
    const int max_sh_degree = std::clamp(cfg.get_int("sh_degree"), 0, 3);
    const float lambda = float(cfg.get_double("lambda"));
    const int threads = cfg.get_int("threads");
    const int s1 = cfg.get_int("iters_stage1");
    const int s2 = variant == TextureVariant::None ? 0 : cfg.get_int("iters_stage2");

    Groups groups;
    groups.resize(scene);
    AdcState adc;
    adc.resize(scene.size());
    AdcConfig adc_cfg;
    adc_cfg.tau = cfg.get_double("adc_tau");
    adc_cfg.interval = cfg.get_int("adc_interval");
    adc_cfg.start = cfg.get_int("adc_start");
    adc_cfg.end = cfg.get_int("adc_end");
    adc_cfg.percent_dense = cfg.get_double("adc_percent_dense");
    adc_cfg.prune_opacity = cfg.get_double("prune_opacity");
    adc_cfg.split_factor = cfg.get_double("split_factor");
    adc_cfg.opacity_reset_interval = cfg.get_int("opacity_reset_interval");
    adc_cfg.scene_extent = extent;
    const bool adc_enable = cfg.get_bool("adc_enable");

    Rng cam_rng = make_stream(seed, "camera-select");
    Rng adc_rng = make_stream(seed, "adc");

    std::ofstream loss_csv(fs::path(out_dir) / "loss.csv", std::ios::trunc);
    loss_csv << "iteration,stage,loss,l1,ssim\n";

    TrainReport report;
    int64_t adam_t = 0;
    RenderOptions<float> ropts;
    ropts.threads = threads;

    auto run_stage = [&](int stage, int iters) {
        for (int it = 1; it <= iters; ++it) {
            ++adam_t;
            const CameraFrame& frame = ds.train[size_t(cam_rng.uniform_int(int(ds.train.size())))];
            RenderOutput<float> out = render_forward(scene, frame.cam, ropts);
            LossResult<float> loss = photometric_loss<float>(out.color, frame.image, lambda);
            if (!std::isfinite(loss.value))
                throw std::runtime_error("training aborted: non-finite loss at iteration " +
                                         std::to_string(adam_t) + " (stage " +
                                         std::to_string(stage) + ")");
            report.loss_history.push_back(loss.value);
            loss_csv << adam_t << "," << stage << "," << loss.value << "," << loss.l1 << ","
                     << loss.ssim << "\n";

            GradientBuffer<float> grads =
                render_backward(scene, frame.cam, loss.d_image, out, ropts);

            double pos_lr = position_lr(cfg, extent, it, iters);
            adam_all(groups, scene, grads, adam_t, cfg, pos_lr);

            if (stage == 1 && adc_enable) {
                adc.update(grads);
                if (adc_cfg.interval > 0 && it >= adc_cfg.start && it <= adc_cfg.end &&
                    it % adc_cfg.interval == 0) {
                    AdcResult res = adc_step(scene, adc, adc_cfg, adc_rng);
                    if (res.changed) {
                        groups.remap(res.remap);
                        log_debug("adc step %d: +%zu clone +%zu split -%zu prune -> %zu gaussians",
                                  it, res.n_cloned, res.n_split, res.n_pruned, scene.size());
                    }
                }
                if (adc_cfg.opacity_reset_interval > 0 && it % adc_cfg.opacity_reset_interval == 0) {
                    reset_opacities(scene);
                    groups.opacity.resize(scene.size()); // reference behavior: clear moments
                }
            }
            int sh_every = cfg.get_int("sh_upgrade_interval");
            if (stage == 1 && scene.sh_degree < max_sh_degree && sh_every > 0 &&
                it % sh_every == 0)
                scene.sh_degree += 1;

            int log_every = cfg.get_int("log_interval");
            if (log_every > 0 && it % log_every == 0)
                log_info("stage %d iter %5d  loss %.5f  gaussians %zu", stage, it, loss.value,
                         scene.size());
            int val_every = cfg.get_int("val_interval");
            if (val_every > 0 && it % val_every == 0 && !ds.test.empty()) {
                RenderOutput<float> val = render_forward(scene, ds.test[0].cam, ropts);
                save_png(val.color_clamped(),
                         (fs::path(out_dir) / "val" /
                          ("stage" + std::to_string(stage) + "_iter" + std::to_string(it) + ".png"))
                             .string());
            }
        }
    };

    log_info("stage 1: %d iterations, %zu initial gaussians", s1, scene.size());
    run_stage(1, s1);

    scene.baseline_count = scene.size();
    double fraction = cfg.get_double("fraction");
    if (fraction < 1.0) {
        AdcResult res = prune_to_fraction(scene, fraction);
        groups.remap(res.remap);
        log_info("pruned to fraction %.3f: %zu gaussians", fraction, scene.size());
    }

    int tex_res = 0;
    if (variant != TextureVariant::None) {
        tex_res = cfg.get_int("tex_res") > 0
                      ? cfg.get_int("tex_res")
                      : texel_budget_alloc(scene.size(), size_t(cfg.get_int("texel_budget")));
        scene.attach_textures(tex_res, variant);
        groups.tex.resize(scene.texels.size());
        log_info("stage 2: %d iterations, %dx%d %s textures on %zu gaussians", s2, tex_res, tex_res,
                 variant_to_string(variant), scene.size());
        run_stage(2, s2);
    }

    // final checkpoint + held-out metrics
    CheckpointMeta meta;
    meta.variant = variant_to_string(variant);
    meta.tex_res = tex_res;
    meta.m = float(cfg.get_double("m"));
    meta.sh_degree = scene.sh_degree;
    meta.background = bg;
    meta.iterations = adam_t;
    meta.seed = seed;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(cfg.hash()));
    meta.config_hash = hash;
    std::string ckpt_dir = (fs::path(out_dir) / "checkpoint").string();
    save_checkpoint(scene, meta, ckpt_dir);

    const auto& eval_split = ds.test.empty() ? ds.train : ds.test;
    double psnr_sum = 0, ssim_sum = 0;
    for (const auto& f : eval_split) {
        RenderOutput<float> out = render_forward(scene, f.cam, ropts);
        Image rendered = out.color_clamped();
        psnr_sum += psnr(rendered, f.image);
        ssim_sum += ssim(rendered, f.image);
    }
    report.final_psnr = psnr_sum / double(eval_split.size());
    report.final_ssim = ssim_sum / double(eval_split.size());
    report.final_loss = report.loss_history.empty() ? 0.0 : double(report.loss_history.back());
    report.checkpoint_dir = ckpt_dir;
    report.n_gaussians = scene.size();
    report.tex_res = tex_res;
    report.adc_triangle_violations = adc.triangle_violations;
    log_info("done: %zu gaussians, test psnr %.2f dB", scene.size(), report.final_psnr);
    return report;
}

} // namespace texsplat
