#include "texsplat/texsplat.h"

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/log.hpp"
#include "core/metrics.hpp"
#include "core/renderer.hpp"
#include "core/trainer.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;
using namespace texsplat;

struct ts_config_t {
    Config cfg = Config::defaults();
};

struct ts_model_t {
    Scene<float> scene;
    CheckpointMeta meta;
};

namespace {

thread_local std::string g_last_error;

ts_status classify(const std::exception& e) {
    g_last_error = e.what();
    if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) return TS_ERROR_INVALID_ARGUMENT;
    if (dynamic_cast<const nlohmann::json::exception*>(&e) != nullptr) return TS_ERROR_PARSE;
    std::string msg = e.what();
    auto has = [&](const char* s) { return msg.find(s) != std::string::npos; };
    if (has("non-finite") || has("NaN")) return TS_ERROR_NUMERIC;
    if (has("config") || has("unknown") || has("expects")) return TS_ERROR_PARSE;
    if (has("file") || has("missing") || has("cannot") || has("truncated") || has("open") ||
        has("write") || has("PNG") || has("PLY") || has("TGTX") || has("TGIM") || has("dataset") ||
        has("checkpoint"))
        return TS_ERROR_IO;
    return TS_ERROR_INTERNAL;
}

template <typename F> ts_status guarded(F&& fn) {
    try {
        fn();
        g_last_error.clear();
        return TS_OK;
    } catch (const std::exception& e) {
        return classify(e);
    } catch (...) {
        g_last_error = "unknown error";
        return TS_ERROR_INTERNAL;
    }
}

size_t model_bytes(const Scene<float>& scene) {
    size_t per_gaussian = 11 + 3 * size_t(sh_coeff_count(scene.sh_degree));
    return scene.size() * per_gaussian * 4 + scene.texels.size() * 4;
}

} // namespace

extern "C" {

const char* ts_version(void) { return "0.1.0"; }

const char* ts_last_error(void) { return g_last_error.c_str(); }

ts_status ts_config_create(ts_config_t** out) {
    if (out == nullptr) {
        g_last_error = "null output pointer";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] { *out = new ts_config_t(); });
}

void ts_config_destroy(ts_config_t* cfg) { delete cfg; }

ts_status ts_config_load_file(ts_config_t* cfg, const char* path) {
    if (cfg == nullptr || path == nullptr) {
        g_last_error = "null argument";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] { cfg->cfg.load_file(path); });
}

ts_status ts_config_set(ts_config_t* cfg, const char* key, const char* value) {
    if (cfg == nullptr || key == nullptr || value == nullptr) {
        g_last_error = "null argument";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] { cfg->cfg.set(key, value); });
}

ts_status ts_config_get(const ts_config_t* cfg, const char* key, char* buf, size_t cap) {
    if (cfg == nullptr || key == nullptr || buf == nullptr) {
        g_last_error = "null argument";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const std::string& v = cfg->cfg.get(key);
        if (v.size() + 1 > cap) throw std::invalid_argument("buffer too small for config value");
        std::memcpy(buf, v.c_str(), v.size() + 1);
    });
}

size_t ts_config_key_count(void) { return config_schema().size(); }

ts_status ts_config_key_info(size_t index, const char** key, const char** flag, const char** type,
                             const char** default_value, const char** help) {
    const auto& schema = config_schema();
    if (index >= schema.size()) {
        g_last_error = "config key index out of range";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    const ConfigKey& k = schema[index];
    if (key != nullptr) *key = k.key;
    if (flag != nullptr) *flag = k.flag;
    if (type != nullptr) *type = k.type;
    if (default_value != nullptr) *default_value = k.def;
    if (help != nullptr) *help = k.help;
    return TS_OK;
}

ts_status ts_train(const ts_config_t* cfg, ts_train_summary_t* summary) {
    if (cfg == nullptr) {
        g_last_error = "null config";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        TrainReport report = train_two_stage(cfg->cfg);
        if (summary != nullptr) {
            summary->final_loss = report.final_loss;
            summary->final_psnr = report.final_psnr;
            summary->final_ssim = report.final_ssim;
            summary->n_gaussians = report.n_gaussians;
            summary->tex_res = report.tex_res;
        }
    });
}

ts_status ts_model_open(const char* checkpoint_dir, ts_model_t** out) {
    if (checkpoint_dir == nullptr || out == nullptr) {
        g_last_error = "null argument";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        auto model = std::make_unique<ts_model_t>();
        model->scene = load_checkpoint(checkpoint_dir, &model->meta);
        *out = model.release();
    });
}

void ts_model_close(ts_model_t* model) { delete model; }

ts_status ts_model_stats(const ts_model_t* model, ts_model_stats_t* stats) {
    if (model == nullptr || stats == nullptr) {
        g_last_error = "null argument";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    stats->n_gaussians = model->scene.size();
    stats->texel_count = model->scene.texels.size();
    stats->model_bytes = model_bytes(model->scene);
    stats->tex_res = model->scene.tex_res;
    stats->sh_degree = model->scene.sh_degree;
    std::snprintf(stats->variant, sizeof(stats->variant), "%s",
                  variant_to_string(model->scene.variant));
    return TS_OK;
}

ts_status ts_render(const ts_model_t* model, const ts_config_t* cfg) {
    if (model == nullptr || cfg == nullptr) {
        g_last_error = "null argument";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const Config& c = cfg->cfg;
        std::string out_dir = c.get("out");
        fs::create_directories(out_dir);
        RenderOptions<float> opts;
        opts.threads = c.get_int("threads");
        bool decompose = c.get_bool("decompose");
        int orbit = c.get_int("orbit");

        std::vector<Camera<float>> cams;
        std::vector<std::string> names;
        if (orbit > 0) {
            // poses on a circle about the scene centroid
            Vec3<float> centroid{0, 0, 0};
            for (const auto& g : model->scene.gaussians) centroid += g.mu;
            if (!model->scene.gaussians.empty()) centroid = centroid / float(model->scene.size());
            float radius = 0.1f;
            for (const auto& g : model->scene.gaussians)
                radius = std::max(radius, (g.mu - centroid).norm());
            radius *= 2.5f;
            for (int i = 0; i < orbit; ++i) {
                double az = 2.0 * 3.14159265358979323846 * i / orbit;
                Vec3<float> eye = centroid + Vec3<float>{float(radius * std::cos(az)),
                                                         float(radius * std::sin(az)),
                                                         float(radius * 0.577)};
                cams.push_back(look_at_camera<float>(eye, centroid, {0, 0, 1}, 800, 800,
                                                     800.0f, 800.0f));
                char name[32];
                std::snprintf(name, sizeof(name), "orbit_%03d", i);
                names.push_back(name);
            }
        } else {
            Dataset ds = load_dataset(c.get("dataset"), model->meta.background);
            const auto& frames = ds.split(c.get("split"));
            if (frames.empty()) throw std::runtime_error("dataset split '" + c.get("split") + "' is empty");
            for (const auto& f : frames) {
                cams.push_back(f.cam);
                names.push_back(fs::path(f.name).filename().string());
            }
        }

        for (size_t i = 0; i < cams.size(); ++i) {
            if (decompose) {
                RenderOptions<float> dopts = opts;
                dopts.decompose = true;
                RenderOutput<float> out = render_forward(model->scene, cams[i], dopts);
                save_png(out.color_clamped(), (fs::path(out_dir) / (names[i] + ".png")).string());
                save_png(out.base.clamped01(),
                         (fs::path(out_dir) / (names[i] + "_base.png")).string());
                save_png(out.tex.clamped01(), (fs::path(out_dir) / (names[i] + "_tex.png")).string());
            } else {
                RenderOutput<float> out = render_forward(model->scene, cams[i], opts);
                save_png(out.color_clamped(), (fs::path(out_dir) / (names[i] + ".png")).string());
            }
        }
        log_info("rendered %zu images to %s", cams.size(), out_dir.c_str());
    });
}

ts_status ts_eval(const ts_model_t* model, const ts_config_t* cfg, ts_eval_summary_t* summary) {
    if (model == nullptr || cfg == nullptr) {
        g_last_error = "null argument";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const Config& c = cfg->cfg;
        std::string out_dir = c.get("out");
        fs::create_directories(out_dir);
        Dataset ds = load_dataset(c.get("dataset"), model->meta.background);
        const auto& frames = ds.split(c.get("split"));
        if (frames.empty())
            throw std::runtime_error("dataset split '" + c.get("split") + "' is empty");

        RenderOptions<float> opts;
        opts.threads = c.get_int("threads");

        MetricReport report;
        report.n_gaussians = model->scene.size();
        report.texel_count = model->scene.texels.size();
        report.model_bytes = model_bytes(model->scene);
        for (const auto& f : frames) {
            RenderOutput<float> out = render_forward(model->scene, f.cam, opts);
            Image rendered = out.color_clamped();
            report.images.push_back(
                {fs::path(f.name).filename().string(), psnr(rendered, f.image), ssim(rendered, f.image)});
        }
        report.finalize();
        report.write_csv((fs::path(out_dir) / "metrics.csv").string());
        report.write_json((fs::path(out_dir) / "metrics.json").string());
        if (summary != nullptr) {
            summary->mean_psnr = report.mean_psnr;
            summary->mean_ssim = report.mean_ssim;
            summary->n_images = report.images.size();
        }
        log_info("eval: %zu images, mean psnr %.3f dB, mean ssim %.4f", report.images.size(),
                 report.mean_psnr, report.mean_ssim);
    });
}

ts_status ts_diag(const ts_model_t* model, const ts_config_t* cfg, ts_diag_summary_t* summary) {
    if (model == nullptr || cfg == nullptr) {
        g_last_error = "null argument";
        return TS_ERROR_INVALID_ARGUMENT;
    }
    return guarded([&] {
        const Config& c = cfg->cfg;
        std::string out_dir = c.get("out");
        fs::create_directories(out_dir);

        const int bins = 20;
        std::vector<size_t> hist(bins, 0);
        double mean = 0;
        size_t flat = 0;
        for (const auto& g : model->scene.gaussians) {
            double r = effective_rank(g.scales());
            mean += r;
            if (r >= 1.9 && r <= 2.1) ++flat;
            int b = int((r - 1.0) / 2.0 * bins);
            b = std::clamp(b, 0, bins - 1); // rank 3.0 lands in the last bin
            ++hist[size_t(b)];
        }
        size_t n = model->scene.size();
        if (n > 0) mean /= double(n);

        std::ofstream csv(fs::path(out_dir) / "effective_rank_hist.csv", std::ios::trunc);
        csv << "bin_lo,bin_hi,count\n";
        for (int b = 0; b < bins; ++b)
            csv << 1.0 + 2.0 * b / bins << "," << 1.0 + 2.0 * (b + 1) / bins << "," << hist[size_t(b)]
                << "\n";

        nlohmann::json j;
        j["n_gaussians"] = n;
        j["mean_effective_rank"] = mean;
        j["flat_fraction"] = n > 0 ? double(flat) / double(n) : 0.0;
        std::ofstream js(fs::path(out_dir) / "diag.json", std::ios::trunc);
        js << j.dump(2) << "\n";

        if (summary != nullptr) {
            summary->mean_effective_rank = mean;
            summary->flat_fraction = n > 0 ? double(flat) / double(n) : 0.0;
        }
        log_info("diag: mean effective rank %.3f, flat fraction %.3f", mean,
                 n > 0 ? double(flat) / double(n) : 0.0);
    });
}

} // extern "C"
