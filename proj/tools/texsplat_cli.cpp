// texsplat command line: train / render / eval / diag.
//
// Flags are generated from the library's config schema, so every config key
// has exactly one flag and --help lists them all.

#include <texsplat/texsplat.h>

#include <CLI11.hpp>

#include <cstdio>
#include <map>
#include <memory>
#include <string>

namespace {

struct ConfigArgs {
    std::string config_path;
    std::map<std::string, std::string> overrides; // key -> value, only when passed
};

void add_schema_flags(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.config_path, "config file (key = value lines)");
    for (size_t i = 0; i < ts_config_key_count(); ++i) {
        const char *key, *flag, *type, *def, *help;
        ts_config_key_info(i, &key, &flag, &type, &def, &help);
        std::string desc = std::string(help) + " [" + type + ", default: " +
                           (std::string(def).empty() ? "\"\"" : def) + "]";
        std::string key_s = key;
        cmd->add_option_function<std::string>(
            flag, [&args, key_s](const std::string& v) { args.overrides[key_s] = v; }, desc);
    }
}

int fail(const char* what, ts_status rc) {
    std::fprintf(stderr, "error: %s: %s (status %d)\n", what, ts_last_error(), int(rc));
    return 1;
}

using ConfigPtr = std::unique_ptr<ts_config_t, decltype(&ts_config_destroy)>;
using ModelPtr = std::unique_ptr<ts_model_t, decltype(&ts_model_close)>;

ConfigPtr build_config(const ConfigArgs& args, int& err) {
    ts_config_t* raw = nullptr;
    ts_status rc = ts_config_create(&raw);
    ConfigPtr cfg(raw, &ts_config_destroy);
    if (rc != TS_OK) {
        err = fail("config", rc);
        return cfg;
    }
    if (!args.config_path.empty()) {
        rc = ts_config_load_file(cfg.get(), args.config_path.c_str());
        if (rc != TS_OK) {
            err = fail("config file", rc);
            return cfg;
        }
    }
    for (const auto& [key, value] : args.overrides) {
        rc = ts_config_set(cfg.get(), key.c_str(), value.c_str());
        if (rc != TS_OK) {
            err = fail(key.c_str(), rc);
            return cfg;
        }
    }
    err = 0;
    return cfg;
}

ModelPtr open_model(const ConfigPtr& cfg, int& err) {
    char ckpt[1024];
    ts_status rc = ts_config_get(cfg.get(), "checkpoint", ckpt, sizeof(ckpt));
    ts_model_t* raw = nullptr;
    if (rc == TS_OK && ckpt[0] == '\0') {
        std::fprintf(stderr, "error: --checkpoint is required\n");
        err = 1;
        return ModelPtr(nullptr, &ts_model_close);
    }
    rc = ts_model_open(ckpt, &raw);
    ModelPtr model(raw, &ts_model_close);
    err = rc != TS_OK ? fail("checkpoint", rc) : 0;
    return model;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Textured Gaussian splatting: train, render, evaluate, diagnose"};
    app.require_subcommand(1);

    ConfigArgs train_args, render_args, eval_args, diag_args;
    CLI::App* train = app.add_subcommand("train", "two-stage optimization on a dataset");
    CLI::App* render = app.add_subcommand("render", "render checkpoint views to PNG");
    CLI::App* eval = app.add_subcommand("eval", "PSNR/SSIM metrics on a dataset split");
    CLI::App* diag = app.add_subcommand("diag", "effective-rank diagnostics for a checkpoint");
    add_schema_flags(train, train_args);
    add_schema_flags(render, render_args);
    add_schema_flags(eval, eval_args);
    add_schema_flags(diag, diag_args);

    CLI11_PARSE(app, argc, argv);

    int err = 0;
    if (train->parsed()) {
        ConfigPtr cfg = build_config(train_args, err);
        if (err != 0) return err;
        ts_train_summary_t summary{};
        ts_status rc = ts_train(cfg.get(), &summary);
        if (rc != TS_OK) return fail("train", rc);
        std::printf("final loss %.6f, psnr %.3f dB, ssim %.4f, %llu gaussians, tex res %d\n",
                    summary.final_loss, summary.final_psnr, summary.final_ssim,
                    static_cast<unsigned long long>(summary.n_gaussians), summary.tex_res);
        return 0;
    }
    if (render->parsed()) {
        ConfigPtr cfg = build_config(render_args, err);
        if (err != 0) return err;
        ModelPtr model = open_model(cfg, err);
        if (err != 0) return err;
        ts_status rc = ts_render(model.get(), cfg.get());
        return rc == TS_OK ? 0 : fail("render", rc);
    }
    if (eval->parsed()) {
        ConfigPtr cfg = build_config(eval_args, err);
        if (err != 0) return err;
        ModelPtr model = open_model(cfg, err);
        if (err != 0) return err;
        ts_eval_summary_t summary{};
        ts_status rc = ts_eval(model.get(), cfg.get(), &summary);
        if (rc != TS_OK) return fail("eval", rc);
        std::printf("%llu images, mean psnr %.3f dB, mean ssim %.4f\n",
                    static_cast<unsigned long long>(summary.n_images), summary.mean_psnr,
                    summary.mean_ssim);
        return 0;
    }
    if (diag->parsed()) {
        ConfigPtr cfg = build_config(diag_args, err);
        if (err != 0) return err;
        ModelPtr model = open_model(cfg, err);
        if (err != 0) return err;
        ts_diag_summary_t summary{};
        ts_status rc = ts_diag(model.get(), cfg.get(), &summary);
        if (rc != TS_OK) return fail("diag", rc);
        std::printf("mean effective rank %.3f, flat fraction %.3f\n", summary.mean_effective_rank,
                    summary.flat_fraction);
        return 0;
    }
    return 1;
}
