#include "core/config.hpp"

#include "core/rng.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace texsplat {

const std::vector<ConfigKey>& config_schema() {
    static const std::vector<ConfigKey> schema = {
        {"dataset", "--dataset", "string", "",
         "dataset directory (NeRF-synthetic layout) or toy:<generator>?views=N&res=N URI"},
        {"out", "--out", "string", "out", "output directory"},
        {"checkpoint", "--checkpoint", "string", "", "checkpoint directory (render/eval/diag)"},
        {"variant", "--variant", "string", "rgba", "texture variant: none|alpha|rgb|rgba"},
        {"tex_res", "--tex-res", "int", "0", "fixed texture resolution (0: use texel_budget)"},
        {"texel_budget", "--texel-budget", "int", "65536",
         "total texel budget shared across Gaussians"},
        {"m", "--m", "float", "3", "texture extent multiplier (map spans +-m*sigma)"},
        {"lambda", "--lambda", "float", "0.8", "L1 weight in the photometric loss"},
        {"iters_stage1", "--iters-stage1", "int", "2000",
         "stage-1 (untextured) iterations; 30000 for full-scale runs"},
        {"iters_stage2", "--iters-stage2", "int", "2000", "stage-2 (textured) iterations"},
        {"fraction", "--fraction", "float", "1", "Gaussian fraction kept after stage 1"},
        {"seed", "--seed", "int", "1", "master random seed"},
        {"threads", "--threads", "int", "0", "worker threads (0: hardware count)"},
        {"background", "--background", "string", "white", "black | white | R,G,B"},
        {"sh_degree", "--sh-degree", "int", "3", "max spherical harmonics degree (0..3)"},
        {"init_gaussians", "--init-gaussians", "int", "64", "random-init Gaussian count"},
        {"init_radius", "--init-radius", "float", "1.5", "random-init placement radius"},
        {"split", "--split", "string", "test", "camera split for render/eval: train|test"},
        {"decompose", "--decompose", "bool", "false",
         "also write base/tex decomposition images when rendering"},
        {"orbit", "--orbit", "int", "0", "render N orbit poses around the scene instead of a split"},
        {"lr_position", "--lr-position", "float", "0.00016",
         "positional learning rate (scaled by scene extent, exponential decay)"},
        {"lr_position_final", "--lr-position-final", "float", "0.0000016",
         "positional learning rate at the end of each stage"},
        {"lr_sh", "--lr-sh", "float", "0.0025", "SH dc learning rate (rest bands use 1/20)"},
        {"lr_opacity", "--lr-opacity", "float", "0.05", "opacity learning rate"},
        {"lr_scale", "--lr-scale", "float", "0.005", "log-scale learning rate"},
        {"lr_rotation", "--lr-rotation", "float", "0.001", "quaternion learning rate"},
        {"lr_texture", "--lr-texture", "float", "0.001", "texture map learning rate"},
        {"adc_enable", "--adc-enable", "bool", "true", "adaptive density control in stage 1"},
        {"adc_tau", "--adc-tau", "float", "0.6",
         "densify threshold on the mean sum-of-magnitudes screen gradient (pixel units; "
         "calibrated on the toy suite)"},
        {"adc_interval", "--adc-interval", "int", "100", "densify every N steps"},
        {"adc_start", "--adc-start", "int", "500", "first densify-eligible step"},
        {"adc_end", "--adc-end", "int", "15000", "last densify-eligible step"},
        {"adc_percent_dense", "--adc-percent-dense", "float", "0.01",
         "clone/split scale boundary as a fraction of scene extent"},
        {"opacity_reset_interval", "--opacity-reset-interval", "int", "3000",
         "opacity reset period in stage 1 (0: off)"},
        {"prune_opacity", "--prune-opacity", "float", "0.005", "prune Gaussians below this opacity"},
        {"split_factor", "--split-factor", "float", "1.6", "scale divisor for split children"},
        {"sh_upgrade_interval", "--sh-upgrade-interval", "int", "1000",
         "stage-1 steps between SH degree unlocks"},
        {"log_interval", "--log-interval", "int", "100", "steps between loss log lines"},
        {"val_interval", "--val-interval", "int", "500",
         "steps between validation renders during training (0: off)"},
    };
    return schema;
}

namespace {

const ConfigKey* find_key(const std::string& key) {
    for (const auto& k : config_schema())
        if (key == k.key) return &k;
    return nullptr;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::defaults() {
    Config c;
    for (const auto& k : config_schema()) c.values_[k.key] = k.def;
    return c;
}

void Config::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            val = val.substr(1, val.size() - 2);
        set(key, val);
    }
}

void Config::set(const std::string& key, const std::string& value) {
    const ConfigKey* k = find_key(key);
    if (k == nullptr) throw std::runtime_error("unknown config key: " + key);
    std::string t = k->type;
    try {
        if (t == "int") (void)std::stoll(value);
        else if (t == "float") (void)std::stod(value);
        else if (t == "bool" && value != "true" && value != "false" && value != "0" && value != "1")
            throw std::invalid_argument(value);
    } catch (const std::exception&) {
        throw std::runtime_error("config key '" + key + "' expects " + t + ", got '" + value + "'");
    }
    values_[key] = value;
}

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("unknown config key: " + key);
    return it->second;
}

int Config::get_int(const std::string& key) const { return int(std::stoll(get(key))); }
double Config::get_double(const std::string& key) const { return std::stod(get(key)); }

bool Config::get_bool(const std::string& key) const {
    const std::string& v = get(key);
    return v == "true" || v == "1";
}

Vec3<float> Config::get_background() const {
    const std::string& v = get("background");
    if (v == "black") return {0, 0, 0};
    if (v == "white") return {1, 1, 1};
    Vec3<float> bg;
    std::istringstream ss(v);
    char comma;
    if (!(ss >> bg.x >> comma >> bg.y >> comma >> bg.z))
        throw std::runtime_error("background expects black, white, or R,G,B: got '" + v + "'");
    return bg;
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

uint64_t Config::hash() const { return fnv1a(canonical()); }

} // namespace texsplat
