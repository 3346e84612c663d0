#include "core/checkpoint.hpp"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace texsplat {

namespace fs = std::filesystem;

namespace {

constexpr uint32_t kTgtxVersion = 1;

std::vector<uint8_t> read_all(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void atomic_write(const std::string& path, const void* data, size_t size) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write file: " + tmp);
        f.write(static_cast<const char*>(data), std::streamsize(size));
        if (!f) throw std::runtime_error("short write: " + tmp);
    }
    fs::rename(tmp, path);
}

// 3DGS checkpoint property order; f_rest is channel-major ([ch][coeff]).
std::vector<std::string> ply_property_names(int sh_degree) {
    std::vector<std::string> names = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
    int rest = 3 * (sh_coeff_count(sh_degree) - 1);
    for (int i = 0; i < rest; ++i) names.push_back("f_rest_" + std::to_string(i));
    names.push_back("opacity");
    for (int i = 0; i < 3; ++i) names.push_back("scale_" + std::to_string(i));
    for (int i = 0; i < 4; ++i) names.push_back("rot_" + std::to_string(i));
    return names;
}

} // namespace

void save_tgtx(const std::string& path, const std::vector<float>& texels, uint32_t count,
               uint32_t res, uint32_t channels) {
    if (texels.size() != size_t(count) * res * res * channels)
        throw std::runtime_error("tgtx: texel payload size mismatch");
    std::vector<uint8_t> buf(20 + texels.size() * 4);
    std::memcpy(buf.data(), "TGTX", 4);
    uint32_t header[4] = {kTgtxVersion, count, res, channels};
    std::memcpy(buf.data() + 4, header, 16);
    std::memcpy(buf.data() + 20, texels.data(), texels.size() * 4);
    atomic_write(path, buf.data(), buf.size());
}

std::vector<float> load_tgtx(const std::string& path, uint32_t* count, uint32_t* res,
                             uint32_t* channels) {
    std::vector<uint8_t> buf = read_all(path);
    if (buf.size() < 20 || std::memcmp(buf.data(), "TGTX", 4) != 0)
        throw std::runtime_error("not a TGTX file: " + path);
    uint32_t header[4];
    std::memcpy(header, buf.data() + 4, 16);
    if (header[0] != kTgtxVersion)
        throw std::runtime_error("unsupported TGTX version " + std::to_string(header[0]) + ": " + path);
    size_t n = size_t(header[1]) * header[2] * header[2] * header[3];
    if (buf.size() != 20 + n * 4) throw std::runtime_error("truncated TGTX file: " + path);
    std::vector<float> texels(n);
    std::memcpy(texels.data(), buf.data() + 20, n * 4);
    *count = header[1];
    *res = header[2];
    *channels = header[3];
    return texels;
}

void save_checkpoint(const Scene<float>& scene, const CheckpointMeta& meta, const std::string& dir) {
    fs::create_directories(dir);
    const int sh_n = sh_coeff_count(meta.sh_degree);
    const size_t n = scene.size();
    auto names = ply_property_names(meta.sh_degree);

    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\n";
    header << "element vertex " << n << "\n";
    for (const auto& p : names) header << "property float " << p << "\n";
    header << "end_header\n";
    std::string head = header.str();

    std::vector<float> row(names.size());
    std::vector<uint8_t> buf(head.size() + n * names.size() * 4);
    std::memcpy(buf.data(), head.data(), head.size());
    uint8_t* out = buf.data() + head.size();

    for (size_t i = 0; i < n; ++i) {
        const Gaussian<float>& g = scene.gaussians[i];
        size_t k = 0;
        row[k++] = g.mu.x;
        row[k++] = g.mu.y;
        row[k++] = g.mu.z;
        row[k++] = 0;
        row[k++] = 0;
        row[k++] = 0;
        for (int ch = 0; ch < 3; ++ch) row[k++] = g.sh[0][ch];
        for (int ch = 0; ch < 3; ++ch)
            for (int l = 1; l < sh_n; ++l) row[k++] = g.sh[l][ch];
        row[k++] = g.opacity_logit;
        for (int a = 0; a < 3; ++a) row[k++] = g.log_scale[a];
        for (int a = 0; a < 4; ++a) row[k++] = g.quat[a];
        std::memcpy(out + i * names.size() * 4, row.data(), names.size() * 4);
    }
    atomic_write((fs::path(dir) / "point_cloud.ply").string(), buf.data(), buf.size());

    if (scene.variant != TextureVariant::None)
        save_tgtx((fs::path(dir) / "textures.tgtx").string(), scene.texels, uint32_t(n),
                  uint32_t(scene.tex_res), uint32_t(channel_count(scene.variant)));

    nlohmann::json j;
    j["variant"] = meta.variant;
    j["tex_res"] = meta.tex_res;
    j["m"] = meta.m;
    j["sh_degree"] = meta.sh_degree;
    j["background"] = {meta.background.x, meta.background.y, meta.background.z};
    j["iterations"] = meta.iterations;
    j["seed"] = meta.seed;
    j["config_hash"] = meta.config_hash;
    j["n_gaussians"] = n;
    std::string js = j.dump(2) + "\n";
    atomic_write((fs::path(dir) / "meta.json").string(), js.data(), js.size());
}

Scene<float> load_checkpoint(const std::string& dir, CheckpointMeta* meta_out) {
    std::ifstream mf(fs::path(dir) / "meta.json");
    if (!mf) throw std::runtime_error("missing checkpoint meta.json in " + dir);
    nlohmann::json j;
    mf >> j;

    CheckpointMeta meta;
    meta.variant = j.at("variant").get<std::string>();
    meta.tex_res = j.at("tex_res").get<int>();
    meta.m = j.at("m").get<float>();
    meta.sh_degree = j.at("sh_degree").get<int>();
    if (meta.sh_degree < 0 || meta.sh_degree > 3)
        throw std::runtime_error("checkpoint meta.json has an out-of-range sh_degree: " + dir);
    auto bg = j.at("background");
    meta.background = {bg[0].get<float>(), bg[1].get<float>(), bg[2].get<float>()};
    meta.iterations = j.at("iterations").get<int64_t>();
    meta.seed = j.at("seed").get<uint64_t>();
    meta.config_hash = j.value("config_hash", "");

    // PLY
    std::vector<uint8_t> buf = read_all((fs::path(dir) / "point_cloud.ply").string());
    std::string text(reinterpret_cast<const char*>(buf.data()),
                     std::min<size_t>(buf.size(), 65536));
    size_t hdr_end = text.find("end_header\n");
    if (text.rfind("ply\n", 0) != 0 || hdr_end == std::string::npos)
        throw std::runtime_error("malformed PLY header in " + dir);
    size_t data_off = hdr_end + strlen("end_header\n");

    std::istringstream hs(text.substr(0, hdr_end));
    std::string line;
    size_t n = 0;
    std::vector<std::string> props;
    while (std::getline(hs, line)) {
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "element") {
            std::string kind;
            ls >> kind >> n;
            if (kind != "vertex") throw std::runtime_error("unexpected PLY element in " + dir);
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type != "float") throw std::runtime_error("non-float PLY property in " + dir);
            props.push_back(name);
        } else if (tok == "format" ) {
            std::string fmt;
            ls >> fmt;
            if (fmt != "binary_little_endian")
                throw std::runtime_error("unsupported PLY format in " + dir);
        }
    }
    if (buf.size() < data_off + n * props.size() * 4)
        throw std::runtime_error("truncated PLY file in " + dir);

    auto expected = ply_property_names(meta.sh_degree);
    if (props != expected) throw std::runtime_error("unexpected PLY property layout in " + dir);

    Scene<float> scene;
    scene.sh_degree = meta.sh_degree;
    scene.m_extent = meta.m;
    scene.background = meta.background;
    scene.variant = variant_from_string(meta.variant);
    scene.tex_res = meta.tex_res;
    scene.gaussians.resize(n);
    scene.baseline_count = n;

    const int sh_n = sh_coeff_count(meta.sh_degree);
    const float* data = reinterpret_cast<const float*>(buf.data() + data_off);
    for (size_t i = 0; i < n; ++i) {
        const float* row = data + i * props.size();
        Gaussian<float>& g = scene.gaussians[i];
        size_t k = 0;
        g.mu = {row[k], row[k + 1], row[k + 2]};
        k += 6; // skip normals
        for (int ch = 0; ch < 3; ++ch) g.sh[0][ch] = row[k++];
        for (int ch = 0; ch < 3; ++ch)
            for (int l = 1; l < sh_n; ++l) g.sh[l][ch] = row[k++];
        g.opacity_logit = row[k++];
        for (int a = 0; a < 3; ++a) g.log_scale[a] = row[k++];
        for (int a = 0; a < 4; ++a) g.quat[a] = row[k++];
    }

    if (scene.variant != TextureVariant::None) {
        fs::path tgtx = fs::path(dir) / "textures.tgtx";
        if (!fs::exists(tgtx))
            throw std::runtime_error("checkpoint variant '" + meta.variant +
                                     "' requires textures.tgtx: " + dir);
        uint32_t count, res, channels;
        scene.texels = load_tgtx(tgtx.string(), &count, &res, &channels);
        if (count != n)
            throw std::runtime_error("TGTX Gaussian count mismatch with PLY in " + dir);
        if (int(res) != meta.tex_res || int(channels) != channel_count(scene.variant))
            throw std::runtime_error("TGTX header disagrees with meta.json in " + dir);
    }

    if (meta_out != nullptr) *meta_out = meta;
    return scene;
}

} // namespace texsplat
