#pragma once

#include "core/scene.hpp"

#include <cstdint>
#include <string>

namespace texsplat {

struct CheckpointMeta {
    std::string variant = "none";
    int tex_res = 0;
    float m = 3.0f;
    int sh_degree = 0;
    Vec3<float> background{1, 1, 1};
    int64_t iterations = 0;
    uint64_t seed = 0;
    std::string config_hash;
};

// Checkpoint directory: point_cloud.ply (3DGS-compatible float32 attribute
// table), textures.tgtx when the variant has textures, meta.json. Writes are
// atomic (temp file + rename); round-trips are bit-exact.
void save_checkpoint(const Scene<float>& scene, const CheckpointMeta& meta, const std::string& dir);

Scene<float> load_checkpoint(const std::string& dir, CheckpointMeta* meta_out = nullptr);

// Texture blob: header {magic "TGTX", version u32, count u32, T u32, K u32},
// then count*T*T*K little-endian float32 in Gaussian order, row-major,
// channel-interleaved.
void save_tgtx(const std::string& path, const std::vector<float>& texels, uint32_t count,
               uint32_t res, uint32_t channels);
std::vector<float> load_tgtx(const std::string& path, uint32_t* count, uint32_t* res,
                             uint32_t* channels);

} // namespace texsplat
