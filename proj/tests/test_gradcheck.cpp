#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gradcheck_common.hpp"

using namespace texsplat;
using namespace texsplat::gradcheck;
using testutil::make_camera;

TEST_CASE("analytic gradients match finite differences per variant") {
    Camera<double> cam = make_camera<double>(8, 8);
    uint64_t seed = 1000;
    Rng up_rng(9);
    for (TextureVariant variant : {TextureVariant::None, TextureVariant::AlphaOnly,
                                   TextureVariant::RGB, TextureVariant::RGBA}) {
        Scene<double> scene = make_fd_scene(seed, variant, 5, cam);
        ImageT<double> upstream = random_upstream(up_rng, 8, 8);
        GradCheckStats stats = check_scene_gradients(scene, cam, upstream);
        INFO("variant ", int(variant), " worst: ", stats.worst_param);
        CHECK(stats.failed == 0);
        CHECK(stats.checked > 50);
    }
}

TEST_CASE("zero upstream gives zero gradients") {
    Camera<double> cam = make_camera<double>(8, 8);
    uint64_t seed = 2000;
    Scene<double> scene = make_fd_scene(seed, TextureVariant::RGBA, 5, cam);
    ImageT<double> upstream(8, 8, 3);
    RenderOutput<double> fwd = render_forward(scene, cam);
    GradientBuffer<double> grads = render_backward(scene, cam, upstream, fwd);
    for (auto& v : grads.d_mu) CHECK(v.norm() == 0.0);
    for (auto& v : grads.d_opacity_logit) CHECK(v == 0.0);
    for (auto& v : grads.d_texels) CHECK(v == 0.0);
}

TEST_CASE("fully occluded Gaussians receive exactly zero gradient") {
    // a stack of nearly opaque front Gaussians drives transmittance below the
    // stop threshold before the rear one is reached
    Scene<double> scene;
    scene.sh_degree = 0;
    scene.background = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        Gaussian<double> g;
        g.mu = {0, 0, 2.0 + 0.1 * i};
        g.log_scale = {1.5, 1.5, -3}; // broad flat wall
        g.opacity_logit = 8;          // opacity ~ 0.99966
        g.sh[0] = {0.2, 0.2, 0.2};
        scene.gaussians.push_back(g);
    }
    Gaussian<double> rear;
    rear.mu = {0, 0, 5};
    rear.log_scale = {0, 0, -3};
    rear.opacity_logit = 1;
    rear.sh[0] = {0.5, 0.1, 0.1};
    scene.gaussians.push_back(rear);

    Camera<double> cam = make_camera<double>(8, 8);
    RenderOutput<double> fwd = render_forward(scene, cam);
    // transmittance must actually hit the early-termination floor
    for (int y = 3; y <= 4; ++y)
        for (int x = 3; x <= 4; ++x) CHECK(fwd.hit_count[size_t(y) * 8 + x] < 4);

    ImageT<double> upstream(8, 8, 3, 1.0);
    GradientBuffer<double> grads = render_backward(scene, cam, upstream, fwd);
    CHECK(grads.d_mu[3].norm() == 0.0);
    CHECK(grads.d_quat[3].norm2() == 0.0);
    CHECK(grads.d_opacity_logit[3] == 0.0);
    CHECK(grads.d_log_scale[3].norm() == 0.0);
    CHECK(grads.touched[3] == 0);
}

TEST_CASE("backward agrees across worker counts within float tolerance") {
    Camera<double> cam = make_camera<double>(24, 24);
    uint64_t seed = 3000;
    Scene<double> scene = make_fd_scene(seed, TextureVariant::RGBA, 12, cam);
    Rng up_rng(4);
    ImageT<double> upstream = random_upstream(up_rng, 24, 24);
    RenderOutput<double> fwd = render_forward(scene, cam);

    RenderOptions<double> o1, o4, o8;
    o1.threads = 1;
    o4.threads = 4;
    o8.threads = 8;
    GradientBuffer<double> g1 = render_backward(scene, cam, upstream, fwd, o1);
    GradientBuffer<double> g4 = render_backward(scene, cam, upstream, fwd, o4);
    GradientBuffer<double> g8 = render_backward(scene, cam, upstream, fwd, o8);
    for (size_t i = 0; i < scene.size(); ++i) {
        CHECK((g1.d_mu[i] - g4.d_mu[i]).norm() <= 1e-5 * (1 + g1.d_mu[i].norm()));
        CHECK((g1.d_mu[i] - g8.d_mu[i]).norm() <= 1e-5 * (1 + g1.d_mu[i].norm()));
        CHECK(std::abs(g1.d_opacity_logit[i] - g8.d_opacity_logit[i]) <= 1e-6);
    }
}

TEST_CASE("upstream shape mismatch and non-finite upstream are rejected") {
    Camera<double> cam = make_camera<double>(8, 8);
    uint64_t seed = 4000;
    Scene<double> scene = make_fd_scene(seed, TextureVariant::None, 3, cam);
    RenderOutput<double> fwd = render_forward(scene, cam);

    ImageT<double> wrong(4, 4, 3);
    CHECK_THROWS_AS((void)render_backward(scene, cam, wrong, fwd), std::runtime_error);

    ImageT<double> bad(8, 8, 3);
    bad.data[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS((void)render_backward(scene, cam, bad, fwd), std::runtime_error);
}
