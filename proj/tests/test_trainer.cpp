#include <doctest.h>

#include <cmath>

#include "nilbs/errors.hpp"
#include "nilbs/gingerbread.hpp"
#include "nilbs/trainer.hpp"
#include "test_support.hpp"

using namespace nilbs;

namespace {

WeightNetParams biased_net(int bones, std::vector<double> biases) {
    WeightNetParams params = WeightNetParams::init({3 * bones, static_cast<int>(biases.size())}, 1);
    std::fill(params.layers[0].w.begin(), params.layers[0].w.end(), 0.0);
    params.layers[0].b = std::move(biases);
    return params;
}

} // namespace

TEST_CASE("point sampling is bounded, centered, and deterministic") {
    const AnimationSet set = make_animation_set(5, 3);
    const std::vector<Vec2> boundary = skin_mesh(set.mesh, set.rig, set.poses[1]);
    const double sigma = 0.02 * norm(set.bbox_max - set.bbox_min);

    Rng rng(11);
    const std::vector<Vec2> points =
        sample_points(set.bbox_min, set.bbox_max, boundary, 1000, rng);
    REQUIRE(points.size() == 1000);
    for (const Vec2& p : points) {
        CHECK(p.x >= set.bbox_min.x - 3.0 * sigma);
        CHECK(p.x <= set.bbox_max.x + 3.0 * sigma);
        CHECK(p.y >= set.bbox_min.y - 3.0 * sigma);
        CHECK(p.y <= set.bbox_max.y + 3.0 * sigma);
    }

    Rng rng_a(13);
    Rng rng_b(13);
    const std::vector<Vec2> a = sample_points(set.bbox_min, set.bbox_max, boundary, 64, rng_a);
    const std::vector<Vec2> b = sample_points(set.bbox_min, set.bbox_max, boundary, 64, rng_b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
    }

    // the uniform half comes first; its mean approaches the bbox center
    Rng rng_c(17);
    const std::vector<Vec2> big =
        sample_points(set.bbox_min, set.bbox_max, boundary, 10000, rng_c);
    Vec2 mean{0.0, 0.0};
    for (int i = 0; i < 5000; ++i) {
        mean = mean + big[static_cast<std::size_t>(i)];
    }
    mean = (1.0 / 5000.0) * mean;
    const Vec2 center = 0.5 * (set.bbox_min + set.bbox_max);
    CHECK(std::abs(mean.x - center.x) < 0.05 * (set.bbox_max.x - set.bbox_min.x));
    CHECK(std::abs(mean.y - center.y) < 0.05 * (set.bbox_max.y - set.bbox_min.y));
}

TEST_CASE("weight-loss values against hand-computed cross entropies") {
    // two identity bones; a 4-vertex square painted one-hot on bone 0
    Rig rig;
    rig.parent = {-1, 0};
    rig.rest_frames = {Transform::identity(), Transform::translation(0.2, 0.0)};
    rig.pivots = {{0, 0}, {0.2, 0.0}};
    SkinnedMesh mesh;
    mesh.vertices = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    mesh.weights.assign(4, {1.0, 0.0});

    SUBCASE("a network already matching the painted weights scores near zero") {
        const WeightNetParams params = biased_net(2, {40.0, 0.0, 0.0});
        CHECK(loss_weights(params, mesh, rig) < 1e-9);
    }
    SUBCASE("a uniform network against a one-hot target scores log 3") {
        const WeightNetParams params = biased_net(2, {0.0, 0.0, 0.0});
        CHECK(loss_weights(params, mesh, rig) ==
              doctest::Approx(std::log(3.0)).epsilon(1e-9));
    }
    SUBCASE("cross entropy is linear in a soft target") {
        SkinnedMesh soft = mesh;
        soft.weights.assign(4, {0.5, 0.5});
        const WeightNetParams params = biased_net(2, {0.0, 0.0, 0.0});
        CHECK(loss_weights(params, soft, rig) ==
              doctest::Approx(std::log(3.0)).epsilon(1e-9));
    }
    SUBCASE("seven uniform channels against one-hot targets score log 7") {
        auto [ging_rig, ging_mesh] = build_gingerbread();
        SkinnedMesh one_hot = ging_mesh;
        for (auto& row : one_hot.weights) {
            const std::size_t best =
                static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
            std::fill(row.begin(), row.end(), 0.0);
            row[best] = 1.0;
        }
        const WeightNetParams params = biased_net(6, {0, 0, 0, 0, 0, 0, 0});
        CHECK(loss_weights(params, one_hot, ging_rig) ==
              doctest::Approx(std::log(7.0)).epsilon(1e-9));
    }
}

TEST_CASE("occupancy loss agrees with a per-sample recomputation") {
    const AnimationSet set = make_animation_set(4, 21);
    const OccupancyGrid grid =
        bake_grid(set.mesh.vertices, set.bbox_min, set.bbox_max, 64, 64);
    const WeightNetParams params = WeightNetParams::init({18, 32, 7}, 5);

    // rest-pose batch: the corrected value must reduce to the discounted cache
    AnimationSet rest_set = set;
    rest_set.poses = {Pose::rest(set.rig.bone_count())};
    const PoseCache cache = make_pose_cache(rest_set.rig, rest_set.mesh, rest_set.poses[0]);

    Rng rng(23);
    SampleBatch batch;
    batch.entries.resize(1);
    batch.entries[0].cache = &cache;
    batch.entries[0].points =
        sample_points(set.bbox_min, set.bbox_max, cache.polygon, 64, rng);

    std::uint64_t singular = 0;
    const double loss = loss_occupancy(params, grid, batch, false, &singular);
    CHECK(singular == 0);

    const std::vector<Transform> rest_frames =
        pose_fn(set.rig, Pose::rest(set.rig.bone_count()));
    double expected = 0.0;
    for (const Vec2& p : batch.entries[0].points) {
        const std::vector<double> w = weights_at(params, rest_frames, p);
        const double predicted = (1.0 - w.back()) * query_grid(grid, p);
        const double truth = point_in_polygon(set.mesh.vertices, p);
        expected += std::abs(predicted - truth);
    }
    expected /= static_cast<double>(batch.entries[0].points.size());
    CHECK(loss == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("a constant half prediction scores one half") {
    // polygon covering the whole bbox makes the ground truth all ones, and a
    // biased net makes the prediction exactly one half
    Rig rig;
    rig.parent = {-1, 0};
    rig.rest_frames = {Transform::identity(), Transform::identity()};
    rig.pivots = {{0, 0}, {0, 0}};
    SkinnedMesh mesh;
    mesh.vertices = {{-5, -5}, {5, -5}, {5, 5}, {-5, 5}};
    mesh.weights.assign(4, {0.5, 0.5});

    OccupancyGrid grid;
    grid.bbox_min = {-1, -1};
    grid.bbox_max = {1, 1};
    grid.nx = grid.ny = 4;
    grid.values.assign(16, 1.0);

    PoseCache cache = make_pose_cache(rig, mesh, Pose::rest(2));
    const WeightNetParams params =
        biased_net(2, {std::log(0.25), std::log(0.25), std::log(0.5)});

    Rng rng(29);
    SampleBatch batch;
    batch.entries.resize(1);
    batch.entries[0].cache = &cache;
    for (int i = 0; i < 50; ++i) {
        batch.entries[0].points.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    }
    const double loss = loss_occupancy(params, grid, batch, false, nullptr);
    CHECK(loss == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("singular samples are skipped and counted") {
    Rig rig;
    rig.parent = {-1, 0};
    rig.rest_frames = {Transform::identity(), Transform::identity()};
    rig.pivots = {{0, 0}, {0, 0}};
    SkinnedMesh mesh;
    mesh.vertices = {{-2, -2}, {2, -2}, {2, 2}, {-2, 2}};
    mesh.weights.assign(4, {1.0, 0.0});

    PoseCache cache;
    const std::vector<Transform> posed{Transform::identity(), Transform::rotation_z(M_PI)};
    cache.frames = augment_ghost(rig.rest_frames, posed);
    cache.polygon = mesh.vertices;

    OccupancyGrid grid;
    grid.bbox_min = {-3, -3};
    grid.bbox_max = {3, 3};
    grid.nx = grid.ny = 4;
    grid.values.assign(16, 1.0);

    // every sample hits the singular blend
    const WeightNetParams params =
        biased_net(2, {std::log(0.25), std::log(0.5), std::log(0.25)});
    SampleBatch batch;
    batch.entries.resize(1);
    batch.entries[0].cache = &cache;
    batch.entries[0].points = {{0.1, 0.2}, {0.5, -0.5}, {-0.3, 0.3}};

    std::uint64_t singular = 0;
    const double loss = loss_occupancy(params, grid, batch, false, &singular);
    CHECK(singular == 3);
    CHECK(loss == 0.0);

    NetGrads grads = NetGrads::zeros_like(params);
    std::uint64_t singular2 = 0;
    loss_occupancy_grad(params, grid, batch, false, 1.0, grads, &singular2);
    CHECK(singular2 == 3);
    for (std::size_t i = 0; i < params.param_count(); ++i) {
        CHECK(grads.get_param(i) == 0.0);
    }
}

TEST_CASE("the joint loss gradient matches finite differences") {
    const AnimationSet set = make_animation_set(3, 31);
    const OccupancyGrid grid =
        bake_grid(set.mesh.vertices, set.bbox_min, set.bbox_max, 48, 48);
    WeightNetParams params = WeightNetParams::init({18, 16, 16, 7}, 37);
    const double lambda = 1.0;

    std::vector<PoseCache> caches;
    for (const Pose& pose : set.poses) {
        caches.push_back(make_pose_cache(set.rig, set.mesh, pose));
    }

    // fixed batch, keeping only points that stay away from the loss kinks:
    // cell boundaries of the bilinear cache and sign flips of the residual
    Rng rng(41);
    SampleBatch batch;
    const double sx = (grid.bbox_max.x - grid.bbox_min.x) / (grid.nx - 1);
    const double sy = (grid.bbox_max.y - grid.bbox_min.y) / (grid.ny - 1);
    for (int pose_id = 0; pose_id < 2; ++pose_id) {
        SampleBatch::Entry entry;
        entry.cache = &caches[static_cast<std::size_t>(pose_id)];
        while (entry.points.size() < 16) {
            const Vec2 p{rng.uniform(set.bbox_min.x, set.bbox_max.x),
                         rng.uniform(set.bbox_min.y, set.bbox_max.y)};
            OccupancyWork work;
            if (!eval_corrected(params, entry.cache->frames, grid, p, {}, work)) {
                continue;
            }
            const double ux = (work.rest_point.x - grid.bbox_min.x) / sx;
            const double uy = (work.rest_point.y - grid.bbox_min.y) / sy;
            if (std::abs(ux - std::round(ux)) < 0.05 ||
                std::abs(uy - std::round(uy)) < 0.05) {
                continue;
            }
            const double truth = point_in_polygon(entry.cache->polygon, p);
            if (std::abs(work.value - truth) < 1e-3) {
                continue;
            }
            entry.points.push_back(p);
        }
        batch.entries.push_back(std::move(entry));
    }

    NetGrads grads = NetGrads::zeros_like(params);
    loss_occupancy_grad(params, grid, batch, false, 1.0, grads, nullptr);
    loss_weights_grad(params, set.mesh, set.rig, lambda, grads);

    auto objective = [&]() {
        return loss_occupancy(params, grid, batch, false, nullptr) +
               lambda * loss_weights(params, set.mesh, set.rig);
    };
    const std::size_t count = params.param_count();
    int checked = 0;
    for (int probe = 0; probe < 60 || checked < 50; ++probe) {
        const std::size_t index = static_cast<std::size_t>(rng.next_u64() % count);
        const double analytic = grads.get_param(index);
        const double fd = test::central_fd(params, index, 1e-5, objective);
        if (std::abs(analytic) < 1e-9 && std::abs(fd) < 1e-6) {
            continue;
        }
        ++checked;
        CHECK(test::rel_err(analytic, fd, 1e-7) < 1e-3);
        if (probe > 400) {
            break;
        }
    }
    CHECK(checked >= 50);
}

TEST_CASE("mask IoU counts overlap correctly") {
    const std::vector<char> a{1, 1, 0, 0};
    const std::vector<char> b{0, 1, 1, 0};
    CHECK(mask_iou(a, b) == doctest::Approx(1.0 / 3.0));
    CHECK(mask_iou(a, a) == 1.0);
    const std::vector<char> empty(4, 0);
    CHECK(mask_iou(empty, empty) == 1.0);
    CHECK(mask_iou(a, empty) == 0.0);
}

TEST_CASE("an always-background predictor scores zero IoU") {
    const AnimationSet set = make_animation_set(2, 43);
    const OccupancyGrid grid =
        bake_grid(set.mesh.vertices, set.bbox_min, set.bbox_max, 32, 32);
    WeightNetParams params = WeightNetParams::init({18, 8, 7}, 3);
    params.layers.back().b.back() = 40.0; // ghost channel saturates
    CHECK(evaluate_iou(params, set, grid, 0, 32, 32) == 0.0);
    CHECK_THROWS_AS(evaluate_iou(params, set, grid, 5, 32, 32), IndexOutOfRange);
    CHECK_THROWS_AS(evaluate_iou(params, set, grid, 0, 1, 32), InvalidResolution);
}

TEST_CASE("training is deterministic and a zero rate is a no-op") {
    const AnimationSet set = make_animation_set(3, 47);
    const OccupancyGrid grid =
        bake_grid(set.mesh.vertices, set.bbox_min, set.bbox_max, 32, 32);

    TrainConfig config;
    config.steps = 5;
    config.batch_poses = 2;
    config.points_per_pose = 8;
    config.hidden_sizes = {8};
    config.grid_nx = config.grid_ny = 32;
    config.seed = 9;

    SUBCASE("zero learning rate leaves the parameters untouched") {
        TrainConfig frozen = config;
        frozen.learning_rate = 0.0;
        const TrainResult result = train(frozen, set, grid);
        const WeightNetParams fresh =
            WeightNetParams::init(result.params.layer_sizes, frozen.seed);
        for (std::size_t i = 0; i < fresh.param_count(); ++i) {
            CHECK(result.params.get_param(i) == fresh.get_param(i));
        }
    }
    SUBCASE("identical configs give identical reports") {
        const TrainResult a = train(config, set, grid);
        const TrainResult b = train(config, set, grid);
        REQUIRE(a.report.steps.size() == b.report.steps.size());
        for (std::size_t i = 0; i < a.report.steps.size(); ++i) {
            CHECK(a.report.steps[i].loss_occ == b.report.steps[i].loss_occ);
            CHECK(a.report.steps[i].loss_w == b.report.steps[i].loss_w);
        }
        for (std::size_t i = 0; i < a.report.final_iou.size(); ++i) {
            CHECK(a.report.final_iou[i] == b.report.final_iou[i]);
        }
        for (double occ : {a.report.steps.front().loss_occ, a.report.steps.back().loss_occ}) {
            CHECK(occ >= 0.0);
        }
    }
}

TEST_CASE("config validation rejects bad values") {
    TrainConfig config;
    CHECK_NOTHROW(config.validate());

    TrainConfig negative_rate = config;
    negative_rate.learning_rate = -1e-3;
    CHECK_THROWS_AS(negative_rate.validate(), ConfigError);

    TrainConfig no_steps = config;
    no_steps.steps = 0;
    CHECK_THROWS_AS(no_steps.validate(), ConfigError);

    TrainConfig tiny_grid = config;
    tiny_grid.grid_nx = 1;
    CHECK_THROWS_AS(tiny_grid.validate(), ConfigError);

    TrainConfig bad_beta = config;
    bad_beta.adam_beta1 = 1.0;
    CHECK_THROWS_AS(bad_beta.validate(), ConfigError);
}

TEST_CASE("a short run already pins the painted weights") {
    const AnimationSet set = make_animation_set(10, 2);
    const OccupancyGrid grid =
        bake_grid(set.mesh.vertices, set.bbox_min, set.bbox_max, 64, 64);

    TrainConfig config;
    config.steps = 2000;
    config.batch_poses = 2;
    config.points_per_pose = 16;
    config.grid_nx = config.grid_ny = 64;
    config.seed = 4;

    const TrainResult result = train(config, set, grid);
    CHECK(result.report.steps.back().loss_w < 0.1);
    for (const StepRecord& rec : result.report.steps) {
        CHECK(rec.loss_occ >= 0.0);
        CHECK(rec.loss_w >= 0.0);
    }
}
