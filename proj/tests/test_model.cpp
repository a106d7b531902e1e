#include <doctest.h>

#include <cmath>
#include <set>

#include "ffhr/model.hpp"
#include "test_util.hpp"

using namespace ffhr;
using namespace ffhr::testutil;

namespace {

ModelConfig small_config(ScoreKind score, TransformKind tk, bool use_gcn) {
    ModelConfig cfg;
    cfg.dim = 6;
    cfg.score = score;
    cfg.transform = tk;
    cfg.use_gcn = use_gcn;
    cfg.curvature = 1.0;
    cfg.encoder.space = is_hyperbolic(score) ? Space::hyperbolic : Space::euclidean;
    return cfg;
}

}  // namespace

TEST_CASE("model config validation") {
    auto cfg = small_config(ScoreKind::hin, TransformKind::diagonal, true);
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("odd dim with block transform") {
        cfg.dim = 5;
        cfg.transform = TransformKind::block2_general;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("odd dim with rotation encoder") {
        cfg.dim = 5;
        cfg.transform = TransformKind::diagonal;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("score and space must agree") {
        cfg.encoder.space = Space::euclidean;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg.encoder.space = Space::hyperbolic;
        cfg.score = ScoreKind::euclidean_inner;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("bad curvature") {
        cfg.curvature = 0.0;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
}

TEST_CASE("initialization shapes, determinism, and conventions") {
    auto cfg = small_config(ScoreKind::hin, TransformKind::block2_general, true);
    cfg.encoder.num_layers = 2;
    cfg.encoder.num_heads = 2;
    auto p = ModelParams::init(cfg, 10, 4, 77);

    CHECK(p.entity_raw.size() == 10 * 6);
    REQUIRE(p.relation_params.size() == 4);
    CHECK(p.relation_params[0].size() == 12);  // 4 per 2x2 block, 3 blocks
    REQUIRE(p.layers.size() == 2);
    CHECK(p.layers[0].rotation_angles.size() == 5);  // 4 relations + self slot
    CHECK(p.layers[0].bias_raw.size() == 5);
    CHECK(p.layers[0].general_w.empty());
    CHECK(p.layers[0].attn_head.size() == 2);

    // Identity start: zero angles and zero bias.
    for (const auto& a : p.layers[0].rotation_angles)
        for (double v : a) CHECK(v == 0.0);
    for (const auto& b : p.layers[0].bias_raw)
        for (double v : b) CHECK(v == 0.0);

    // Same seed reproduces, different seed does not.
    auto q = ModelParams::init(cfg, 10, 4, 77);
    CHECK(p.entity_raw == q.entity_raw);
    auto r = ModelParams::init(cfg, 10, 4, 78);
    CHECK(p.entity_raw != r.entity_raw);

    // Entities land strictly inside the ball after mapping.
    auto table = map_entity_table(p);
    for (std::size_t e = 0; e < 10; ++e) CHECK(cfg.curvature * sq_norm(table.row(e)) < 1.0);

    // The tangent-space ablation stores identity matrices instead of angles.
    auto hcfg = cfg;
    hcfg.encoder.impl = EncoderImpl::hgcn_tangent;
    auto hp = ModelParams::init(hcfg, 10, 4, 77);
    CHECK(hp.layers[0].rotation_angles.empty());
    REQUIRE(hp.layers[0].general_w.size() == 5);
    for (std::size_t i = 0; i < 6; ++i) CHECK(hp.layers[0].general_w[0].at(i, i) == 1.0);
}

TEST_CASE("canonical array walk covers every parameter exactly once") {
    auto cfg = small_config(ScoreKind::hin, TransformKind::diagonal, true);
    cfg.trainable_curvature = true;
    auto p = ModelParams::init(cfg, 5, 2, 3);

    std::vector<std::string> names;
    std::size_t total = 0;
    p.for_each_array([&](const std::string& name, std::vector<double>& v) {
        names.push_back(name);
        total += v.size();
    });
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
    CHECK(names.front() == "entity");
    CHECK(names.back() == "log_c");
    // entity 5*6 + 2 diagonal relations 6 + layer angles 3*3 + bias 3*6 + attn 2*6 + log_c
    CHECK(total == 30 + 12 + 9 + 18 + 12 + 1);
    CHECK(p.total_parameters() == total);

    // Mutation through the walk is visible in the model.
    p.for_each_array([](const std::string& name, std::vector<double>& v) {
        if (name == "entity") v[0] = 42.0;
    });
    CHECK(p.entity_raw[0] == 42.0);
}

TEST_CASE("trainable curvature round trip") {
    auto cfg = small_config(ScoreKind::hin, TransformKind::diagonal, false);
    cfg.curvature = 0.7;
    auto p = ModelParams::init(cfg, 3, 2, 1);
    CHECK(p.log_curvature.empty());
    CHECK(p.curvature_value() == doctest::Approx(0.7));

    cfg.trainable_curvature = true;
    auto q = ModelParams::init(cfg, 3, 2, 1);
    REQUIRE(q.log_curvature.size() == 1);
    CHECK(q.curvature_value() == doctest::Approx(0.7).epsilon(1e-14));
    q.log_curvature[0] = 0.0;
    CHECK(q.curvature_value() == doctest::Approx(1.0));
}

TEST_CASE("scorer without encoder agrees with the reference triple score") {
    std::mt19937_64 rng(5);
    Adjacency adj;  // unused when the encoder is off
    adj.out.resize(8);

    for (auto score : {ScoreKind::hin, ScoreKind::hyperbolic_distance, ScoreKind::tangent_inner,
                       ScoreKind::euclidean_inner, ScoreKind::euclidean_distance}) {
        for (auto tk : {TransformKind::diagonal, TransformKind::full}) {
            auto cfg = small_config(score, tk, false);
            auto p = ModelParams::init(cfg, 8, 3, 99);
            Scorer scorer(p, adj);

            const Curvature curv(cfg.curvature);
            std::vector<double> scores(8);
            for (std::size_t r = 0; r < 3; ++r) {
                const RelationTransform rt(tk, cfg.dim, p.relation_params[r]);
                scorer.score_tails(2, r, scores);
                for (std::size_t t = 0; t < 8; ++t) {
                    double want;
                    if (is_hyperbolic(score)) {
                        std::vector<double> hc(cfg.dim), tc(cfg.dim);
                        raw::exp0(p.entity_row(2), cfg.curvature, hc);
                        raw::exp0(p.entity_row(t), cfg.curvature, tc);
                        want = score_triple(BallPoint(hc, curv), rt, BallPoint(tc, curv), score);
                    } else {
                        std::vector<double> u(cfg.dim);
                        rt.apply_linear(p.entity_row(2), u);
                        auto tail = p.entity_row(t);
                        if (score == ScoreKind::euclidean_inner) {
                            want = dot(u, tail);
                        } else {
                            want = 0.0;
                            for (std::size_t i = 0; i < u.size(); ++i)
                                want -= (u[i] - tail[i]) * (u[i] - tail[i]);
                        }
                    }
                    CHECK(scores[t] == doctest::Approx(want).epsilon(1e-12));
                    CHECK(scorer.score_one(2, r, t) == scores[t]);
                }
            }
        }
    }
}

TEST_CASE("scorer with encoder scores against the encoded table") {
    std::mt19937_64 rng(6);
    auto cfg = small_config(ScoreKind::hin, TransformKind::diagonal, true);
    auto p = ModelParams::init(cfg, 6, 2, 11);
    auto adj = random_graph(rng, 6, 2, 2);

    ProjectionStats stats;
    Scorer scorer(p, adj, &stats);
    CHECK(stats.calls > 0);

    auto base = map_entity_table(p);
    auto want = encoder_forward(base, adj, p.layers, cfg.encoder, Curvature(cfg.curvature));
    for (std::size_t e = 0; e < 6; ++e)
        CHECK(max_abs_diff(scorer.entity_table().row(e), want.row(e)) == 0.0);

    // Scores follow the reference path applied to the encoded coordinates.
    const Curvature curv(cfg.curvature);
    const RelationTransform rt(cfg.transform, cfg.dim, p.relation_params[1]);
    std::vector<double> scores(6);
    scorer.score_tails(3, 1, scores);
    for (std::size_t t = 0; t < 6; ++t) {
        std::vector<double> hc(want.row(3).begin(), want.row(3).end());
        std::vector<double> tc(want.row(t).begin(), want.row(t).end());
        const double ref = score_triple(BallPoint(hc, curv), rt, BallPoint(tc, curv),
                                        ScoreKind::hin);
        CHECK(scores[t] == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("scorer rejects out-of-range queries") {
    auto cfg = small_config(ScoreKind::hin, TransformKind::diagonal, false);
    auto p = ModelParams::init(cfg, 4, 2, 1);
    Adjacency adj;
    adj.out.resize(4);
    Scorer scorer(p, adj);
    std::vector<double> out(4);
    CHECK_THROWS_AS(scorer.score_tails(9, 0, out), std::out_of_range);
    CHECK_THROWS_AS(scorer.score_tails(0, 7, out), std::out_of_range);
    std::vector<double> wrong(3);
    CHECK_THROWS_AS(scorer.score_tails(0, 0, wrong), std::invalid_argument);
}
