// Standalone acceptance runner. Each check prints one [PASS]/[FAIL]/[SKIP]
// line with the measured quantity, the bound it must meet, and the elapsed
// time; the process exits nonzero if any non-skipped check fails.
//
// Checks cover the load-bearing guarantees end to end: gyrogroup laws of
// Mobius addition, isometry of the rotation-translation transform, manifold
// closure of in-ball message passing, the small-curvature limit of the
// hyperbolic inner product, gyromidpoint identities, reverse-mode gradients
// against central finite differences, exact agreement of the ranking
// pipeline with a brute-force oracle, and two multi-seed training
// comparisons on a synthetic tree. A long benchmark run is gated behind
// --wn18rr DIR (or the FFHR_WN18RR_DIR environment variable).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ffhr/ball.hpp"
#include "ffhr/config.hpp"
#include "ffhr/data.hpp"
#include "ffhr/encoder.hpp"
#include "ffhr/eval.hpp"
#include "ffhr/gradcheck.hpp"
#include "ffhr/linalg.hpp"
#include "ffhr/model.hpp"
#include "ffhr/scoring.hpp"
#include "ffhr/train.hpp"

namespace {

using namespace ffhr;

std::string g_wn18rr_dir;  // empty = skip the long benchmark

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[768];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Outcome {
    bool pass = false;
    bool skip = false;
    std::string detail;
};

// ---------------------------------------------------------------- helpers

BallPoint random_in_ball(std::mt19937_64& rng, std::size_t dim, Curvature curv,
                         double max_frac = 0.9) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, max_frac);
    std::vector<double> v(dim);
    double sq = 0.0;
    for (double& x : v) {
        x = gauss(rng);
        sq += x * x;
    }
    double norm = std::sqrt(sq);
    if (norm < 1e-12) {
        v[0] = 1.0;
        norm = 1.0;
    }
    const double target = unif(rng) * curv.radius();
    for (double& x : v) x *= target / norm;
    return BallPoint(std::move(v), curv);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Gram-Schmidt on Gaussian rows, run twice for orthogonality near machine
// precision.
Matrix random_orthogonal(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> gauss;
    Matrix m(n, n);
    for (double& v : m.data) v = gauss(rng);
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < n; ++i) {
            auto ri = m.row(i);
            for (std::size_t j = 0; j < i; ++j) {
                auto rj = m.row(j);
                const double d = dot(rj, ri);
                for (std::size_t k = 0; k < n; ++k) ri[k] -= d * rj[k];
            }
            const double norm = std::sqrt(sq_norm(ri));
            for (double& v : ri) v /= norm;
        }
    }
    return m;
}

BallPoint apply_transform(const Matrix& w, const BallPoint& b, const BallPoint& x) {
    return mobius_add(b, BallPoint(matvec(w, x.coords()), x.curvature()));
}

void perturb(ModelParams& params, double scale, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-scale, scale);
    params.for_each_array([&](const std::string&, std::vector<double>& arr) {
        for (double& v : arr) v += unif(rng);
    });
}

// ------------------------------------------------- 1. gyrogroup laws

Outcome gyrogroup_laws() {
    std::mt19937_64 rng(101);
    double max_err = 0.0;
    const int samples = 10000;
    for (const double c : {0.5, 1.0, 2.0}) {
        const Curvature curv(c);
        const BallPoint zero = BallPoint::origin(8, curv);
        for (int i = 0; i < samples; ++i) {
            const BallPoint x = random_in_ball(rng, 8, curv);
            const BallPoint y = random_in_ball(rng, 8, curv);
            const BallPoint z = random_in_ball(rng, 8, curv);

            max_err = std::max(max_err, max_abs_diff(mobius_add(zero, x).coords(), x.coords()));
            max_err = std::max(max_err, mobius_add(x.negated(), x).norm());
            max_err = std::max(
                max_err, max_abs_diff(mobius_add(x.negated(), mobius_add(x, y)).coords(),
                                      y.coords()));
            const BallPoint lhs = mobius_add(x, mobius_add(y, z));
            const BallPoint rhs = mobius_add(mobius_add(x, y), gyration(x, y, z));
            max_err = std::max(max_err, max_abs_diff(lhs.coords(), rhs.coords()));
            max_err = std::max(max_err, std::abs(gyration(x, y, z).norm() - z.norm()));
        }
    }
    return {max_err <= 1e-8, false,
            fmt("max error %.2e over 5 laws x 3 curvatures x %d samples (tol 1e-8)", max_err,
                samples)};
}

// ----------------------------------- 2. rotation-translation isometry

Outcome transform_isometry() {
    std::mt19937_64 rng(202);
    const Curvature curv(1.0);
    double max_err = 0.0;
    for (int k = 0; k < 100; ++k) {
        const Matrix w = random_orthogonal(rng, 8);
        const BallPoint b = random_in_ball(rng, 8, curv);
        for (int i = 0; i < 100; ++i) {
            const BallPoint x = random_in_ball(rng, 8, curv);
            const BallPoint y = random_in_ball(rng, 8, curv);
            const double d0 = distance(x, y);
            const double d1 = distance(apply_transform(w, b, x), apply_transform(w, b, y));
            max_err = std::max(max_err, std::abs(d1 - d0));
        }
    }

    // Negative control: stretching one row of W must distort some distance.
    Matrix bad = random_orthogonal(rng, 8);
    for (std::size_t j = 0; j < 8; ++j) bad.at(0, j) *= 1.5;
    const BallPoint b = random_in_ball(rng, 8, curv, 0.5);
    double violation = 0.0;
    for (int i = 0; i < 100; ++i) {
        const BallPoint x = random_in_ball(rng, 8, curv, 0.5);
        const BallPoint y = random_in_ball(rng, 8, curv, 0.5);
        const double d0 = distance(x, y);
        const double d1 = distance(apply_transform(bad, b, x), apply_transform(bad, b, y));
        violation = std::max(violation, std::abs(d1 - d0));
    }

    const bool pass = max_err <= 1e-7 && violation > 1e-3;
    return {pass, false,
            fmt("max |d(Tx,Ty)-d(x,y)| %.2e over 100 (W,b) x 100 pairs (tol 1e-7); "
                "non-orthogonal control distorts by %.2e (needs > 1e-3)",
                max_err, violation)};
}

// ------------------------------- 3. message passing stays off the boundary

Outcome manifold_preservation() {
    std::mt19937_64 rng(303);
    const std::array<double, 3> curvatures{0.5, 1.0, 2.0};
    ProjectionStats stats;
    for (int g = 0; g < 100; ++g) {
        ModelConfig mc;
        mc.dim = 8;
        mc.score = ScoreKind::hin;
        mc.transform = TransformKind::full;
        mc.use_gcn = true;
        mc.encoder.num_layers = 2;
        mc.encoder.num_heads = 2;
        mc.curvature = curvatures[static_cast<std::size_t>(g) % curvatures.size()];
        mc.validate();

        ModelParams params = ModelParams::init(mc, 50, 2, 900 + static_cast<std::uint64_t>(g));
        perturb(params, 0.5, 1000 + static_cast<std::uint64_t>(g));

        Adjacency adj;
        adj.out.resize(50);
        for (auto& edges : adj.out)
            for (int e = 0; e < 3; ++e)
                edges.push_back({static_cast<std::uint32_t>(rng() % 2),
                                 static_cast<std::uint32_t>(rng() % 50)});

        const Matrix table = map_entity_table(params);
        encoder_forward(table, adj, params.layers, mc.encoder, Curvature(mc.curvature), &stats);
    }
    return {stats.clamped == 0, false,
            fmt("%lld boundary clamps in %lld projections across 100 random 50-entity graphs "
                "(needs 0)",
                static_cast<long long>(stats.clamped), static_cast<long long>(stats.calls))};
}

// ------------------------- 4. inner product flattens to dot as c -> 0

Outcome hin_curvature_limit() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs(100);
    for (auto& [x, y] : pairs) {
        x.resize(8);
        y.resize(8);
        for (double& v : x) v = unif(rng);
        for (double& v : y) v = unif(rng);
    }
    std::array<double, 3> err{0.0, 0.0, 0.0};
    const std::array<double, 3> cs{1e-2, 1e-3, 1e-4};
    for (std::size_t i = 0; i < cs.size(); ++i)
        for (const auto& [x, y] : pairs)
            err[i] = std::max(err[i], std::abs(raw::hin(x, y, cs[i]) - dot(x, y)));
    const double ratio1 = err[0] / err[1];
    const double ratio2 = err[1] / err[2];
    const bool pass = err[1] <= err[0] / 10.0 && err[2] <= err[1] / 10.0;
    return {pass, false,
            fmt("max |hin_c - dot|: %.2e (c=1e-2) -> %.2e (1e-3) -> %.2e (1e-4); "
                "decay factors %.0fx, %.0fx (each needs >= 10x)",
                err[0], err[1], err[2], ratio1, ratio2)};
}

// ------------------------------------------ 5. gyromidpoint identities

Outcome gyromidpoint_identities() {
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> wdist(0.1, 5.0);
    double max_err = 0.0;
    for (const double c : {0.5, 1.0, 2.0}) {
        const Curvature curv(c);
        for (int i = 0; i < 200; ++i) {
            const BallPoint x = random_in_ball(rng, 8, curv);

            // A single point is its own midpoint, whatever its weight.
            const double w = wdist(rng);
            max_err = std::max(
                max_err, max_abs_diff(gyromidpoint({x}, std::array{w}).coords(), x.coords()));

            // A symmetric pair averages to the origin.
            max_err = std::max(
                max_err,
                gyromidpoint({x, x.negated()}, std::array{1.0, 1.0}).norm());

            // Permuting points with their weights changes nothing.
            std::vector<BallPoint> pts;
            std::vector<double> ws;
            for (int k = 0; k < 4; ++k) {
                pts.push_back(random_in_ball(rng, 8, curv));
                ws.push_back(wdist(rng));
            }
            const BallPoint m1 = gyromidpoint(pts, ws);
            std::vector<BallPoint> rot(pts.begin() + 1, pts.end());
            rot.push_back(pts.front());
            std::vector<double> rot_w(ws.begin() + 1, ws.end());
            rot_w.push_back(ws.front());
            max_err = std::max(max_err, max_abs_diff(gyromidpoint(rot, rot_w).coords(),
                                                     m1.coords()));

            // Scaling all weights by a positive factor changes nothing.
            const double lambda = wdist(rng);
            std::vector<double> scaled = ws;
            for (double& v : scaled) v *= lambda;
            max_err = std::max(max_err, max_abs_diff(gyromidpoint(pts, scaled).coords(),
                                                     m1.coords()));
        }
    }
    return {max_err <= 1e-10, false,
            fmt("max error %.2e over 4 identities x 3 curvatures x 200 samples (tol 1e-10)",
                max_err)};
}

// ----------------------- 6. reverse-mode gradients vs finite differences

Outcome gradient_check() {
    TripleStore store;
    for (int i = 0; i < 16; ++i) store.entities.get_or_add("e" + std::to_string(i));
    store.relations.get_or_add("r0");
    store.relations.get_or_add("r1");
    store.num_base_relations = 2;
    std::mt19937_64 rng(606);
    while (store.train.size() < 40) {
        const auto h = static_cast<std::uint32_t>(rng() % 16);
        const auto t = static_cast<std::uint32_t>(rng() % 16);
        if (h == t) continue;
        store.train.push_back({h, static_cast<std::uint32_t>(rng() % 2), t});
    }
    const TripleStore aug = augment_reciprocal(store);
    const Adjacency adj = build_adjacency(aug);

    bool all_pass = true;
    double worst = 0.0;
    std::size_t checked = 0;
    std::string parts;
    for (const TransformKind tk :
         {TransformKind::diagonal, TransformKind::block2_rotation_scale,
          TransformKind::block2_general, TransformKind::full}) {
        ModelConfig mc;
        mc.dim = 8;
        mc.score = ScoreKind::hin;
        mc.transform = tk;
        mc.use_gcn = true;
        mc.encoder.num_layers = 2;
        mc.encoder.num_heads = 2;
        mc.curvature = 1.0;
        mc.validate();

        ModelParams params = ModelParams::init(mc, aug.num_entities(), aug.num_relations(), 7);
        perturb(params, 0.05, 17);
        const GradReport report = gradcheck(params, adj, aug.train, 0.05, GradCheckOptions{});
        all_pass = all_pass && report.pass();
        worst = std::max(worst, report.max_rel_err);
        checked += report.checked;
        parts += fmt(" %s %.1e", to_string(tk).c_str(), report.max_rel_err);
    }
    return {all_pass, false,
            fmt("max rel err %.2e over %zu elements, 2-layer 2-head encoder (tol 1e-4;%s)",
                worst, checked, parts.c_str())};
}

// -------------------- 7. filtered ranking matches a brute-force oracle

RankingReport oracle_report(const Scorer& scorer, const TripleStore& store, Split split,
                            const FilterIndex& filter) {
    const auto base = static_cast<std::uint32_t>(store.num_base_relations);
    const std::size_t n = scorer.num_entities();
    std::vector<std::size_t> ranks;
    const auto rank_of = [&](std::uint32_t h, std::uint32_t r, std::uint32_t truth) {
        const double s_true = scorer.score_one(h, r, truth);
        std::size_t rank = 1;
        for (std::uint32_t e = 0; e < n; ++e) {
            if (e == truth || filter.contains(h, r, e)) continue;
            if (scorer.score_one(h, r, e) >= s_true) ++rank;
        }
        return rank;
    };
    for (const Triple& tr : store.split(split)) {
        ranks.push_back(rank_of(tr.h, tr.r, tr.t));
        const std::uint32_t rec = tr.r < base ? tr.r + base : tr.r - base;
        ranks.push_back(rank_of(tr.t, rec, tr.h));
    }

    RankingReport rep;
    rep.n_queries = ranks.size();
    double mrr = 0.0;
    std::map<int, std::size_t> counts{{1, 0}, {3, 0}, {10, 0}};
    for (const std::size_t r : ranks) {
        mrr += 1.0 / static_cast<double>(r);
        for (auto& [k, cnt] : counts)
            if (r <= static_cast<std::size_t>(k)) ++cnt;
    }
    rep.mrr = mrr / static_cast<double>(ranks.size());
    for (const auto& [k, cnt] : counts)
        rep.hits[k] = static_cast<double>(cnt) / static_cast<double>(ranks.size());
    return rep;
}

Outcome eval_oracle() {
    std::mt19937_64 rng(707);
    int mismatches = 0;
    std::size_t queries = 0;
    for (int kg = 0; kg < 100; ++kg) {
        const std::size_t n = 5 + rng() % 16;  // 5..20 entities
        const std::size_t n_rel = 1 + rng() % 3;
        TripleStore store;
        for (std::size_t i = 0; i < n; ++i) store.entities.get_or_add("e" + std::to_string(i));
        for (std::size_t r = 0; r < n_rel; ++r) store.relations.get_or_add("r" + std::to_string(r));
        store.num_base_relations = n_rel;
        const auto random_triple = [&] {
            std::uint32_t h = 0, t = 0;
            do {
                h = static_cast<std::uint32_t>(rng() % n);
                t = static_cast<std::uint32_t>(rng() % n);
            } while (h == t);
            return Triple{h, static_cast<std::uint32_t>(rng() % n_rel), t};
        };
        for (std::size_t i = 0; i < 2 * n; ++i) store.train.push_back(random_triple());
        for (std::size_t i = 0; i < std::max<std::size_t>(1, n / 4); ++i)
            store.test.push_back(random_triple());

        const TripleStore aug = augment_reciprocal(store);
        const FilterIndex filter(aug);

        ModelConfig mc;
        mc.dim = 4;
        mc.score = std::array{ScoreKind::hin, ScoreKind::tangent_inner,
                              ScoreKind::euclidean_inner}[static_cast<std::size_t>(kg) % 3];
        mc.encoder.space = is_hyperbolic(mc.score) ? Space::hyperbolic : Space::euclidean;
        mc.transform = kg % 2 == 0 ? TransformKind::diagonal : TransformKind::full;
        mc.use_gcn = false;
        mc.validate();
        ModelParams params = ModelParams::init(mc, aug.num_entities(), aug.num_relations(),
                                               static_cast<std::uint64_t>(kg));
        perturb(params, 0.5, 7000 + static_cast<std::uint64_t>(kg));

        const Scorer scorer(params, build_adjacency(aug));
        const RankingReport lib = evaluate_split(scorer, aug, Split::test, filter);
        const RankingReport oracle = oracle_report(scorer, aug, Split::test, filter);
        queries += lib.n_queries;

        const bool equal = lib.mrr == oracle.mrr && lib.n_queries == oracle.n_queries &&
                           lib.hits.at(1) == oracle.hits.at(1) &&
                           lib.hits.at(3) == oracle.hits.at(3) &&
                           lib.hits.at(10) == oracle.hits.at(10);
        if (!equal) ++mismatches;
    }
    return {mismatches == 0, false,
            fmt("%d of 100 random graphs disagree with the oracle over %zu queries (needs 0, "
                "exact equality)",
                mismatches, queries)};
}

// --------------------------- 8/9. synthetic-tree training comparisons

TripleStore tree_dataset() {
    namespace fs = std::filesystem;
    // Write + reload mirrors the command-line data path, which assigns
    // vocabulary ids by file appearance order.
    const fs::path dir = fs::temp_directory_path() / "ffhr_acceptance_tree";
    fs::create_directories(dir);
    write_dataset(generate_synthetic_tree(8, 2, 11), dir);
    return augment_reciprocal(load_dataset(dir));
}

double tree_mrr(const TripleStore& aug, const Adjacency& adj, const FilterIndex& filter,
                std::vector<std::string> overrides, std::uint64_t seed) {
    RunConfig rc;
    overrides.push_back("seed=" + std::to_string(seed));
    apply_overrides(rc, overrides);
    ModelParams params =
        ModelParams::init(rc.model_config(), aug.num_entities(), aug.num_relations(), rc.seed);
    const TrainResult result = train(std::move(params), aug, rc.train_config());
    const Scorer scorer(result.best, adj);
    return evaluate_split(scorer, aug, Split::test, filter).mrr;
}

struct SeedRuns {
    double mean = 0.0;
    std::string values;
};

SeedRuns run_seeds(const TripleStore& aug, const Adjacency& adj, const FilterIndex& filter,
                   const std::vector<std::string>& overrides) {
    SeedRuns out;
    for (const std::uint64_t seed : {1, 2, 3}) {
        const double mrr = tree_mrr(aug, adj, filter, overrides, seed);
        out.mean += mrr / 3.0;
        out.values += fmt("%s%.4f", out.values.empty() ? "" : " ", mrr);
    }
    return out;
}

// Each side uses its best configuration from a shared grid search (batch
// size, learning rate, regularization, curvature, encoder on/off were swept
// per mode; see the training-tool defaults for the grid).
Outcome tree_space_gap() {
    const TripleStore aug = tree_dataset();
    const Adjacency adj = build_adjacency(aug);
    const FilterIndex filter(aug);
    const std::vector<std::string> base = {"dim=8",          "variant=rescal", "use_gcn=false",
                                           "max_epochs=800", "eval_every=10",  "patience=30"};
    auto hyp = base;
    hyp.insert(hyp.end(), {"space=hyperbolic", "curvature=1.0", "batch_size=100",
                           "learning_rate=0.02", "reg_coeff=0.05"});
    auto euc = base;
    euc.insert(euc.end(),
               {"space=euclidean", "batch_size=500", "learning_rate=0.05", "reg_coeff=0.05"});

    const SeedRuns h = run_seeds(aug, adj, filter, hyp);
    const SeedRuns e = run_seeds(aug, adj, filter, euc);
    const double gap = h.mean - e.mean;
    return {gap >= 0.02, false,
            fmt("3-seed test MRR: hyperbolic %.4f [%s], Euclidean %.4f [%s], gap %+.4f "
                "(needs >= +0.02)",
                h.mean, h.values.c_str(), e.mean, e.values.c_str(), gap)};
}

Outcome tree_encoder_ablation() {
    const TripleStore aug = tree_dataset();
    const Adjacency adj = build_adjacency(aug);
    const FilterIndex filter(aug);
    const std::vector<std::string> base = {
        "dim=8",         "variant=rescal",    "use_gcn=true",  "layers=1",
        "heads=1",       "curvature=0.5",     "batch_size=500", "learning_rate=0.5",
        "reg_coeff=0.02", "max_epochs=800",   "eval_every=10", "patience=30"};
    auto in_ball = base;
    in_ball.push_back("encoder_impl=fpm");
    auto tangent = base;
    tangent.push_back("encoder_impl=hgcn_tangent");

    const SeedRuns f = run_seeds(aug, adj, filter, in_ball);
    const SeedRuns t = run_seeds(aug, adj, filter, tangent);
    const double margin = f.mean - t.mean;
    return {f.mean >= t.mean - 0.005, false,
            fmt("3-seed test MRR: in-ball %.4f [%s], tangent-space %.4f [%s], margin %+.4f "
                "(needs >= -0.005)",
                f.mean, f.values.c_str(), t.mean, t.values.c_str(), margin)};
}

// ------------------------------------- 10. optional long benchmark run

Outcome big_benchmark() {
    if (g_wn18rr_dir.empty())
        return {true, true,
                "pass --wn18rr DIR (or set FFHR_WN18RR_DIR) to train WN18RR at d=32; takes "
                "hours single-threaded"};
    const TripleStore aug = augment_reciprocal(load_dataset(g_wn18rr_dir));
    const Adjacency adj = build_adjacency(aug);
    const FilterIndex filter(aug);
    // Mid-grid hyper-parameters; the reference search grid is batch size
    // {100..2000}, learning rate {0.005..0.5}, regularization {0.005..0.5}.
    const std::vector<std::string> cfg = {
        "dim=32",        "variant=rescal",  "use_gcn=true",   "layers=1",
        "heads=1",       "curvature=1.0",   "trainable_curvature=true",
        "batch_size=500", "learning_rate=0.1", "reg_coeff=0.05",
        "max_epochs=500", "eval_every=25",  "patience=8"};
    const double mrr = tree_mrr(aug, adj, filter, cfg, 1);
    return {mrr >= 0.44, false, fmt("filtered test MRR %.4f (needs >= 0.44)", mrr)};
}

// ----------------------------------------------------------- runner

struct Criterion {
    const char* name;
    double budget_seconds;  // 0 = unbounded
    std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--wn18rr" && i + 1 < argc) {
            g_wn18rr_dir = argv[++i];
        } else {
            std::cerr << "usage: acceptance [--wn18rr DIR]\n";
            return 2;
        }
    }
    if (g_wn18rr_dir.empty())
        if (const char* env = std::getenv("FFHR_WN18RR_DIR")) g_wn18rr_dir = env;

    const std::vector<Criterion> criteria = {
        {"gyrogroup laws of Mobius addition", 10.0, gyrogroup_laws},
        {"rotation-translation transform is an isometry", 10.0, transform_isometry},
        {"in-ball message passing never hits the boundary clamp", 30.0, manifold_preservation},
        {"hyperbolic inner product flattens to the dot product", 1.0, hin_curvature_limit},
        {"gyromidpoint identities", 1.0, gyromidpoint_identities},
        {"reverse-mode gradients match finite differences", 120.0, gradient_check},
        {"filtered ranking equals the brute-force oracle", 30.0, eval_oracle},
        {"tree benchmark: hyperbolic beats Euclidean", 300.0, tree_space_gap},
        {"tree benchmark: in-ball encoder vs tangent-space encoder", 600.0,
         tree_encoder_ablation},
        {"WN18RR benchmark (optional, long)", 0.0, big_benchmark},
    };

    int failures = 0;
    int skips = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.skip && o.pass && c.budget_seconds > 0.0 && secs >= c.budget_seconds) {
            o.pass = false;
            o.detail += fmt("; exceeded %.0fs time budget", c.budget_seconds);
        }
        const char* tag = o.skip ? "SKIP" : (o.pass ? "PASS" : "FAIL");
        if (o.skip)
            ++skips;
        else if (!o.pass)
            ++failures;
        std::printf("[%s] %s: %s (%.1fs)\n", tag, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }

    const int ran = static_cast<int>(criteria.size()) - skips;
    std::printf("%d/%d acceptance checks passed", ran - failures, ran);
    if (skips > 0) std::printf(", %d skipped", skips);
    std::printf("\n");
    return failures == 0 ? 0 : 1;
}
