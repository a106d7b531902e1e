#include "ffhr/train.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "ffhr/eval.hpp"
#include "ffhr/tape.hpp"

namespace ffhr {

namespace {

bool on_grid(double v, std::initializer_list<double> grid) {
    for (double g : grid)
        if (v == g) return true;
    return false;
}

}  // namespace

void TrainConfig::validate() const {
    if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("TrainConfig: learning_rate must be finite and >= 0");
    if (!(reg_coeff >= 0.0) || !std::isfinite(reg_coeff))
        throw std::invalid_argument("TrainConfig: reg_coeff must be finite and >= 0");
    if (max_epochs == 0) throw std::invalid_argument("TrainConfig: max_epochs must be positive");
    if (patience == 0) throw std::invalid_argument("TrainConfig: patience must be positive");
    if (eval_every == 0) throw std::invalid_argument("TrainConfig: eval_every must be positive");
    if (threads < 1) throw std::invalid_argument("TrainConfig: threads must be >= 1");
}

std::vector<std::string> TrainConfig::off_grid_fields() const {
    std::vector<std::string> off;
    if (batch_size != 100 && batch_size != 200 && batch_size != 500 && batch_size != 1000 &&
        batch_size != 2000)
        off.push_back("batch_size");
    if (!on_grid(learning_rate, {0.005, 0.01, 0.05, 0.1, 0.5})) off.push_back("learning_rate");
    if (!on_grid(reg_coeff, {0.005, 0.01, 0.05, 0.1, 0.5})) off.push_back("reg_coeff");
    return off;
}

Adagrad::Adagrad(double learning_rate, double epsilon) : lr_(learning_rate), eps_(epsilon) {
    if (!std::isfinite(lr_) || lr_ < 0.0)
        throw std::invalid_argument("Adagrad: learning rate must be finite and >= 0");
    if (!(eps_ > 0.0)) throw std::invalid_argument("Adagrad: epsilon must be positive");
}

void Adagrad::step(const std::string& name, std::vector<double>& params,
                   std::span<const double> grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("Adagrad: gradient/parameter size mismatch for " + name);
    for (double g : grads) {
        if (!std::isfinite(g)) {
            ++skipped_;
            return;
        }
    }
    auto& acc = acc_[name];
    if (acc.empty()) acc.assign(params.size(), 0.0);
    if (acc.size() != params.size())
        throw std::invalid_argument("Adagrad: array " + name + " changed size");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        acc[i] += g * g;
        params[i] -= lr_ * g / (std::sqrt(acc[i]) + eps_);
    }
}

EpochStats train_epoch(ModelParams& params, const TripleStore& store, const Adjacency& adj,
                       const TrainConfig& cfg, Adagrad& opt, std::size_t epoch) {
    cfg.validate();
    if (!store.augmented) throw std::invalid_argument("train_epoch: store must be augmented");
    const auto& triples = store.train;
    if (triples.empty()) throw std::invalid_argument("train_epoch: empty train split");

    std::vector<std::size_t> order(triples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EpochStats stats;
    const std::size_t skipped_before = opt.skipped_updates();
    double weighted_loss = 0.0;
    std::vector<Triple> batch;
    batch.reserve(std::min(cfg.batch_size, triples.size()));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        batch.clear();
        for (std::size_t i = start; i < end; ++i) batch.push_back(triples[order[i]]);

        Tape tape;
        BatchGraphBuilder builder(tape, params, adj);
        const Tape::Id loss = builder.build_loss(batch, cfg.reg_coeff);
        weighted_loss += tape.value_scalar(loss) * static_cast<double>(batch.size());
        tape.backward(loss);
        GradMap grads;
        builder.accumulate_gradients(grads);
        stats.clamped_projections += static_cast<std::size_t>(tape.projection_clamps());

        params.for_each_array([&](const std::string& name, std::vector<double>& arr) {
            auto it = grads.find(name);
            if (it != grads.end()) opt.step(name, arr, it->second);
        });
        ++stats.batches;
    }
    stats.mean_loss = weighted_loss / static_cast<double>(triples.size());
    stats.skipped_updates = opt.skipped_updates() - skipped_before;
    return stats;
}

namespace {

void check_manifold(const ModelParams& params) {
    const Matrix table = map_entity_table(params);
    const bool hyper = is_hyperbolic(params.config.score) ||
                       (params.config.use_gcn && params.config.encoder.space == Space::hyperbolic);
    const double c = params.curvature_value();
    for (std::size_t e = 0; e < table.rows; ++e) {
        double sq = 0.0;
        for (std::size_t i = 0; i < table.cols; ++i) {
            const double v = table.at(e, i);
            if (!std::isfinite(v))
                throw std::logic_error("manifold check: non-finite coordinate at entity " +
                                       std::to_string(e));
            sq += v * v;
        }
        if (hyper && !(c * sq < 1.0))
            throw std::logic_error("manifold check: entity " + std::to_string(e) +
                                   " escaped the ball");
    }
}

}  // namespace

TrainResult train(ModelParams params, const TripleStore& store, const TrainConfig& cfg,
                  std::ostream* metrics_out) {
    cfg.validate();
    if (!store.augmented) throw std::invalid_argument("train: store must be augmented");
    const Adjacency adj = build_adjacency(store);
    Adagrad opt(cfg.learning_rate);

    const bool can_eval = !store.valid.empty();
    FilterIndex filter(store);

    TrainResult result;
    result.best = params;
    std::size_t evals_since_improve = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const EpochStats stats = train_epoch(params, store, adj, cfg, opt, epoch);
        result.loss_history.push_back(stats.mean_loss);
        result.clamped_projections += stats.clamped_projections;
        result.skipped_updates += stats.skipped_updates;
        result.epochs_run = epoch;
        if (cfg.check_manifold) check_manifold(params);

        bool evaluated = false;
        double valid_mrr = 0.0;
        if (can_eval && epoch % cfg.eval_every == 0) {
            Scorer scorer(params, adj);
            valid_mrr = evaluate_split(scorer, store, Split::valid, filter).mrr;
            evaluated = true;
            if (valid_mrr > result.best_valid_mrr) {
                result.best_valid_mrr = valid_mrr;
                result.best = params;
                result.best_epoch = epoch;
                evals_since_improve = 0;
            } else {
                ++evals_since_improve;
            }
        }

        if (metrics_out) {
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            nlohmann::json line{{"epoch", epoch},
                                {"loss", stats.mean_loss},
                                {"valid_mrr", nullptr},
                                {"wall_time_s", wall}};
            if (evaluated) line["valid_mrr"] = valid_mrr;
            *metrics_out << line.dump() << '\n';
        }

        if (evaluated && evals_since_improve >= cfg.patience) break;
    }

    if (result.best_valid_mrr < 0.0) {  // validation never ran: final model is best
        result.best = params;
        result.best_epoch = result.epochs_run;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'F', 'F', 'H', 'R'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("checkpoint: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

void write_f64_array(std::ostream& os, const std::vector<double>& a) {
    for (double d : a) {
        const auto bits = std::bit_cast<std::uint64_t>(d);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
        os.write(reinterpret_cast<const char*>(b), 8);
    }
}

void read_f64_array(std::istream& is, std::vector<double>& a) {
    for (double& d : a) {
        unsigned char b[8];
        if (!is.read(reinterpret_cast<char*>(b), 8))
            throw std::runtime_error("checkpoint: truncated file");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        d = std::bit_cast<double>(bits);
    }
}

nlohmann::json encoder_to_json(const EncoderConfig& e) {
    return {{"num_layers", e.num_layers},       {"num_heads", e.num_heads},
            {"activation_slope", e.activation_slope}, {"space", to_string(e.space)},
            {"impl", to_string(e.impl)},        {"self_loops", e.self_loops}};
}

EncoderConfig encoder_from_json(const nlohmann::json& j) {
    EncoderConfig e;
    e.num_layers = j.at("num_layers").get<int>();
    e.num_heads = j.at("num_heads").get<int>();
    e.activation_slope = j.at("activation_slope").get<double>();
    e.space = space_from_string(j.at("space").get<std::string>());
    e.impl = encoder_impl_from_string(j.at("impl").get<std::string>());
    e.self_loops = j.at("self_loops").get<bool>();
    return e;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const TripleStore& store,
                     const std::filesystem::path& path) {
    nlohmann::json meta;
    const ModelConfig& cfg = params.config;
    meta["dim"] = cfg.dim;
    meta["num_entities"] = params.num_entities;
    meta["num_relations"] = params.num_relations;
    meta["score"] = to_string(cfg.score);
    meta["transform"] = to_string(cfg.transform);
    meta["use_gcn"] = cfg.use_gcn;
    meta["encoder"] = encoder_to_json(cfg.encoder);
    meta["curvature"] = cfg.curvature;
    meta["trainable_curvature"] = cfg.trainable_curvature;
    meta["curvature_value"] = params.curvature_value();
    meta["entity_vocab_hash"] = store.entities.content_hash();
    meta["relation_vocab_hash"] = store.relations.content_hash();

    nlohmann::json manifest = nlohmann::json::array();
    params.for_each_array([&](const std::string& name, const std::vector<double>& arr) {
        manifest.push_back({{"name", name}, {"size", arr.size()}});
    });
    meta["arrays"] = manifest;

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path.string());
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    const std::string text = meta.dump();
    write_u32(os, static_cast<std::uint32_t>(text.size()));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    params.for_each_array(
        [&](const std::string&, const std::vector<double>& arr) { write_f64_array(os, arr); });
    os.flush();
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const std::uint32_t version = read_u32(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    const std::uint32_t meta_len = read_u32(is);
    std::string text(meta_len, '\0');
    if (!is.read(text.data(), meta_len)) throw std::runtime_error("checkpoint: truncated file");

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("checkpoint: bad metadata: ") + e.what());
    }

    ModelConfig cfg;
    cfg.dim = meta.at("dim").get<std::size_t>();
    cfg.score = score_kind_from_string(meta.at("score").get<std::string>());
    cfg.transform = transform_kind_from_string(meta.at("transform").get<std::string>());
    cfg.use_gcn = meta.at("use_gcn").get<bool>();
    cfg.encoder = encoder_from_json(meta.at("encoder"));
    cfg.curvature = meta.at("curvature").get<double>();
    cfg.trainable_curvature = meta.at("trainable_curvature").get<bool>();

    Checkpoint out{ModelParams::init(cfg, meta.at("num_entities").get<std::size_t>(),
                                     meta.at("num_relations").get<std::size_t>(), 0),
                   meta.at("entity_vocab_hash").get<std::uint64_t>(),
                   meta.at("relation_vocab_hash").get<std::uint64_t>()};

    const nlohmann::json& manifest = meta.at("arrays");
    std::size_t idx = 0;
    out.params.for_each_array([&](const std::string& name, std::vector<double>& arr) {
        if (idx >= manifest.size())
            throw std::runtime_error("checkpoint: array manifest shorter than model");
        const auto& entry = manifest[idx++];
        if (entry.at("name").get<std::string>() != name ||
            entry.at("size").get<std::size_t>() != arr.size())
            throw std::runtime_error("checkpoint: array manifest mismatch at " + name);
        read_f64_array(is, arr);
    });
    if (idx != manifest.size())
        throw std::runtime_error("checkpoint: array manifest longer than model");
    return out;
}

ModelParams load_checkpoint_for(const std::filesystem::path& path, const TripleStore& store) {
    Checkpoint cp = load_checkpoint(path);
    if (cp.entity_vocab_hash != store.entities.content_hash() ||
        cp.relation_vocab_hash != store.relations.content_hash())
        throw std::runtime_error("checkpoint: vocabulary mismatch with dataset (checkpoint was "
                                 "trained on different data)");
    if (cp.params.num_entities != store.num_entities() ||
        cp.params.num_relations != store.num_relations())
        throw std::runtime_error("checkpoint: entity/relation count mismatch with dataset");
    return std::move(cp.params);
}

}  // namespace ffhr
