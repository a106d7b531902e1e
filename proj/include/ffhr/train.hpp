#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ffhr/data.hpp"
#include "ffhr/loss_graph.hpp"
#include "ffhr/model.hpp"

namespace ffhr {

/// Training-loop hyper-parameters. Model architecture lives in ModelConfig.
struct TrainConfig {
    std::size_t batch_size = 500;
    double learning_rate = 0.05;
    double reg_coeff = 0.05;
    std::size_t max_epochs = 500;
    /// Number of consecutive non-improving validation evaluations tolerated
    /// before stopping.
    std::size_t patience = 10;
    /// Validation cadence in epochs.
    std::size_t eval_every = 5;
    std::uint64_t seed = 1;
    bool deterministic = true;
    int threads = 1;
    /// When set, every epoch re-checks that the mapped entity table is finite
    /// and strictly inside the ball (slow; meant for tests).
    bool check_manifold = false;

    void validate() const;

    /// Names of fields whose values fall outside the reference search grid
    /// (batch_size, learning_rate, reg_coeff). Such values are permitted;
    /// callers may warn.
    std::vector<std::string> off_grid_fields() const;
};

/// Per-array Adagrad state addressed by canonical parameter-array names.
/// Update rule per element: acc += g^2; p -= lr * g / (sqrt(acc) + eps).
class Adagrad {
public:
    explicit Adagrad(double learning_rate, double epsilon = 1e-10);

    /// Applies one update to `params` in place. If any gradient entry is
    /// non-finite the whole array's update (including its accumulator) is
    /// skipped and counted in skipped_updates().
    void step(const std::string& name, std::vector<double>& params,
              std::span<const double> grads);

    double learning_rate() const { return lr_; }
    std::size_t skipped_updates() const { return skipped_; }

private:
    double lr_;
    double eps_;
    std::size_t skipped_ = 0;
    std::unordered_map<std::string, std::vector<double>> acc_;
};

struct EpochStats {
    double mean_loss = 0.0;           // triple-weighted mean over the epoch
    std::size_t batches = 0;
    std::size_t clamped_projections = 0;
    std::size_t skipped_updates = 0;  // this epoch only
};

/// One full pass over the train split in seeded shuffle order (shuffle RNG is
/// a pure function of config seed and epoch index). Each batch records the
/// loss graph, backpropagates, and applies one Adagrad step per touched array.
EpochStats train_epoch(ModelParams& params, const TripleStore& store, const Adjacency& adj,
                       const TrainConfig& cfg, Adagrad& opt, std::size_t epoch);

struct TrainResult {
    ModelParams best;             // best-validation snapshot (final params if never evaluated)
    double best_valid_mrr = -1.0; // -1 when validation never ran
    std::size_t best_epoch = 0;
    std::size_t epochs_run = 0;
    std::vector<double> loss_history;
    std::size_t clamped_projections = 0;
    std::size_t skipped_updates = 0;
};

/// Full loop with early stopping on validation MRR (evaluated every
/// `eval_every` epochs when the valid split is non-empty). `metrics_out`,
/// when non-null, receives one JSON object per epoch:
/// {"epoch", "loss", "valid_mrr" (null between evaluations), "wall_time_s"}.
TrainResult train(ModelParams params, const TripleStore& store, const TrainConfig& cfg,
                  std::ostream* metrics_out = nullptr);

/// Checkpoint layout: magic "FFHR", format version u32, length-prefixed UTF-8
/// JSON metadata (dims, counts, config, vocab content hashes, curvature, array
/// manifest), then each parameter array as raw little-endian f64 in canonical
/// order. Round-trips bit-exactly.
void save_checkpoint(const ModelParams& params, const TripleStore& store,
                     const std::filesystem::path& path);

struct Checkpoint {
    ModelParams params;
    std::uint64_t entity_vocab_hash = 0;
    std::uint64_t relation_vocab_hash = 0;
};

/// Throws std::runtime_error on bad magic, unsupported version, manifest
/// mismatch, or truncation; no partial model escapes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// load_checkpoint plus a guard that the checkpoint was built against this
/// exact dataset (vocab content hashes match).
ModelParams load_checkpoint_for(const std::filesystem::path& path, const TripleStore& store);

}  // namespace ffhr
