#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ffhr/model.hpp"
#include "ffhr/train.hpp"

namespace ffhr {

/// One run's full settings: dataset location, model architecture, and
/// training-loop hyper-parameters, all addressable as flat `key = value`
/// pairs. Unknown keys are errors. `to_config_text` emits a resolved echo
/// that reproduces the run when parsed back.
struct RunConfig {
    std::string data_dir;
    std::string output_dir = "run_out";

    // model
    std::string variant = "rescal";  // distmult | complex | rescal | duale
    std::string score = "auto";      // auto resolves from `space`
    std::size_t dim = 32;
    std::string space = "hyperbolic";  // hyperbolic | euclidean
    bool use_gcn = true;
    std::string encoder_impl = "fpm";  // fpm | hgcn_tangent
    int layers = 1;
    int heads = 1;
    double activation_slope = 0.01;
    bool self_loops = true;
    double curvature = 1.0;
    bool trainable_curvature = false;

    // optimization
    std::size_t batch_size = 500;
    double learning_rate = 0.05;
    double reg_coeff = 0.05;
    std::size_t max_epochs = 500;
    std::size_t patience = 10;
    std::size_t eval_every = 5;
    std::uint64_t seed = 1;
    bool deterministic = true;
    int threads = 1;
    bool check_manifold = false;

    /// Transform family for the variant name (distmult -> diagonal,
    /// complex -> 2x2 rotation-scale, rescal -> full, duale -> general 2x2).
    TransformKind transform_kind() const;
    /// Concrete score kind with "auto" resolved against `space`.
    ScoreKind score_kind() const;

    ModelConfig model_config() const;
    TrainConfig train_config() const;
    /// model_config()/train_config() validation plus enum-string checks.
    void validate() const;
};

/// All recognized keys in emission order.
std::vector<std::string> config_keys();

/// Sets one field from its textual value. Throws std::invalid_argument for
/// unknown keys or unparseable values.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

/// Current value of one field as text.
std::string get_config_key(const RunConfig& cfg, const std::string& key);

/// Parses flat `key = value` lines. `#` starts a comment; blank lines are
/// skipped; a key may appear at most once. Errors carry the line number.
/// `keys_seen`, when non-null, receives the keys that appeared (so callers
/// can distinguish explicit values from defaults).
RunConfig parse_config_text(const std::string& text,
                            std::vector<std::string>* keys_seen = nullptr);
RunConfig parse_config_file(const std::filesystem::path& path,
                            std::vector<std::string>* keys_seen = nullptr);

/// Applies "key=value" override strings (e.g. from --set flags) in order.
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides);

/// Resolved echo: every key, concrete values (score never "auto"), one per
/// line. parse_config_text(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& cfg);

}  // namespace ffhr
