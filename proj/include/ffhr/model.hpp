#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ffhr/ball.hpp"
#include "ffhr/data.hpp"
#include "ffhr/decoders.hpp"
#include "ffhr/encoder.hpp"
#include "ffhr/linalg.hpp"
#include "ffhr/scoring.hpp"

namespace ffhr {

/// Full architecture selection: embedding dimension, similarity score,
/// relation-transform family, optional message-passing encoder, curvature.
struct ModelConfig {
    std::size_t dim = 32;
    ScoreKind score = ScoreKind::hin;
    TransformKind transform = TransformKind::diagonal;
    bool use_gcn = true;
    EncoderConfig encoder;
    double curvature = 1.0;
    bool trainable_curvature = false;

    void validate() const;
};

/// All trainable state. Entities and encoder biases are stored as tangent
/// vectors at the origin and mapped into the ball with exp0 on read, so a
/// Euclidean optimizer can never push a point out of the manifold.
struct ModelParams {
    ModelConfig config;
    std::size_t num_entities = 0;
    std::size_t num_relations = 0;  // augmented count (base + reciprocal)

    std::vector<double> entity_raw;                    // num_entities x dim, row-major
    std::vector<std::vector<double>> relation_params;  // per augmented relation
    std::vector<GcnLayerParams> layers;                // empty when !use_gcn
    std::vector<double> log_curvature;                 // single cell when trainable

    static ModelParams init(const ModelConfig& cfg, std::size_t n_entities,
                            std::size_t n_relations_aug, std::uint64_t seed);

    double curvature_value() const;
    std::span<const double> entity_row(std::size_t e) const;

    /// Visits every parameter array exactly once in the canonical order used
    /// by optimizer state, checkpoints, and gradient checking.
    void for_each_array(const std::function<void(const std::string&, std::vector<double>&)>& fn);
    void for_each_array(
        const std::function<void(const std::string&, const std::vector<double>&)>& fn) const;

    std::size_t total_parameters() const;
};

/// Entity coordinates in model space: exp0 of each raw row in hyperbolic
/// space, a plain copy in Euclidean space.
Matrix map_entity_table(const ModelParams& params);

/// Read-only scoring engine. Runs the encoder once at construction and caches
/// per-entity quantities so ranking a query against every entity is linear in
/// the table size.
class Scorer {
public:
    Scorer(const ModelParams& params, const Adjacency& adj, ProjectionStats* stats = nullptr);

    /// Scores (h, r, t') for every candidate tail t'. Head queries are tail
    /// queries under the reciprocal relation id.
    void score_tails(std::size_t h, std::size_t r, std::span<double> out) const;
    double score_one(std::size_t h, std::size_t r, std::size_t t) const;

    const Matrix& entity_table() const { return table_; }
    double curvature() const { return c_; }
    std::size_t num_entities() const { return params_->num_entities; }

private:
    void transformed_head(std::size_t h, std::size_t r, std::span<double> out) const;

    const ModelParams* params_;
    Matrix table_;                     // encoded coordinates, one row per entity
    double c_;
    bool hyperbolic_;
    std::vector<double> hin_factor_;   // 1 + c^2 ||y||^2 per entity
    Matrix log_table_;                 // log0 rows for tangent-space scores
};

}  // namespace ffhr
