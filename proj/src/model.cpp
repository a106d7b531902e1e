#include "ffhr/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ffhr {

void ModelConfig::validate() const {
    if (dim == 0) throw std::invalid_argument("ModelConfig: dim must be positive");
    if ((transform == TransformKind::block2_rotation_scale ||
         transform == TransformKind::block2_general) &&
        dim % 2 != 0)
        throw std::invalid_argument("ModelConfig: block transforms need an even dim");
    if (!(curvature > 0.0) || !std::isfinite(curvature))
        throw std::invalid_argument("ModelConfig: curvature must be finite and > 0");
    encoder.validate();
    const bool hyper_space = encoder.space == Space::hyperbolic;
    if (is_hyperbolic(score) != hyper_space)
        throw std::invalid_argument("ModelConfig: score kind and space disagree");
    if (use_gcn && encoder.impl == EncoderImpl::fpm && dim % 2 != 0)
        throw std::invalid_argument("ModelConfig: rotation blocks need an even dim");
}

namespace {

void xavier_fill(std::vector<double>& v, std::size_t fan_in, std::size_t fan_out,
                 std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& x : v) x = dist(rng);
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, std::size_t n_entities,
                              std::size_t n_relations_aug, std::uint64_t seed) {
    cfg.validate();
    if (n_entities == 0 || n_relations_aug == 0)
        throw std::invalid_argument("ModelParams: need at least one entity and relation");

    ModelParams p;
    p.config = cfg;
    p.num_entities = n_entities;
    p.num_relations = n_relations_aug;
    std::mt19937_64 rng(seed);

    const std::size_t d = cfg.dim;
    p.entity_raw.resize(n_entities * d);
    xavier_fill(p.entity_raw, d, n_entities, rng);

    p.relation_params.resize(n_relations_aug);
    for (auto& rp : p.relation_params) {
        rp.resize(transform_param_count(cfg.transform, d));
        xavier_fill(rp, d, d, rng);
    }

    if (cfg.use_gcn) {
        const std::size_t slots = n_relations_aug + 1;  // + self-relation
        p.layers.resize(static_cast<std::size_t>(cfg.encoder.num_layers));
        for (auto& layer : p.layers) {
            if (cfg.encoder.impl == EncoderImpl::fpm) {
                // Zero angles and zero bias make the first pass an identity
                // transform; attention starts informative via Xavier vectors.
                layer.rotation_angles.assign(slots, std::vector<double>(d / 2, 0.0));
                layer.bias_raw.assign(slots, std::vector<double>(d, 0.0));
            } else {
                layer.general_w.assign(slots, Matrix::identity(d));
            }
            const auto heads = static_cast<std::size_t>(cfg.encoder.num_heads);
            layer.attn_head.assign(heads, std::vector<double>(d));
            layer.attn_tail.assign(heads, std::vector<double>(d));
            for (auto& a : layer.attn_head) xavier_fill(a, d, 1, rng);
            for (auto& a : layer.attn_tail) xavier_fill(a, d, 1, rng);
        }
    }

    if (cfg.trainable_curvature) p.log_curvature.assign(1, std::log(cfg.curvature));
    return p;
}

double ModelParams::curvature_value() const {
    return config.trainable_curvature ? std::exp(log_curvature.at(0)) : config.curvature;
}

std::span<const double> ModelParams::entity_row(std::size_t e) const {
    if (e >= num_entities) throw std::out_of_range("ModelParams: entity id out of range");
    return {entity_raw.data() + e * config.dim, config.dim};
}

void ModelParams::for_each_array(
    const std::function<void(const std::string&, std::vector<double>&)>& fn) {
    fn("entity", entity_raw);
    for (std::size_t r = 0; r < relation_params.size(); ++r)
        fn("rel/" + std::to_string(r), relation_params[r]);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& layer = layers[l];
        const std::string prefix = "layer" + std::to_string(l) + "/";
        for (std::size_t s = 0; s < layer.rotation_angles.size(); ++s)
            fn(prefix + "angles/" + std::to_string(s), layer.rotation_angles[s]);
        for (std::size_t s = 0; s < layer.bias_raw.size(); ++s)
            fn(prefix + "bias/" + std::to_string(s), layer.bias_raw[s]);
        for (std::size_t s = 0; s < layer.general_w.size(); ++s)
            fn(prefix + "w/" + std::to_string(s), layer.general_w[s].data);
        for (std::size_t h = 0; h < layer.attn_head.size(); ++h)
            fn(prefix + "attn_head/" + std::to_string(h), layer.attn_head[h]);
        for (std::size_t h = 0; h < layer.attn_tail.size(); ++h)
            fn(prefix + "attn_tail/" + std::to_string(h), layer.attn_tail[h]);
    }
    if (!log_curvature.empty()) fn("log_c", log_curvature);
}

void ModelParams::for_each_array(
    const std::function<void(const std::string&, const std::vector<double>&)>& fn) const {
    auto* self = const_cast<ModelParams*>(this);
    self->for_each_array(
        [&fn](const std::string& name, std::vector<double>& v) { fn(name, v); });
}

std::size_t ModelParams::total_parameters() const {
    std::size_t n = 0;
    for_each_array([&n](const std::string&, const std::vector<double>& v) { n += v.size(); });
    return n;
}

Matrix map_entity_table(const ModelParams& params) {
    const std::size_t d = params.config.dim;
    Matrix table(params.num_entities, d);
    const bool hyper = params.config.encoder.space == Space::hyperbolic;
    const double c = params.curvature_value();
    for (std::size_t e = 0; e < params.num_entities; ++e) {
        auto row = params.entity_row(e);
        auto out = table.row(e);
        if (hyper) {
            raw::exp0(row, c, out);
        } else {
            std::copy(row.begin(), row.end(), out.begin());
        }
    }
    return table;
}

Scorer::Scorer(const ModelParams& params, const Adjacency& adj, ProjectionStats* stats)
    : params_(&params),
      table_(0, 0),
      c_(params.curvature_value()),
      hyperbolic_(params.config.encoder.space == Space::hyperbolic),
      log_table_(0, 0) {
    params.config.validate();
    Matrix base = map_entity_table(params);
    if (params.config.use_gcn) {
        table_ = encoder_forward(base, adj, params.layers, params.config.encoder,
                                 Curvature(hyperbolic_ ? c_ : 1.0), stats);
    } else {
        table_ = std::move(base);
    }

    const std::size_t d = params.config.dim;
    if (params.config.score == ScoreKind::hin) {
        const double c2 = c_ * c_;
        hin_factor_.resize(params.num_entities);
        for (std::size_t e = 0; e < params.num_entities; ++e)
            hin_factor_[e] = 1.0 + c2 * sq_norm(table_.row(e));
    }
    if (params.config.score == ScoreKind::tangent_inner) {
        log_table_ = Matrix(params.num_entities, d);
        for (std::size_t e = 0; e < params.num_entities; ++e)
            raw::log0(table_.row(e), c_, log_table_.row(e));
    }
}

void Scorer::transformed_head(std::size_t h, std::size_t r, std::span<double> out) const {
    if (h >= params_->num_entities) throw std::out_of_range("Scorer: head id out of range");
    if (r >= params_->num_relations) throw std::out_of_range("Scorer: relation id out of range");
    const std::size_t d = params_->config.dim;
    const RelationTransform rt(params_->config.transform, d, params_->relation_params[r]);
    auto head = table_.row(h);
    if (hyperbolic_) {
        std::vector<double> tangent(d), mapped(d);
        raw::log0(head, c_, tangent);
        rt.apply_linear(tangent, mapped);
        raw::exp0(mapped, c_, out);
    } else {
        rt.apply_linear(head, out);
    }
}

void Scorer::score_tails(std::size_t h, std::size_t r, std::span<double> out) const {
    if (out.size() != params_->num_entities)
        throw std::invalid_argument("Scorer: output span must cover every entity");
    const std::size_t d = params_->config.dim;
    std::vector<double> u(d);
    transformed_head(h, r, u);

    switch (params_->config.score) {
        case ScoreKind::hin: {
            const double tol2 = kZeroNormTol * kZeroNormTol;
            const double c2 = c_ * c_;
            const double au = 1.0 + c2 * sq_norm(u);
            const double cc2 = 2.0 * c2;
            const bool u_zero = sq_norm(u) < tol2;
            for (std::size_t e = 0; e < out.size(); ++e) {
                auto y = table_.row(e);
                if (u_zero || sq_norm(y) < tol2) {
                    out[e] = 0.0;
                    continue;
                }
                const double xy = dot(u, y);
                out[e] = xy / (au * hin_factor_[e] - cc2 * xy);
            }
            return;
        }
        case ScoreKind::hyperbolic_distance: {
            for (std::size_t e = 0; e < out.size(); ++e) {
                const double dist = raw::distance(u, table_.row(e), c_);
                out[e] = -dist * dist;
            }
            return;
        }
        case ScoreKind::tangent_inner: {
            std::vector<double> lu(d);
            raw::log0(u, c_, lu);
            for (std::size_t e = 0; e < out.size(); ++e) out[e] = dot(lu, log_table_.row(e));
            return;
        }
        case ScoreKind::euclidean_inner: {
            for (std::size_t e = 0; e < out.size(); ++e) out[e] = dot(u, table_.row(e));
            return;
        }
        case ScoreKind::euclidean_distance: {
            for (std::size_t e = 0; e < out.size(); ++e) {
                double s = 0.0;
                auto y = table_.row(e);
                for (std::size_t i = 0; i < d; ++i) {
                    const double diff = u[i] - y[i];
                    s += diff * diff;
                }
                out[e] = -s;
            }
            return;
        }
    }
    throw std::logic_error("Scorer: unhandled score kind");
}

double Scorer::score_one(std::size_t h, std::size_t r, std::size_t t) const {
    if (t >= params_->num_entities) throw std::out_of_range("Scorer: tail id out of range");
    std::vector<double> all(params_->num_entities);
    score_tails(h, r, all);
    return all[t];
}

}  // namespace ffhr
