#include "ffhr/loss_graph.hpp"

#include <cmath>
#include <stdexcept>

namespace ffhr {

using tape_ops::CurvNodes;

BatchGraphBuilder::BatchGraphBuilder(Tape& tape, const ModelParams& params, const Adjacency& adj)
    : tape_(&tape), params_(&params), adj_(&adj) {
    params.config.validate();
    if (params.config.use_gcn && adj.num_entities() != params.num_entities)
        throw std::invalid_argument("BatchGraphBuilder: adjacency entity count mismatch");
    hyperbolic_ = params.config.encoder.space == Space::hyperbolic;
    if (params.config.trainable_curvature) {
        Tape::Id lc = leaf_for("log_c", 0, 1, params.log_curvature);
        cn_ = CurvNodes::trainable(tape, lc);
    } else {
        cn_ = CurvNodes::fixed(tape, params.config.curvature);
    }
}

Tape::Id BatchGraphBuilder::leaf_for(const std::string& array, std::size_t offset,
                                     std::size_t array_len, std::span<const double> data) {
    Tape::Id id = tape_->leaf(data);
    leaves_.push_back({array, offset, array_len, id});
    return id;
}

void BatchGraphBuilder::build_entity_views() {
    const std::size_t n = params_->num_entities;
    const std::size_t d = params_->config.dim;
    raw_.resize(n);
    point_.resize(n);
    factor_.assign(n, 0);
    tangent_.assign(n, 0);
    factor_set_.assign(n, false);
    tangent_set_.assign(n, false);
    for (std::size_t e = 0; e < n; ++e) {
        raw_[e] = leaf_for("entity", e * d, params_->entity_raw.size(), params_->entity_row(e));
        point_[e] = hyperbolic_ ? tape_ops::dexp0(*tape_, raw_[e], cn_) : raw_[e];
    }
}

void BatchGraphBuilder::encode_all() {
    Tape& t = *tape_;
    const EncoderConfig& cfg = params_->config.encoder;
    const std::size_t n = params_->config.dim;
    const std::size_t slots = params_->num_relations + 1;
    const std::size_t self_slot = slots - 1;
    const double slope = cfg.activation_slope;

    for (const auto& ent : adj_->out) {
        for (const auto& e : ent) {
            if (e.relation >= self_slot)
                throw std::invalid_argument("BatchGraphBuilder: edge relation id out of range");
            if (e.neighbor >= params_->num_entities)
                throw std::invalid_argument("BatchGraphBuilder: edge neighbor id out of range");
        }
    }

    std::vector<Tape::Id> cur = point_;
    for (std::size_t l = 0; l < params_->layers.size(); ++l) {
        const GcnLayerParams& lp = params_->layers[l];
        const std::string prefix = "layer" + std::to_string(l) + "/";
        const bool fpm = cfg.impl == EncoderImpl::fpm;

        std::vector<Tape::Id> angles(slots), bias(slots), ball_bias(slots), w(slots);
        for (std::size_t s = 0; s < slots; ++s) {
            if (fpm) {
                angles[s] = leaf_for(prefix + "angles/" + std::to_string(s), 0,
                                     lp.rotation_angles.at(s).size(), lp.rotation_angles[s]);
                bias[s] = leaf_for(prefix + "bias/" + std::to_string(s), 0,
                                   lp.bias_raw.at(s).size(), lp.bias_raw[s]);
                if (hyperbolic_) ball_bias[s] = tape_ops::dexp0(t, bias[s], cn_);
            } else {
                w[s] = leaf_for(prefix + "w/" + std::to_string(s), 0, lp.general_w.at(s).data.size(),
                                lp.general_w[s].data);
            }
        }
        const auto heads = static_cast<std::size_t>(cfg.num_heads);
        std::vector<Tape::Id> ah(heads), at(heads);
        for (std::size_t k = 0; k < heads; ++k) {
            ah[k] = leaf_for(prefix + "attn_head/" + std::to_string(k), 0, lp.attn_head.at(k).size(),
                             lp.attn_head[k]);
            at[k] = leaf_for(prefix + "attn_tail/" + std::to_string(k), 0, lp.attn_tail.at(k).size(),
                             lp.attn_tail[k]);
        }

        auto project = [&](Tape::Id x) { return hyperbolic_ ? t.project(x, cn_.c_val) : x; };
        auto message = [&](Tape::Id x, std::size_t s) {
            Tape::Id m;
            if (fpm) {
                if (hyperbolic_) {
                    m = tape_ops::dfeature_transform(t, x, angles[s], ball_bias[s], cn_);
                } else {
                    m = t.add(t.block_rotation(angles[s], x), bias[s]);
                }
            } else {
                m = tape_ops::dexp0(t, t.matvec(w[s], tape_ops::dlog0(t, x, cn_)), cn_);
            }
            return project(m);
        };

        std::vector<Tape::Id> next(params_->num_entities);
        for (std::size_t i = 0; i < params_->num_entities; ++i) {
            const Tape::Id self = message(cur[i], self_slot);
            std::vector<Tape::Id> msgs;
            msgs.reserve(adj_->out[i].size() + 1);
            if (cfg.self_loops) msgs.push_back(self);
            for (const auto& e : adj_->out[i]) msgs.push_back(message(cur[e.neighbor], e.relation));
            if (msgs.empty()) msgs.push_back(self);

            std::vector<Tape::Id> head_out(heads);
            for (std::size_t k = 0; k < heads; ++k) {
                const Tape::Id self_part = t.dot(ah[k], self);
                std::vector<Tape::Id> ws(msgs.size());
                for (std::size_t j = 0; j < msgs.size(); ++j)
                    ws[j] = t.leaky_relu_s(t.add_s(self_part, t.dot(at[k], msgs[j])), slope);

                if (hyperbolic_) {
                    head_out[k] = project(fpm ? tape_ops::dgyromidpoint(t, msgs, ws, cn_)
                                              : tape_ops::dtangent_aggregate(t, msgs, ws, cn_));
                } else {
                    double total_abs = 0.0;
                    for (Tape::Id wj : ws) total_abs += std::abs(t.value_scalar(wj));
                    if (total_abs < kDegenerateDenom)
                        for (Tape::Id& wj : ws) wj = t.constant_scalar(1.0);
                    Tape::Id sum = t.scale(msgs[0], ws[0]);
                    for (std::size_t j = 1; j < msgs.size(); ++j)
                        sum = t.add(sum, t.scale(msgs[j], ws[j]));
                    head_out[k] = sum;
                }
            }

            Tape::Id combined;
            if (heads == 1) {
                combined = head_out[0];
            } else if (!hyperbolic_) {
                Tape::Id sum = head_out[0];
                for (std::size_t k = 1; k < heads; ++k) sum = t.add(sum, head_out[k]);
                combined = t.scale_const(sum, 1.0 / static_cast<double>(heads));
            } else {
                std::vector<Tape::Id> ones(heads);
                for (auto& o : ones) o = t.constant_scalar(1.0);
                combined = project(fpm ? tape_ops::dgyromidpoint(t, head_out, ones, cn_)
                                       : tape_ops::dtangent_aggregate(t, head_out, ones, cn_));
            }

            next[i] = hyperbolic_ ? project(tape_ops::dactivation(t, combined, slope, cn_))
                                  : t.leaky_relu(combined, slope);
        }
        cur = std::move(next);
        (void)n;
    }
    point_ = cur;
    // Encoded coordinates invalidate the raw-leaf tangent shortcut.
    tangent_set_.assign(params_->num_entities, false);
}

Tape::Id BatchGraphBuilder::relation_leaf(std::size_t r) {
    auto it = rel_leaf_.find(r);
    if (it != rel_leaf_.end()) return it->second;
    Tape::Id id = leaf_for("rel/" + std::to_string(r), 0, params_->relation_params.at(r).size(),
                           params_->relation_params[r]);
    rel_leaf_.emplace(r, id);
    return id;
}

Tape::Id BatchGraphBuilder::candidate_factor(std::size_t e) {
    if (!factor_set_[e]) {
        factor_[e] = tape_ops::dhin_factor(*tape_, point_[e], cn_);
        factor_set_[e] = true;
    }
    return factor_[e];
}

Tape::Id BatchGraphBuilder::candidate_tangent(std::size_t e) {
    if (!tangent_set_[e]) {
        if (!hyperbolic_) {
            tangent_[e] = point_[e];
        } else if (!params_->config.use_gcn) {
            tangent_[e] = raw_[e];  // log0(exp0(x)) = x on the raw parameterization
        } else {
            tangent_[e] = tape_ops::dlog0(*tape_, point_[e], cn_);
        }
        tangent_set_[e] = true;
    }
    return tangent_[e];
}

Tape::Id BatchGraphBuilder::build_loss(std::span<const Triple> batch, double reg_coeff) {
    if (built_) throw std::logic_error("BatchGraphBuilder: one batch per builder");
    built_ = true;
    if (batch.empty()) throw std::invalid_argument("BatchGraphBuilder: empty batch");
    if (!(reg_coeff >= 0.0)) throw std::invalid_argument("BatchGraphBuilder: negative reg coeff");
    for (const Triple& tr : batch) {
        if (tr.h >= params_->num_entities || tr.t >= params_->num_entities)
            throw std::out_of_range("BatchGraphBuilder: entity id out of range");
        if (tr.r >= params_->num_relations)
            throw std::out_of_range("BatchGraphBuilder: relation id out of range");
    }

    Tape& t = *tape_;
    build_entity_views();
    if (params_->config.use_gcn) encode_all();

    const ScoreKind kind = params_->config.score;
    const TransformKind tk = params_->config.transform;
    const std::size_t n_ent = params_->num_entities;

    Tape::Id loss_sum = 0;
    Tape::Id pen_sum = 0;
    bool first = true;
    for (const Triple& tr : batch) {
        const Tape::Id rel = relation_leaf(tr.r);
        const Tape::Id head_t = candidate_tangent(tr.h);
        const Tape::Id u_t = tape_ops::dapply_linear(t, tk, rel, head_t);

        std::vector<Tape::Id> scores(n_ent);
        switch (kind) {
            case ScoreKind::hin: {
                const Tape::Id u = tape_ops::dexp0(t, u_t, cn_);
                const Tape::Id au = tape_ops::dhin_factor(t, u, cn_);
                for (std::size_t e = 0; e < n_ent; ++e)
                    scores[e] = tape_ops::dhin(t, u, au, point_[e], candidate_factor(e), cn_);
                break;
            }
            case ScoreKind::hyperbolic_distance: {
                const Tape::Id u = tape_ops::dexp0(t, u_t, cn_);
                for (std::size_t e = 0; e < n_ent; ++e)
                    scores[e] = tape_ops::dneg_dist_sq(t, u, point_[e], cn_);
                break;
            }
            case ScoreKind::tangent_inner: {
                for (std::size_t e = 0; e < n_ent; ++e)
                    scores[e] = t.dot(u_t, candidate_tangent(e));
                break;
            }
            case ScoreKind::euclidean_inner: {
                for (std::size_t e = 0; e < n_ent; ++e) scores[e] = t.dot(u_t, point_[e]);
                break;
            }
            case ScoreKind::euclidean_distance: {
                for (std::size_t e = 0; e < n_ent; ++e)
                    scores[e] = tape_ops::dneg_euclidean_dist_sq(t, u_t, point_[e]);
                break;
            }
        }

        const Tape::Id q_loss = tape_ops::dmulticlass_log_loss(t, scores, tr.t);
        loss_sum = first ? q_loss : t.add_s(loss_sum, q_loss);

        if (reg_coeff > 0.0) {
            const Tape::Id tail_t = candidate_tangent(tr.t);
            const Tape::Id pen = tape_ops::ddura(t, u_t, tail_t);
            pen_sum = first ? pen : t.add_s(pen_sum, pen);
        }
        first = false;
    }

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    Tape::Id total = t.mul_sc(loss_sum, inv_b);
    if (reg_coeff > 0.0) total = t.add_s(total, t.mul_sc(pen_sum, reg_coeff * inv_b));
    return total;
}

void BatchGraphBuilder::accumulate_gradients(GradMap& out) const {
    for (const LeafRec& rec : leaves_) {
        auto& slot = out[rec.array];
        if (slot.empty()) slot.assign(rec.array_len, 0.0);
        auto g = tape_->grad(rec.node);
        for (std::size_t i = 0; i < g.size(); ++i) slot[rec.offset + i] += g[i];
    }
}

double dura_penalty(const BallPoint& transformed, const BallPoint& e_t) {
    if (transformed.dim() != e_t.dim() || transformed.curvature() != e_t.curvature())
        throw std::invalid_argument("dura_penalty: mixed balls");
    const double c = transformed.curvature().c();
    std::vector<double> tan(transformed.dim());
    raw::log0(transformed.coords(), c, tan);
    double pen = sq_norm(tan);
    raw::log0(e_t.coords(), c, tan);
    return pen + sq_norm(tan);
}

double batch_loss_value(const ModelParams& params, std::span<const Triple> batch,
                        const Adjacency& adj, double reg_coeff) {
    if (batch.empty()) throw std::invalid_argument("batch_loss_value: empty batch");
    const Scorer scorer(params, adj);
    const std::size_t d = params.config.dim;
    const std::size_t n_ent = params.num_entities;
    const double c = scorer.curvature();
    const bool hyper = params.config.encoder.space == Space::hyperbolic;

    std::vector<double> scores(n_ent), head_tan(d), u_t(d), tail_tan(d);
    double loss_sum = 0.0;
    double pen_sum = 0.0;
    for (const Triple& tr : batch) {
        scorer.score_tails(tr.h, tr.r, scores);
        double m = scores[0];
        for (double s : scores) m = std::max(m, s);
        double z = 0.0;
        for (double s : scores) z += std::exp(s - m);
        loss_sum += m + std::log(z) - scores[tr.t];

        if (reg_coeff > 0.0) {
            const auto& table = scorer.entity_table();
            const RelationTransform rt(params.config.transform, d, params.relation_params[tr.r]);
            if (hyper) {
                raw::log0(table.row(tr.h), c, head_tan);
                rt.apply_linear(head_tan, u_t);
                raw::log0(table.row(tr.t), c, tail_tan);
            } else {
                rt.apply_linear(table.row(tr.h), u_t);
                auto row = table.row(tr.t);
                std::copy(row.begin(), row.end(), tail_tan.begin());
            }
            pen_sum += sq_norm(u_t) + sq_norm(tail_tan);
        }
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    return loss_sum * inv_b + reg_coeff * pen_sum * inv_b;
}

}  // namespace ffhr
