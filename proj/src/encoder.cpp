#include "ffhr/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace ffhr {

std::string to_string(Space s) {
    return s == Space::hyperbolic ? "hyperbolic" : "euclidean";
}

Space space_from_string(const std::string& s) {
    if (s == "hyperbolic") return Space::hyperbolic;
    if (s == "euclidean") return Space::euclidean;
    throw std::invalid_argument("unknown space: " + s);
}

std::string to_string(EncoderImpl i) {
    return i == EncoderImpl::fpm ? "fpm" : "hgcn_tangent";
}

EncoderImpl encoder_impl_from_string(const std::string& s) {
    if (s == "fpm") return EncoderImpl::fpm;
    if (s == "hgcn_tangent") return EncoderImpl::hgcn_tangent;
    throw std::invalid_argument("unknown encoder impl: " + s);
}

void EncoderConfig::validate() const {
    if (num_layers != 1 && num_layers != 2)
        throw std::invalid_argument("EncoderConfig: num_layers must be 1 or 2");
    if (num_heads != 1 && num_heads != 2 && num_heads != 4 && num_heads != 8)
        throw std::invalid_argument("EncoderConfig: num_heads must be one of 1,2,4,8");
    if (!(activation_slope > 0.0 && activation_slope < 1.0))
        throw std::invalid_argument("EncoderConfig: activation_slope must lie in (0,1)");
    if (impl == EncoderImpl::hgcn_tangent && space != Space::hyperbolic)
        throw std::invalid_argument("EncoderConfig: hgcn_tangent requires hyperbolic space");
}

Matrix build_rotation(std::span<const double> angles) {
    const std::size_t n = 2 * angles.size();
    Matrix m(n, n);
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const double co = std::cos(angles[k]);
        const double si = std::sin(angles[k]);
        m.at(2 * k, 2 * k) = co;
        m.at(2 * k, 2 * k + 1) = -si;
        m.at(2 * k + 1, 2 * k) = si;
        m.at(2 * k + 1, 2 * k + 1) = co;
    }
    return m;
}

void apply_block_rotation(std::span<const double> angles, std::span<const double> in,
                          std::span<double> out) {
    if (in.size() != 2 * angles.size() || out.size() != in.size())
        throw std::invalid_argument("apply_block_rotation: dimension mismatch");
    for (std::size_t k = 0; k < angles.size(); ++k) {
        const double co = std::cos(angles[k]);
        const double si = std::sin(angles[k]);
        const double x0 = in[2 * k], x1 = in[2 * k + 1];
        out[2 * k] = co * x0 - si * x1;
        out[2 * k + 1] = si * x0 + co * x1;
    }
}

double leaky_relu(double z, double slope) { return z > 0.0 ? z : slope * z; }

BallPoint feature_transform(const BallPoint& x, std::span<const double> angles, const BallPoint& b) {
    if (x.dim() != 2 * angles.size()) throw std::invalid_argument("feature_transform: dimension mismatch");
    if (b.dim() != x.dim() || b.curvature() != x.curvature())
        throw std::invalid_argument("feature_transform: bias mismatch");
    std::vector<double> rotated(x.dim());
    apply_block_rotation(angles, x.coords(), rotated);
    std::vector<double> out(x.dim());
    raw::mobius_add(b.coords(), rotated, x.curvature().c(), out);
    return BallPoint(std::move(out), x.curvature());
}

std::vector<double> attention_weights(std::span<const double> self_msg,
                                      const std::vector<std::vector<double>>& msgs,
                                      std::span<const double> a_h, std::span<const double> a_t,
                                      double slope) {
    if (a_h.size() != self_msg.size() || a_t.size() != self_msg.size())
        throw std::invalid_argument("attention_weights: dimension mismatch");
    const double self_part = dot(a_h, self_msg);
    std::vector<double> w(msgs.size());
    for (std::size_t j = 0; j < msgs.size(); ++j) {
        w[j] = leaky_relu(self_part + dot(a_t, msgs[j]), slope);
    }
    return w;
}

namespace raw {

bool project_into_ball(std::span<double> x, double c) {
    const double n2 = sq_norm(x);
    const double max_norm = (1.0 - kBallMargin) / std::sqrt(c);
    if (n2 < max_norm * max_norm) return false;
    const double f = max_norm / std::sqrt(n2);
    for (double& v : x) v *= f;
    return true;
}

void gyromidpoint(const std::vector<std::vector<double>>& points, std::span<const double> weights,
                  double c, std::span<double> out) {
    const std::size_t n = out.size();
    std::vector<double> num(n, 0.0);
    double den = 0.0;
    auto accumulate = [&](bool uniform) {
        std::fill(num.begin(), num.end(), 0.0);
        den = 0.0;
        for (std::size_t j = 0; j < points.size(); ++j) {
            const double v = uniform ? 1.0 : weights[j];
            const double lam = conformal_factor(points[j], c);
            for (std::size_t i = 0; i < n; ++i) num[i] += v * lam * points[j][i];
            den += std::abs(v) * (lam - 1.0);
        }
    };
    accumulate(false);
    if (std::abs(den) < kDegenerateDenom) accumulate(true);
    for (double& v : num) v /= den;
    mobius_scalar_mul(0.5, num, c, out);
}

void hyperbolic_activation(std::span<const double> x, double slope, double c, std::span<double> out) {
    const double sc = std::sqrt(c);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = leaky_relu(sc * x[i], slope) / sc;
}

}  // namespace raw

namespace {

void require_nonempty_same_ball(const std::vector<BallPoint>& points, const char* op) {
    if (points.empty()) throw std::invalid_argument(std::string(op) + ": empty point list");
    for (const auto& p : points) {
        if (p.dim() != points.front().dim() || p.curvature() != points.front().curvature())
            throw std::invalid_argument(std::string(op) + ": mixed balls");
    }
}

std::vector<std::vector<double>> coord_rows(const std::vector<BallPoint>& points) {
    std::vector<std::vector<double>> rows;
    rows.reserve(points.size());
    for (const auto& p : points) rows.emplace_back(p.coords().begin(), p.coords().end());
    return rows;
}

}  // namespace

BallPoint gyromidpoint(const std::vector<BallPoint>& points, std::span<const double> weights) {
    require_nonempty_same_ball(points, "gyromidpoint");
    if (weights.size() != points.size()) throw std::invalid_argument("gyromidpoint: weight count mismatch");
    std::vector<double> out(points.front().dim());
    raw::gyromidpoint(coord_rows(points), weights, points.front().curvature().c(), out);
    return BallPoint(std::move(out), points.front().curvature());
}

BallPoint multi_head_combine(const std::vector<BallPoint>& head_outputs) {
    require_nonempty_same_ball(head_outputs, "multi_head_combine");
    if (head_outputs.size() == 1) return head_outputs.front();
    std::vector<double> ones(head_outputs.size(), 1.0);
    return gyromidpoint(head_outputs, ones);
}

BallPoint hyperbolic_activation(const BallPoint& x, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) throw std::invalid_argument("hyperbolic_activation: bad slope");
    std::vector<double> out(x.dim());
    raw::hyperbolic_activation(x.coords(), slope, x.curvature().c(), out);
    return BallPoint(std::move(out), x.curvature());
}

BallPoint hgcn_feature_transform(const BallPoint& x, const Matrix& w) {
    return mobius_matvec(w, x);
}

BallPoint hgcn_aggregate(const std::vector<BallPoint>& messages, std::span<const double> weights) {
    require_nonempty_same_ball(messages, "hgcn_aggregate");
    if (weights.size() != messages.size())
        throw std::invalid_argument("hgcn_aggregate: weight count mismatch");
    const auto curv = messages.front().curvature();
    const std::size_t n = messages.front().dim();

    double total = 0.0;
    for (double v : weights) total += v;
    std::vector<double> uniform;
    std::span<const double> w = weights;
    if (std::abs(total) < kDegenerateDenom) {
        uniform.assign(messages.size(), 1.0);
        w = uniform;
        total = static_cast<double>(messages.size());
    }

    std::vector<double> mean(n, 0.0);
    std::vector<double> tangent(n);
    for (std::size_t j = 0; j < messages.size(); ++j) {
        raw::log0(messages[j].coords(), curv.c(), tangent);
        for (std::size_t i = 0; i < n; ++i) mean[i] += w[j] * tangent[i];
    }
    for (double& v : mean) v /= total;
    std::vector<double> out(n);
    raw::exp0(mean, curv.c(), out);
    return BallPoint(std::move(out), curv);
}

namespace {

struct LayerCheck {
    std::size_t num_rel_slots;  // augmented relations + self slot
};

LayerCheck validate_layer(const GcnLayerParams& lp, const EncoderConfig& cfg, std::size_t dim) {
    LayerCheck out{};
    if (cfg.impl == EncoderImpl::fpm) {
        if (dim % 2 != 0) throw std::invalid_argument("encoder_forward: dimension must be even");
        if (lp.rotation_angles.empty() || lp.rotation_angles.size() != lp.bias_raw.size())
            throw std::invalid_argument("encoder_forward: rotation/bias relation count mismatch");
        for (const auto& a : lp.rotation_angles) {
            if (a.size() != dim / 2) throw std::invalid_argument("encoder_forward: bad rotation angle count");
        }
        for (const auto& b : lp.bias_raw) {
            if (b.size() != dim) throw std::invalid_argument("encoder_forward: bad bias dimension");
        }
        out.num_rel_slots = lp.rotation_angles.size();
    } else {
        if (lp.general_w.empty()) throw std::invalid_argument("encoder_forward: missing transform matrices");
        for (const auto& w : lp.general_w) {
            if (w.rows != dim || w.cols != dim)
                throw std::invalid_argument("encoder_forward: bad transform matrix shape");
        }
        out.num_rel_slots = lp.general_w.size();
    }
    if (lp.attn_head.size() != static_cast<std::size_t>(cfg.num_heads) ||
        lp.attn_tail.size() != static_cast<std::size_t>(cfg.num_heads))
        throw std::invalid_argument("encoder_forward: attention vector count != heads");
    for (const auto& a : lp.attn_head) {
        if (a.size() != dim) throw std::invalid_argument("encoder_forward: bad attention dimension");
    }
    for (const auto& a : lp.attn_tail) {
        if (a.size() != dim) throw std::invalid_argument("encoder_forward: bad attention dimension");
    }
    return out;
}

}  // namespace

Matrix encoder_forward(const Matrix& table, const Adjacency& adj,
                       std::span<const GcnLayerParams> layers, const EncoderConfig& cfg,
                       Curvature curv, ProjectionStats* stats) {
    cfg.validate();
    if (layers.size() != static_cast<std::size_t>(cfg.num_layers))
        throw std::invalid_argument("encoder_forward: layer parameter count != num_layers");
    if (adj.num_entities() != table.rows)
        throw std::invalid_argument("encoder_forward: adjacency/table entity count mismatch");

    const std::size_t n = table.cols;
    const double c = curv.c();
    const bool hyp = cfg.space == Space::hyperbolic;

    auto project = [&](std::span<double> x) {
        if (!hyp) return;
        if (stats) ++stats->calls;
        if (raw::project_into_ball(x, c)) {
            if (stats) ++stats->clamped;
        }
    };

    Matrix cur = table;
    for (const GcnLayerParams& lp : layers) {
        const LayerCheck lc = validate_layer(lp, cfg, n);
        const std::size_t self_slot = lc.num_rel_slots - 1;
        for (const auto& ent : adj.out) {
            for (const auto& e : ent) {
                if (e.relation >= self_slot)
                    throw std::invalid_argument("encoder_forward: edge relation id out of range");
                if (e.neighbor >= table.rows)
                    throw std::invalid_argument("encoder_forward: edge neighbor id out of range");
            }
        }

        // ball biases are stored as tangent coordinates; map them once per layer
        std::vector<std::vector<double>> ball_bias;
        if (cfg.impl == EncoderImpl::fpm && hyp) {
            ball_bias.resize(lc.num_rel_slots, std::vector<double>(n));
            for (std::size_t r = 0; r < lc.num_rel_slots; ++r) {
                raw::exp0(lp.bias_raw[r], c, ball_bias[r]);
            }
        }

        auto message = [&](std::span<const double> x, std::size_t r, std::span<double> out) {
            if (cfg.impl == EncoderImpl::fpm) {
                std::vector<double> rotated(n);
                apply_block_rotation(lp.rotation_angles[r], x, rotated);
                if (hyp) {
                    raw::mobius_add(ball_bias[r], rotated, c, out);
                } else {
                    for (std::size_t i = 0; i < n; ++i) out[i] = rotated[i] + lp.bias_raw[r][i];
                }
            } else {
                std::vector<double> tangent(n);
                raw::log0(x, c, tangent);
                std::vector<double> moved = matvec(lp.general_w[r], tangent);
                raw::exp0(moved, c, out);
            }
            project(out);
        };

        Matrix next(table.rows, n);
        std::vector<double> self_msg(n);
        for (std::size_t i = 0; i < table.rows; ++i) {
            message(cur.row(i), self_slot, self_msg);

            std::vector<std::vector<double>> msgs;
            msgs.reserve(adj.out[i].size() + 1);
            if (cfg.self_loops) msgs.emplace_back(self_msg.begin(), self_msg.end());
            for (const auto& e : adj.out[i]) {
                std::vector<double> m(n);
                message(cur.row(e.neighbor), e.relation, m);
                msgs.push_back(std::move(m));
            }
            if (msgs.empty()) msgs.emplace_back(self_msg.begin(), self_msg.end());

            std::vector<std::vector<double>> head_out(cfg.num_heads, std::vector<double>(n));
            for (int k = 0; k < cfg.num_heads; ++k) {
                auto w = attention_weights(self_msg, msgs, lp.attn_head[k], lp.attn_tail[k],
                                           cfg.activation_slope);
                if (hyp) {
                    if (cfg.impl == EncoderImpl::fpm) {
                        raw::gyromidpoint(msgs, w, c, head_out[k]);
                    } else {
                        std::vector<BallPoint> pts;
                        pts.reserve(msgs.size());
                        for (auto& m : msgs) pts.emplace_back(m, curv);
                        auto agg = hgcn_aggregate(pts, w);
                        std::copy(agg.coords().begin(), agg.coords().end(), head_out[k].begin());
                    }
                    project(head_out[k]);
                } else {
                    double total_abs = 0.0;
                    for (double x : w) total_abs += std::abs(x);
                    if (total_abs < kDegenerateDenom) std::fill(w.begin(), w.end(), 1.0);
                    for (std::size_t j = 0; j < msgs.size(); ++j) {
                        for (std::size_t d = 0; d < n; ++d) head_out[k][d] += w[j] * msgs[j][d];
                    }
                }
            }

            std::vector<double> combined(n);
            if (cfg.num_heads == 1) {
                combined = head_out[0];
            } else if (!hyp) {
                for (const auto& h : head_out) {
                    for (std::size_t d = 0; d < n; ++d) combined[d] += h[d];
                }
                for (double& v : combined) v /= static_cast<double>(cfg.num_heads);
            } else if (cfg.impl == EncoderImpl::fpm) {
                std::vector<double> ones(head_out.size(), 1.0);
                raw::gyromidpoint(head_out, ones, c, combined);
                project(combined);
            } else {
                std::vector<BallPoint> pts;
                pts.reserve(head_out.size());
                for (auto& h : head_out) pts.emplace_back(h, curv);
                std::vector<double> ones(head_out.size(), 1.0);
                auto agg = hgcn_aggregate(pts, ones);
                std::copy(agg.coords().begin(), agg.coords().end(), combined.begin());
                project(combined);
            }

            auto dst = next.row(i);
            if (hyp) {
                raw::hyperbolic_activation(combined, cfg.activation_slope, c, dst);
                project(dst);
            } else {
                for (std::size_t d = 0; d < n; ++d) dst[d] = leaky_relu(combined[d], cfg.activation_slope);
            }
        }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace ffhr
