#include "ffhr/tape_ops.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ffhr/ball.hpp"

namespace ffhr::tape_ops {

CurvNodes CurvNodes::fixed(Tape& t, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("CurvNodes: c must be finite and > 0");
    CurvNodes n;
    n.c = t.constant_scalar(c);
    n.sqrt_c = t.constant_scalar(std::sqrt(c));
    n.two_c = t.constant_scalar(2.0 * c);
    n.c_sq = t.constant_scalar(c * c);
    n.two_c_sq = t.constant_scalar(2.0 * c * c);
    n.two = t.constant_scalar(2.0);
    n.c_val = c;
    n.sqrt_c_val = std::sqrt(c);
    return n;
}

CurvNodes CurvNodes::trainable(Tape& t, Tape::Id log_c_leaf) {
    CurvNodes n;
    n.c = t.exp_s(log_c_leaf);
    n.sqrt_c = t.sqrt_s(n.c);
    n.two_c = t.mul_sc(n.c, 2.0);
    n.c_sq = t.mul_s(n.c, n.c);
    n.two_c_sq = t.mul_sc(n.c_sq, 2.0);
    n.two = t.constant_scalar(2.0);
    n.c_val = t.value_scalar(n.c);
    n.sqrt_c_val = t.value_scalar(n.sqrt_c);
    return n;
}

namespace {

double vec_norm(const Tape& t, Tape::Id v) {
    double s = 0.0;
    for (double x : t.value(v)) s += x * x;
    return std::sqrt(s);
}

}  // namespace

Tape::Id dexp0(Tape& t, Tape::Id v, const CurvNodes& c) {
    const double n = vec_norm(t, v);
    if (c.sqrt_c_val * n < 1e-8) return v;  // tanh(t)/t -> 1 near 0
    auto n2 = t.dot(v, v);
    auto arg = t.mul_s(t.sqrt_s(n2), c.sqrt_c);
    auto th = t.tanh_s(arg);
    // Numerator saturation keeps the image strictly inside the ball; the
    // saturated branch is constant, matching a clamp's zero derivative.
    Tape::Id num = t.value_scalar(th) >= kArtanhArgMax ? t.constant_scalar(kArtanhArgMax) : th;
    return t.scale(v, t.div_s(num, arg));
}

Tape::Id dlog0(Tape& t, Tape::Id y, const CurvNodes& c) {
    const double n = vec_norm(t, y);
    if (c.sqrt_c_val * n < 1e-8) return y;
    auto n2 = t.dot(y, y);
    auto arg = t.mul_s(t.sqrt_s(n2), c.sqrt_c);
    return t.scale(y, t.div_s(t.artanh_s(arg), arg));
}

Tape::Id dmobius_add(Tape& t, Tape::Id x, Tape::Id y, const CurvNodes& c) {
    auto xy = t.dot(x, y);
    auto xx = t.dot(x, x);
    auto yy = t.dot(y, y);
    auto cxy2 = t.mul_s(xy, c.two_c);
    auto cxx = t.mul_s(xx, c.c);
    auto cyy = t.mul_s(yy, c.c);
    auto den = t.add_sc(t.add_s(cxy2, t.mul_s(cxx, cyy)), 1.0);
    auto ax = t.div_s(t.add_sc(t.add_s(cxy2, cyy), 1.0), den);
    auto ay = t.div_s(t.add_sc(t.mul_sc(cxx, -1.0), 1.0), den);
    return t.add(t.scale(x, ax), t.scale(y, ay));
}

Tape::Id dmobius_half(Tape& t, Tape::Id z, const CurvNodes& c) {
    const double n = vec_norm(t, z);
    if (n < kZeroNormTol) return t.constant(std::vector<double>(t.size(z), 0.0));
    auto n2 = t.dot(z, z);
    auto arg = t.mul_s(t.sqrt_s(n2), c.sqrt_c);
    auto th = t.tanh_s(t.mul_sc(t.artanh_s(arg), 0.5));
    return t.scale(z, t.div_s(th, arg));
}

Tape::Id dconformal(Tape& t, Tape::Id m, const CurvNodes& c) {
    auto cm = t.mul_s(t.dot(m, m), c.c);
    return t.div_s(c.two, t.add_sc(t.mul_sc(cm, -1.0), 1.0));
}

Tape::Id dgyromidpoint(Tape& t, std::span<const Tape::Id> points,
                       std::span<const Tape::Id> weights, const CurvNodes& c) {
    if (points.empty() || points.size() != weights.size())
        throw std::invalid_argument("dgyromidpoint: bad point/weight count");

    std::vector<Tape::Id> lam(points.size());
    for (std::size_t j = 0; j < points.size(); ++j) lam[j] = dconformal(t, points[j], c);

    auto accumulate = [&](bool uniform) {
        Tape::Id num = 0, den = 0;
        for (std::size_t j = 0; j < points.size(); ++j) {
            Tape::Id coeff = uniform ? lam[j] : t.mul_s(weights[j], lam[j]);
            Tape::Id term = t.scale(points[j], coeff);
            num = j == 0 ? term : t.add(num, term);
            Tape::Id lm1 = t.add_sc(lam[j], -1.0);
            Tape::Id d = uniform ? lm1 : t.mul_s(t.abs_s(weights[j]), lm1);
            den = j == 0 ? d : t.add_s(den, d);
        }
        return std::pair{num, den};
    };

    auto [num, den] = accumulate(false);
    if (std::abs(t.value_scalar(den)) < kDegenerateDenom) {
        auto [nu, du] = accumulate(true);
        num = nu;
        den = du;
    }
    return dmobius_half(t, t.div_by(num, den), c);
}

Tape::Id dtangent_aggregate(Tape& t, std::span<const Tape::Id> points,
                            std::span<const Tape::Id> weights, const CurvNodes& c) {
    if (points.empty() || points.size() != weights.size())
        throw std::invalid_argument("dtangent_aggregate: bad point/weight count");

    Tape::Id total = weights[0];
    for (std::size_t j = 1; j < weights.size(); ++j) total = t.add_s(total, weights[j]);

    const bool uniform = std::abs(t.value_scalar(total)) < kDegenerateDenom;
    if (uniform) total = t.constant_scalar(static_cast<double>(points.size()));

    Tape::Id mean = 0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        Tape::Id tangent = dlog0(t, points[j], c);
        Tape::Id term = uniform ? tangent : t.scale(tangent, weights[j]);
        mean = j == 0 ? term : t.add(mean, term);
    }
    return dexp0(t, t.div_by(mean, total), c);
}

Tape::Id dactivation(Tape& t, Tape::Id x, double slope, const CurvNodes& c) {
    return t.div_by(t.leaky_relu(t.scale(x, c.sqrt_c), slope), c.sqrt_c);
}

Tape::Id dfeature_transform(Tape& t, Tape::Id x, Tape::Id angles, Tape::Id bias_ball,
                            const CurvNodes& c) {
    return dmobius_add(t, bias_ball, t.block_rotation(angles, x), c);
}

Tape::Id dapply_linear(Tape& t, TransformKind kind, Tape::Id params, Tape::Id u) {
    switch (kind) {
        case TransformKind::diagonal: return t.mul(params, u);
        case TransformKind::block2_rotation_scale: return t.rot_scale_blocks(params, u);
        case TransformKind::block2_general: return t.general_blocks(params, u);
        case TransformKind::full: return t.matvec(params, u);
    }
    throw std::invalid_argument("dapply_linear: unknown transform kind");
}

Tape::Id dhin_factor(Tape& t, Tape::Id y, const CurvNodes& c) {
    return t.add_sc(t.mul_s(t.dot(y, y), c.c_sq), 1.0);
}

Tape::Id dhin(Tape& t, Tape::Id x, Tape::Id x_factor, Tape::Id y, Tape::Id y_factor,
              const CurvNodes& c) {
    auto xy = t.dot(x, y);
    auto den = t.sub_s(t.mul_s(x_factor, y_factor), t.mul_s(xy, c.two_c_sq));
    return t.div_s(xy, den);
}

Tape::Id dneg_dist_sq(Tape& t, Tape::Id x, Tape::Id y, const CurvNodes& c) {
    auto w = dmobius_add(t, t.scale_const(x, -1.0), y, c);
    const double n = vec_norm(t, w);
    if (n < kZeroNormTol) return t.constant_scalar(0.0);
    auto arg = t.mul_s(t.sqrt_s(t.dot(w, w)), c.sqrt_c);
    auto d = t.div_s(t.mul_sc(t.artanh_s(arg), 2.0), c.sqrt_c);
    return t.mul_sc(t.mul_s(d, d), -1.0);
}

Tape::Id dneg_euclidean_dist_sq(Tape& t, Tape::Id x, Tape::Id y) {
    auto diff = t.sub(x, y);
    return t.mul_sc(t.dot(diff, diff), -1.0);
}

Tape::Id dmulticlass_log_loss(Tape& t, std::span<const Tape::Id> scores, std::size_t true_index) {
    if (true_index >= scores.size())
        throw std::invalid_argument("dmulticlass_log_loss: true index out of range");
    return t.sub_s(t.log_sum_exp(scores), scores[true_index]);
}

Tape::Id ddura(Tape& t, Tape::Id transformed_tangent, Tape::Id tail_tangent) {
    return t.add_s(t.dot(transformed_tangent, transformed_tangent),
                   t.dot(tail_tangent, tail_tangent));
}

}  // namespace ffhr::tape_ops
