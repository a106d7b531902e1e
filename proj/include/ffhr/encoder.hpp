#pragma once

#include <span>
#include <string>
#include <vector>

#include "ffhr/ball.hpp"
#include "ffhr/data.hpp"
#include "ffhr/linalg.hpp"

namespace ffhr {

enum class Space { hyperbolic, euclidean };

std::string to_string(Space s);
Space space_from_string(const std::string& s);

/// Which message-passing modules the encoder uses: the fully-in-ball variant
/// (rotation transform + gyromidpoint) or the tangent-space approximation
/// (general Mobius matvec + exp0/log0 averaging).
enum class EncoderImpl { fpm, hgcn_tangent };

std::string to_string(EncoderImpl i);
EncoderImpl encoder_impl_from_string(const std::string& s);

struct EncoderConfig {
    int num_layers = 1;             // {1, 2}
    int num_heads = 1;              // {1, 2, 4, 8}
    double activation_slope = 0.01; // LeakyReLU negative slope, in (0, 1)
    Space space = Space::hyperbolic;
    EncoderImpl impl = EncoderImpl::fpm;
    bool self_loops = true;

    void validate() const;
};

/// Per-layer parameters. Relation-indexed arrays cover the augmented relation
/// set plus one trailing self-relation slot (index = number of relations).
/// The fpm implementation uses rotation_angles + bias_raw; the hgcn_tangent
/// ablation uses general_w. Attention vectors are per head, shared across
/// relations.
struct GcnLayerParams {
    std::vector<std::vector<double>> rotation_angles; // [R+1][n/2]
    std::vector<std::vector<double>> bias_raw;        // [R+1][n] tangent coords (ball bias = exp0)
    std::vector<Matrix> general_w;                    // [R+1] n x n
    std::vector<std::vector<double>> attn_head;       // [K][n]
    std::vector<std::vector<double>> attn_tail;       // [K][n]
};

/// Block-diagonal rotation with 2x2 blocks [[cos t, -sin t], [sin t, cos t]];
/// the matrix acts on dimension 2 * angles.size().
Matrix build_rotation(std::span<const double> angles);

/// In-place-free structured product: out = R(angles) * in.
void apply_block_rotation(std::span<const double> angles, std::span<const double> in,
                          std::span<double> out);

double leaky_relu(double z, double slope);

/// Message m = b (+) R(angles) x. Orthogonality of R makes this an isometry.
BallPoint feature_transform(const BallPoint& x, std::span<const double> angles, const BallPoint& b);

/// Raw attention weight LeakyReLU(a_h . m_self + a_t . m_msg) per message.
std::vector<double> attention_weights(std::span<const double> self_msg,
                                      const std::vector<std::vector<double>>& msgs,
                                      std::span<const double> a_h, std::span<const double> a_t,
                                      double slope);

/// Hyperbolic weighted centroid
///   (1/2) (x) ( sum v lambda m / sum |v| (lambda - 1) ).
/// Falls back to uniform weights when the denominator is degenerate.
BallPoint gyromidpoint(const std::vector<BallPoint>& points, std::span<const double> weights);

/// Equal-weight gyromidpoint over the per-head outputs.
BallPoint multi_head_combine(const std::vector<BallPoint>& head_outputs);

/// (1/sqrt c) LeakyReLU(sqrt c x), coordinatewise; contracts toward the
/// nonnegative orthant, never leaves the ball.
BallPoint hyperbolic_activation(const BallPoint& x, double slope);

/// m = W (x) x via the tangent space at the origin.
BallPoint hgcn_feature_transform(const BallPoint& x, const Matrix& w);

/// exp0( sum v log0(m) / sum v ); uniform fallback on degenerate sum.
BallPoint hgcn_aggregate(const std::vector<BallPoint>& messages, std::span<const double> weights);

/// Full multi-layer forward pass. `table` holds one row of model coordinates
/// per entity (ball coordinates in hyperbolic space, plain vectors in
/// Euclidean space). Every produced hyperbolic point passes through the
/// boundary projection, counted in `stats`.
Matrix encoder_forward(const Matrix& table, const Adjacency& adj,
                       std::span<const GcnLayerParams> layers, const EncoderConfig& cfg,
                       Curvature curv, ProjectionStats* stats = nullptr);

namespace raw {

/// Projection helper for the hot path: rescales in place if on/outside the
/// margin shell, returns whether it clamped.
bool project_into_ball(std::span<double> x, double c);

void gyromidpoint(const std::vector<std::vector<double>>& points, std::span<const double> weights,
                  double c, std::span<double> out);

void hyperbolic_activation(std::span<const double> x, double slope, double c, std::span<double> out);

}  // namespace raw

}  // namespace ffhr
