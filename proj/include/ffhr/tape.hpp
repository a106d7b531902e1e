#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ffhr {

/// Reverse-mode differentiation tape. Nodes are vectors (scalars are length-1
/// vectors); forward values are computed eagerly when a node is created, so
/// graph construction can branch on freshly computed values. One backward()
/// sweep per recording; reset() reclaims storage without freeing capacity.
///
/// Subgradient conventions: LeakyReLU at 0 takes the negative-branch slope;
/// tanh/artanh/exp clamp their argument and differentiate the clamped
/// expression; the ball projection is a stop-gradient where it rescales.
class Tape {
public:
    using Id = std::uint32_t;

    // sources
    Id leaf(std::span<const double> values);
    Id leaf_scalar(double value);
    Id constant(std::span<const double> values);
    Id constant_scalar(double value);

    // vector primitives
    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id mul(Id a, Id b);                  // elementwise
    Id scale(Id v, Id s);                // vector * scalar node
    Id scale_const(Id v, double k);
    Id div_by(Id v, Id s);               // vector / scalar node
    Id matvec(Id w, Id x);               // w holds rows*cols entries row-major
    Id block_rotation(Id angles, Id x);  // 2x2 rotation blocks from angles
    Id rot_scale_blocks(Id params, Id x);// 2x2 blocks [[a,-b],[b,a]]
    Id general_blocks(Id params, Id x);  // 2x2 blocks, 4 params each
    Id leaky_relu(Id x, double slope);
    Id project(Id x, double c);          // ball boundary clamp, stop-grad when it fires

    // scalar primitives
    Id dot(Id a, Id b);
    Id add_s(Id a, Id b);
    Id sub_s(Id a, Id b);
    Id mul_s(Id a, Id b);
    Id div_s(Id a, Id b);
    Id mul_sc(Id a, double k);
    Id add_sc(Id a, double k);
    Id abs_s(Id a);
    Id sqrt_s(Id a);
    Id tanh_s(Id a);
    Id artanh_s(Id a);
    Id exp_s(Id a);
    Id leaky_relu_s(Id a, double slope);
    Id log_sum_exp(std::span<const Id> scores);

    std::span<const double> value(Id id) const;
    double value_scalar(Id id) const;
    std::span<const double> grad(Id id) const;
    double grad_scalar(Id id) const;
    std::size_t size(Id id) const;

    /// Seeds d(output) = 1 and sweeps the whole tape once. Throws if output
    /// is not scalar or backward already ran since the last reset.
    void backward(Id output);

    void reset();
    std::size_t num_nodes() const { return nodes_.size(); }

    std::int64_t projection_calls() const { return proj_calls_; }
    std::int64_t projection_clamps() const { return proj_clamps_; }

private:
    enum class Op : std::uint8_t {
        leaf, constant,
        add_vv, sub_vv, mul_vv, scale_vs, scale_vc, div_vs,
        matvec_op, block_rot, rot_scale_mv, block2_mv, leaky_relu_v, ball_project,
        dot_op,
        add_ss, sub_ss, mul_ss, div_ss, mul_sc_op, add_sc_op,
        abs_op, sqrt_op, tanh_op, artanh_op, exp_op, leaky_relu_op,
        lse_op,
    };

    struct Node {
        Op op;
        Id a = 0;
        Id b = 0;
        std::uint32_t off = 0;
        std::uint32_t len = 0;
        std::uint32_t aux = 0;  // index into saved_ or args_, op-specific
    };

    Id alloc(Op op, std::uint32_t len, Id a = 0, Id b = 0, std::uint32_t aux = 0);
    std::span<double> vals(Id id);
    std::span<const double> vals(Id id) const;
    std::span<double> adj(Id id);
    void check(Id id) const;
    void check_scalar(Id id) const;
    Id binary_elementwise(Op op, Id a, Id b);
    Id scalar_binary(Op op, Id a, Id b);
    Id scalar_unary(Op op, Id a, std::uint32_t aux = 0);

    void backward_node(std::uint32_t i);

    std::vector<Node> nodes_;
    std::vector<double> val_;
    std::vector<double> adj_;
    std::vector<double> saved_;   // op constants and flags
    std::vector<Id> args_;        // variadic argument pool (count, then ids)
    bool swept_ = false;
    std::int64_t proj_calls_ = 0;
    std::int64_t proj_clamps_ = 0;
};

}  // namespace ffhr
