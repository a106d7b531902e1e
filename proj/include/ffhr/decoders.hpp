#pragma once

#include <span>
#include <string>
#include <vector>

#include "ffhr/ball.hpp"
#include "ffhr/linalg.hpp"

namespace ffhr {

/// Structure of the per-relation transformation matrix applied to the head
/// embedding before scoring.
enum class TransformKind {
    diagonal,              // n parameters, diagonal matrix
    block2_rotation_scale, // n parameters, 2x2 blocks [[a,-b],[b,a]]
    block2_general,        // 2n parameters, unconstrained 2x2 blocks
    full,                  // n^2 parameters, unconstrained matrix
};

std::string to_string(TransformKind k);
TransformKind transform_kind_from_string(const std::string& s);

/// Number of free parameters for a transform of the given kind and dimension.
std::size_t transform_param_count(TransformKind kind, std::size_t dim);

/// A structured linear map with its parameter vector. Block kinds require an
/// even dimension.
class RelationTransform {
public:
    RelationTransform(TransformKind kind, std::size_t dim, std::vector<double> params);

    /// Identity transform of the given kind (all-ones diagonal, identity blocks, ...).
    static RelationTransform identity(TransformKind kind, std::size_t dim);

    TransformKind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    std::span<const double> params() const { return params_; }
    std::span<double> params() { return params_; }

    /// Plain linear action on coordinates (used on tangent vectors and by the
    /// Euclidean baseline path).
    void apply_linear(std::span<const double> in, std::span<double> out) const;

    /// Dense equivalent, for cross-checks.
    Matrix as_matrix() const;

private:
    TransformKind kind_;
    std::size_t dim_;
    std::vector<double> params_;
};

/// Mobius action on a ball point: exp0 of the linear action on log0(e_h).
BallPoint apply_transform(const RelationTransform& t, const BallPoint& e_h);

}  // namespace ffhr
