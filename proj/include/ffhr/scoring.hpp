#pragma once

#include <string>

#include "ffhr/ball.hpp"
#include "ffhr/decoders.hpp"

namespace ffhr {

/// Similarity between a (transformed) head and a tail representation.
enum class ScoreKind {
    hin,                 // hyperbolic inner product
    euclidean_inner,     // plain dot product on raw coordinates
    hyperbolic_distance, // negated squared geodesic distance
    euclidean_distance,  // negated squared Euclidean distance
    tangent_inner,       // dot product of origin-logarithms
};

std::string to_string(ScoreKind k);
ScoreKind score_kind_from_string(const std::string& s);
bool is_hyperbolic(ScoreKind k);

/// Hyperbolic inner product
///   Gamma = <x,y> / ((1 + c^2 ||x||^2)(1 + c^2 ||y||^2) - 2 c^2 <x,y>).
/// Returns 0 when either point is numerically at the origin. The denominator
/// is provably positive for in-ball points.
double hin(const BallPoint& x, const BallPoint& y);

/// <log0(x), log0(y)>: the tangent-space approximation of an inner product.
double tangent_inner(const BallPoint& x, const BallPoint& y);

/// Score of a candidate pair under the chosen similarity. Hyperbolic kinds
/// read the points as ball points; Euclidean kinds read raw coordinates.
double score_pair(const BallPoint& x, const BallPoint& y, ScoreKind kind);

/// s(h, r, t): transform the head by the relation (Mobius action for
/// hyperbolic kinds, plain linear action for Euclidean kinds), then score
/// against the tail.
double score_triple(const BallPoint& e_h, const RelationTransform& m_r, const BallPoint& e_t,
                    ScoreKind kind);

namespace raw {

double hin(std::span<const double> x, std::span<const double> y, double c);

}  // namespace raw

}  // namespace ffhr
