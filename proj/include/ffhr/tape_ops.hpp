#pragma once

#include <span>

#include "ffhr/decoders.hpp"
#include "ffhr/scoring.hpp"
#include "ffhr/tape.hpp"

namespace ffhr::tape_ops {

/// Curvature-derived scalar nodes shared by every composite on a tape.
/// With a fixed curvature they are constants; with a trainable curvature
/// they derive from a leaf through c = exp(log_c), keeping c > 0.
struct CurvNodes {
    Tape::Id c;
    Tape::Id sqrt_c;
    Tape::Id two_c;     // 2c
    Tape::Id c_sq;      // c^2
    Tape::Id two_c_sq;  // 2c^2
    Tape::Id two;       // literal 2
    double c_val;
    double sqrt_c_val;

    static CurvNodes fixed(Tape& t, double c);
    static CurvNodes trainable(Tape& t, Tape::Id log_c_leaf);
};

// Ball composites. Graph shape can depend on forward values (zero-norm and
// degenerate-denominator branches), mirroring the non-differentiable path.
Tape::Id dexp0(Tape& t, Tape::Id v, const CurvNodes& c);
Tape::Id dlog0(Tape& t, Tape::Id y, const CurvNodes& c);
Tape::Id dmobius_add(Tape& t, Tape::Id x, Tape::Id y, const CurvNodes& c);
Tape::Id dmobius_half(Tape& t, Tape::Id z, const CurvNodes& c);  // (1/2) (x) z
Tape::Id dconformal(Tape& t, Tape::Id m, const CurvNodes& c);    // scalar lambda
Tape::Id dgyromidpoint(Tape& t, std::span<const Tape::Id> points,
                       std::span<const Tape::Id> weights, const CurvNodes& c);
Tape::Id dtangent_aggregate(Tape& t, std::span<const Tape::Id> points,
                            std::span<const Tape::Id> weights, const CurvNodes& c);
Tape::Id dactivation(Tape& t, Tape::Id x, double slope, const CurvNodes& c);

/// m = bias_ball (+) R(angles) x.
Tape::Id dfeature_transform(Tape& t, Tape::Id x, Tape::Id angles, Tape::Id bias_ball,
                            const CurvNodes& c);

/// Structured linear action of a relation transform on a tangent vector.
Tape::Id dapply_linear(Tape& t, TransformKind kind, Tape::Id params, Tape::Id u);

// Scoring composites.
Tape::Id dhin_factor(Tape& t, Tape::Id y, const CurvNodes& c);  // 1 + c^2 ||y||^2
Tape::Id dhin(Tape& t, Tape::Id x, Tape::Id x_factor, Tape::Id y, Tape::Id y_factor,
              const CurvNodes& c);
Tape::Id dneg_dist_sq(Tape& t, Tape::Id x, Tape::Id y, const CurvNodes& c);
Tape::Id dneg_euclidean_dist_sq(Tape& t, Tape::Id x, Tape::Id y);

/// -score(true) + logsumexp(scores): the fully multiclass log-loss.
Tape::Id dmulticlass_log_loss(Tape& t, std::span<const Tape::Id> scores, std::size_t true_index);

/// ||u||^2 + ||tail_tangent||^2 for one triple (tangent-space norm penalty).
Tape::Id ddura(Tape& t, Tape::Id transformed_tangent, Tape::Id tail_tangent);

}  // namespace ffhr::tape_ops
