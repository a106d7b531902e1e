#include "ffhr/scoring.hpp"

#include <cmath>
#include <stdexcept>

namespace ffhr {

std::string to_string(ScoreKind k) {
    switch (k) {
        case ScoreKind::hin: return "hin";
        case ScoreKind::euclidean_inner: return "euclidean_inner";
        case ScoreKind::hyperbolic_distance: return "hyperbolic_distance";
        case ScoreKind::euclidean_distance: return "euclidean_distance";
        case ScoreKind::tangent_inner: return "tangent_inner";
    }
    throw std::invalid_argument("to_string: bad ScoreKind");
}

ScoreKind score_kind_from_string(const std::string& s) {
    if (s == "hin") return ScoreKind::hin;
    if (s == "euclidean_inner") return ScoreKind::euclidean_inner;
    if (s == "hyperbolic_distance") return ScoreKind::hyperbolic_distance;
    if (s == "euclidean_distance") return ScoreKind::euclidean_distance;
    if (s == "tangent_inner") return ScoreKind::tangent_inner;
    throw std::invalid_argument("unknown score kind: " + s);
}

bool is_hyperbolic(ScoreKind k) {
    return k == ScoreKind::hin || k == ScoreKind::hyperbolic_distance || k == ScoreKind::tangent_inner;
}

namespace raw {

double hin(std::span<const double> x, std::span<const double> y, double c) {
    const double xx = sq_norm(x);
    const double yy = sq_norm(y);
    if (xx < kZeroNormTol * kZeroNormTol || yy < kZeroNormTol * kZeroNormTol) return 0.0;
    const double xy = dot(x, y);
    const double c2 = c * c;
    const double denom = (1.0 + c2 * xx) * (1.0 + c2 * yy) - 2.0 * c2 * xy;
    return xy / denom;
}

}  // namespace raw

namespace {

void require_same_ball(const BallPoint& a, const BallPoint& b, const char* op) {
    if (a.dim() != b.dim()) throw std::invalid_argument(std::string(op) + ": dimension mismatch");
    if (a.curvature() != b.curvature()) throw std::invalid_argument(std::string(op) + ": curvature mismatch");
}

double neg_sq_euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return -s;
}

}  // namespace

double hin(const BallPoint& x, const BallPoint& y) {
    require_same_ball(x, y, "hin");
    return raw::hin(x.coords(), y.coords(), x.curvature().c());
}

double tangent_inner(const BallPoint& x, const BallPoint& y) {
    require_same_ball(x, y, "tangent_inner");
    return dot(log0(x).coords, log0(y).coords);
}

double score_pair(const BallPoint& x, const BallPoint& y, ScoreKind kind) {
    switch (kind) {
        case ScoreKind::hin: return hin(x, y);
        case ScoreKind::euclidean_inner: return dot(x.coords(), y.coords());
        case ScoreKind::hyperbolic_distance: {
            const double d = distance(x, y);
            return -d * d;
        }
        case ScoreKind::euclidean_distance: return neg_sq_euclidean_distance(x.coords(), y.coords());
        case ScoreKind::tangent_inner: return tangent_inner(x, y);
    }
    throw std::invalid_argument("score_pair: bad ScoreKind");
}

double score_triple(const BallPoint& e_h, const RelationTransform& m_r, const BallPoint& e_t,
                    ScoreKind kind) {
    require_same_ball(e_h, e_t, "score_triple");
    if (is_hyperbolic(kind)) return score_pair(apply_transform(m_r, e_h), e_t, kind);
    std::vector<double> moved(e_h.dim());
    m_r.apply_linear(e_h.coords(), moved);
    if (kind == ScoreKind::euclidean_inner) return dot(moved, e_t.coords());
    return neg_sq_euclidean_distance(moved, e_t.coords());
}

}  // namespace ffhr
