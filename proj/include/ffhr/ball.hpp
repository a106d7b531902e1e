#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ffhr/linalg.hpp"

namespace ffhr {

// Numerical guard rails shared by every ball operation. All math is double
// precision; points are kept strictly inside the ball so conformal factors
// and artanh arguments stay finite.
inline constexpr double kBallMargin = 1e-5;      // boundary margin for project_into_ball
inline constexpr double kArtanhArgMax = 1.0 - 1e-12;
inline constexpr double kTanhArgMax = 40.0;
inline constexpr double kZeroNormTol = 1e-15;
inline constexpr double kDegenerateDenom = 1e-12;

/// tanh with argument clamped to [-kTanhArgMax, kTanhArgMax].
double safe_tanh(double t);
/// artanh with argument clamped to [-kArtanhArgMax, kArtanhArgMax].
double safe_artanh(double t);

/// Positive curvature magnitude c of a ball with sectional curvature -c.
/// The ball radius is 1/sqrt(c).
class Curvature {
public:
    explicit Curvature(double c);

    double c() const { return c_; }
    double sqrt_c() const { return sqrt_c_; }
    double radius() const { return 1.0 / sqrt_c_; }

    friend bool operator==(const Curvature& a, const Curvature& b) { return a.c_ == b.c_; }
    friend bool operator!=(const Curvature& a, const Curvature& b) { return !(a == b); }

private:
    double c_;
    double sqrt_c_;
};

/// A point strictly inside the ball of curvature -c. Construction validates
/// containment; all operations below preserve it.
class BallPoint {
public:
    BallPoint(std::vector<double> coords, Curvature curv);

    static BallPoint origin(std::size_t dim, Curvature curv);

    std::span<const double> coords() const { return coords_; }
    const Curvature& curvature() const { return curv_; }
    std::size_t dim() const { return coords_.size(); }

    double sq_norm() const;
    double norm() const;
    bool is_origin() const;

    BallPoint negated() const;

private:
    std::vector<double> coords_;
    Curvature curv_;
};

/// Tangent vector; base absent means the tangent space at the origin.
struct TangentVector {
    std::vector<double> coords;
    std::optional<BallPoint> base;

    static TangentVector at_origin(std::vector<double> c) { return {std::move(c), std::nullopt}; }
    std::size_t dim() const { return coords.size(); }
};

/// Conformal factor lambda_x = 2 / (1 - c * ||x||^2). Equals 2 at the origin.
double conformal_factor(const BallPoint& x);

/// Mobius addition x (+)_c y. Non-commutative, non-associative; exact formula,
/// never clamped (containment holds analytically for in-ball inputs).
BallPoint mobius_add(const BallPoint& x, const BallPoint& y);

/// Mobius scalar multiplication r (x)_c x = (1/sqrt c) tanh(r artanh(sqrt c ||x||)) x/||x||.
BallPoint mobius_scalar_mul(double r, const BallPoint& x);

/// Exponential map at the origin. exp0(0) = origin.
BallPoint exp0(const TangentVector& v, Curvature curv);
/// Logarithmic map at the origin; inverse of exp0.
TangentVector log0(const BallPoint& y);

/// Exponential map at base point x; exp_at(x, 0) = x.
BallPoint exp_at(const BallPoint& x, const TangentVector& v);
/// Logarithmic map at base point x; inverse of exp_at.
TangentVector log_at(const BallPoint& x, const BallPoint& y);

/// Mobius matrix-vector multiplication M (x)_c x = exp0(M log0(x)).
BallPoint mobius_matvec(const Matrix& m, const BallPoint& x);

/// Geodesic distance d(x, y) = (2/sqrt c) artanh(sqrt c ||-x (+) y||).
double distance(const BallPoint& x, const BallPoint& y);

/// Gyration gyr[u,v]w = -(u (+) v) (+) (u (+) (v (+) w)). Norm preserving.
BallPoint gyration(const BallPoint& u, const BallPoint& v, const BallPoint& w);

/// Counters for the boundary clamp; tests assert it never fires on healthy input.
struct ProjectionStats {
    std::int64_t calls = 0;
    std::int64_t clamped = 0;
};

/// Rescales a raw vector onto norm (1 - kBallMargin)/sqrt(c) if it lies on or
/// outside that shell; otherwise passes it through unchanged.
BallPoint project_into_ball(std::span<const double> raw, Curvature curv, ProjectionStats* stats = nullptr);

// Raw kernels used by the hot paths (no validation, caller guarantees
// in-ball inputs of equal dimension).
namespace raw {

double conformal_factor(std::span<const double> x, double c);
void mobius_add(std::span<const double> x, std::span<const double> y, double c, std::span<double> out);
void mobius_scalar_mul(double r, std::span<const double> x, double c, std::span<double> out);
void exp0(std::span<const double> v, double c, std::span<double> out);
void log0(std::span<const double> y, double c, std::span<double> out);
double distance(std::span<const double> x, std::span<const double> y, double c);

}  // namespace raw

}  // namespace ffhr
