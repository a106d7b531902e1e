#include "ffhr/ball.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ffhr {

double safe_tanh(double t) {
    return std::tanh(std::clamp(t, -kTanhArgMax, kTanhArgMax));
}

double safe_artanh(double t) {
    return std::atanh(std::clamp(t, -kArtanhArgMax, kArtanhArgMax));
}

Curvature::Curvature(double c) : c_(c), sqrt_c_(std::sqrt(c)) {
    if (!std::isfinite(c) || c <= 0.0) throw std::invalid_argument("Curvature: c must be finite and > 0");
}

BallPoint::BallPoint(std::vector<double> coords, Curvature curv)
    : coords_(std::move(coords)), curv_(curv) {
    double s = 0.0;
    for (double v : coords_) {
        if (!std::isfinite(v)) throw std::invalid_argument("BallPoint: non-finite coordinate");
        s += v * v;
    }
    if (curv_.c() * s >= 1.0) throw std::invalid_argument("BallPoint: point not strictly inside ball");
}

BallPoint BallPoint::origin(std::size_t dim, Curvature curv) {
    return BallPoint(std::vector<double>(dim, 0.0), curv);
}

double BallPoint::sq_norm() const { return ffhr::sq_norm(coords_); }

double BallPoint::norm() const { return std::sqrt(sq_norm()); }

bool BallPoint::is_origin() const { return norm() < kZeroNormTol; }

BallPoint BallPoint::negated() const {
    std::vector<double> n(coords_.size());
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = -coords_[i];
    return BallPoint(std::move(n), curv_);
}

namespace raw {

double conformal_factor(std::span<const double> x, double c) {
    return 2.0 / (1.0 - c * sq_norm(x));
}

void mobius_add(std::span<const double> x, std::span<const double> y, double c, std::span<double> out) {
    const double xy = dot(x, y);
    const double xx = sq_norm(x);
    const double yy = sq_norm(y);
    const double denom = 1.0 + 2.0 * c * xy + c * c * xx * yy;
    const double ax = (1.0 + 2.0 * c * xy + c * yy) / denom;
    const double ay = (1.0 - c * xx) / denom;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ax * x[i] + ay * y[i];
}

void mobius_scalar_mul(double r, std::span<const double> x, double c, std::span<double> out) {
    const double n = std::sqrt(sq_norm(x));
    if (n < kZeroNormTol) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double sc = std::sqrt(c);
    const double f = safe_tanh(r * safe_artanh(sc * n)) / (sc * n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f * x[i];
}

void exp0(std::span<const double> v, double c, std::span<double> out) {
    const double n = std::sqrt(sq_norm(v));
    const double sc = std::sqrt(c);
    if (sc * n < 1e-8) {
        // tanh(t)/t -> 1; passing v through keeps the map smooth at 0.
        std::copy(v.begin(), v.end(), out.begin());
        return;
    }
    const double f = std::min(safe_tanh(sc * n), kArtanhArgMax) / (sc * n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f * v[i];
}

void log0(std::span<const double> y, double c, std::span<double> out) {
    const double n = std::sqrt(sq_norm(y));
    const double sc = std::sqrt(c);
    if (sc * n < 1e-8) {
        std::copy(y.begin(), y.end(), out.begin());
        return;
    }
    const double f = safe_artanh(sc * n) / (sc * n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f * y[i];
}

double distance(std::span<const double> x, std::span<const double> y, double c) {
    std::vector<double> nx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) nx[i] = -x[i];
    std::vector<double> d(x.size());
    mobius_add(nx, y, c, d);
    const double sc = std::sqrt(c);
    return 2.0 / sc * safe_artanh(sc * std::sqrt(sq_norm(d)));
}

}  // namespace raw

namespace {

void require_same_ball(const BallPoint& a, const BallPoint& b, const char* op) {
    if (a.dim() != b.dim()) throw std::invalid_argument(std::string(op) + ": dimension mismatch");
    if (a.curvature() != b.curvature()) throw std::invalid_argument(std::string(op) + ": curvature mismatch");
}

}  // namespace

double conformal_factor(const BallPoint& x) {
    return raw::conformal_factor(x.coords(), x.curvature().c());
}

BallPoint mobius_add(const BallPoint& x, const BallPoint& y) {
    require_same_ball(x, y, "mobius_add");
    std::vector<double> out(x.dim());
    raw::mobius_add(x.coords(), y.coords(), x.curvature().c(), out);
    return BallPoint(std::move(out), x.curvature());
}

BallPoint mobius_scalar_mul(double r, const BallPoint& x) {
    if (!std::isfinite(r)) throw std::invalid_argument("mobius_scalar_mul: non-finite scalar");
    std::vector<double> out(x.dim());
    raw::mobius_scalar_mul(r, x.coords(), x.curvature().c(), out);
    return BallPoint(std::move(out), x.curvature());
}

BallPoint exp0(const TangentVector& v, Curvature curv) {
    if (v.base && !v.base->is_origin()) throw std::invalid_argument("exp0: tangent vector not based at origin");
    std::vector<double> out(v.dim());
    raw::exp0(v.coords, curv.c(), out);
    return BallPoint(std::move(out), curv);
}

TangentVector log0(const BallPoint& y) {
    std::vector<double> out(y.dim());
    raw::log0(y.coords(), y.curvature().c(), out);
    return TangentVector::at_origin(std::move(out));
}

BallPoint exp_at(const BallPoint& x, const TangentVector& v) {
    if (v.dim() != x.dim()) throw std::invalid_argument("exp_at: dimension mismatch");
    const double c = x.curvature().c();
    const double sc = x.curvature().sqrt_c();
    const double n = std::sqrt(sq_norm(v.coords));
    if (n < kZeroNormTol) return x;
    const double lam = conformal_factor(x);
    const double f = std::min(safe_tanh(sc * lam * n / 2.0), kArtanhArgMax) / (sc * n);
    std::vector<double> scaled(v.dim());
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = f * v.coords[i];
    std::vector<double> out(x.dim());
    raw::mobius_add(x.coords(), scaled, c, out);
    return BallPoint(std::move(out), x.curvature());
}

TangentVector log_at(const BallPoint& x, const BallPoint& y) {
    require_same_ball(x, y, "log_at");
    const double c = x.curvature().c();
    const double sc = x.curvature().sqrt_c();
    std::vector<double> w(x.dim());
    raw::mobius_add(x.negated().coords(), y.coords(), c, w);
    const double n = std::sqrt(sq_norm(w));
    if (n < kZeroNormTol) return {std::vector<double>(x.dim(), 0.0), x};
    const double lam = conformal_factor(x);
    const double f = 2.0 / (sc * lam) * safe_artanh(sc * n) / n;
    for (double& v : w) v *= f;
    return {std::move(w), x};
}

BallPoint mobius_matvec(const Matrix& m, const BallPoint& x) {
    if (m.cols != x.dim()) throw std::invalid_argument("mobius_matvec: dimension mismatch");
    TangentVector t = log0(x);
    std::vector<double> mt = matvec(m, t.coords);
    return exp0(TangentVector::at_origin(std::move(mt)), x.curvature());
}

double distance(const BallPoint& x, const BallPoint& y) {
    require_same_ball(x, y, "distance");
    return raw::distance(x.coords(), y.coords(), x.curvature().c());
}

BallPoint gyration(const BallPoint& u, const BallPoint& v, const BallPoint& w) {
    require_same_ball(u, v, "gyration");
    require_same_ball(u, w, "gyration");
    BallPoint vw = mobius_add(v, w);
    BallPoint uvw = mobius_add(u, vw);
    BallPoint uv = mobius_add(u, v);
    return mobius_add(uv.negated(), uvw);
}

BallPoint project_into_ball(std::span<const double> raw_coords, Curvature curv, ProjectionStats* stats) {
    if (stats) ++stats->calls;
    double s = 0.0;
    for (double v : raw_coords) {
        if (!std::isfinite(v)) throw std::invalid_argument("project_into_ball: non-finite coordinate");
        s += v * v;
    }
    const double max_norm = (1.0 - kBallMargin) * curv.radius();
    const double n = std::sqrt(s);
    std::vector<double> out(raw_coords.begin(), raw_coords.end());
    if (n >= max_norm) {
        if (stats) ++stats->clamped;
        const double f = max_norm / n;
        for (double& v : out) v *= f;
    }
    return BallPoint(std::move(out), curv);
}

}  // namespace ffhr
