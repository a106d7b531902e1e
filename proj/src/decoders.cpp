#include "ffhr/decoders.hpp"

#include <stdexcept>

namespace ffhr {

std::string to_string(TransformKind k) {
    switch (k) {
        case TransformKind::diagonal: return "diagonal";
        case TransformKind::block2_rotation_scale: return "block2_rotation_scale";
        case TransformKind::block2_general: return "block2_general";
        case TransformKind::full: return "full";
    }
    throw std::invalid_argument("to_string: bad TransformKind");
}

TransformKind transform_kind_from_string(const std::string& s) {
    if (s == "diagonal") return TransformKind::diagonal;
    if (s == "block2_rotation_scale") return TransformKind::block2_rotation_scale;
    if (s == "block2_general") return TransformKind::block2_general;
    if (s == "full") return TransformKind::full;
    throw std::invalid_argument("unknown transform kind: " + s);
}

std::size_t transform_param_count(TransformKind kind, std::size_t dim) {
    switch (kind) {
        case TransformKind::diagonal: return dim;
        case TransformKind::block2_rotation_scale: return dim;
        case TransformKind::block2_general: return 2 * dim;
        case TransformKind::full: return dim * dim;
    }
    throw std::invalid_argument("transform_param_count: bad TransformKind");
}

RelationTransform::RelationTransform(TransformKind kind, std::size_t dim, std::vector<double> params)
    : kind_(kind), dim_(dim), params_(std::move(params)) {
    if (dim == 0) throw std::invalid_argument("RelationTransform: zero dimension");
    const bool blocked = kind == TransformKind::block2_rotation_scale || kind == TransformKind::block2_general;
    if (blocked && dim % 2 != 0) throw std::invalid_argument("RelationTransform: block kinds need even dimension");
    if (params_.size() != transform_param_count(kind, dim))
        throw std::invalid_argument("RelationTransform: wrong parameter count");
}

RelationTransform RelationTransform::identity(TransformKind kind, std::size_t dim) {
    std::vector<double> p(transform_param_count(kind, dim), 0.0);
    switch (kind) {
        case TransformKind::diagonal:
            std::fill(p.begin(), p.end(), 1.0);
            break;
        case TransformKind::block2_rotation_scale:
            for (std::size_t k = 0; k < dim / 2; ++k) p[2 * k] = 1.0;  // (a,b) = (1,0)
            break;
        case TransformKind::block2_general:
            for (std::size_t k = 0; k < dim / 2; ++k) {
                p[4 * k] = 1.0;
                p[4 * k + 3] = 1.0;
            }
            break;
        case TransformKind::full:
            for (std::size_t i = 0; i < dim; ++i) p[i * dim + i] = 1.0;
            break;
    }
    return RelationTransform(kind, dim, std::move(p));
}

void RelationTransform::apply_linear(std::span<const double> in, std::span<double> out) const {
    if (in.size() != dim_ || out.size() != dim_) throw std::invalid_argument("apply_linear: dimension mismatch");
    switch (kind_) {
        case TransformKind::diagonal:
            for (std::size_t i = 0; i < dim_; ++i) out[i] = params_[i] * in[i];
            return;
        case TransformKind::block2_rotation_scale:
            for (std::size_t k = 0; k < dim_ / 2; ++k) {
                const double a = params_[2 * k], b = params_[2 * k + 1];
                const double x0 = in[2 * k], x1 = in[2 * k + 1];
                out[2 * k] = a * x0 - b * x1;
                out[2 * k + 1] = b * x0 + a * x1;
            }
            return;
        case TransformKind::block2_general:
            for (std::size_t k = 0; k < dim_ / 2; ++k) {
                const double* p = params_.data() + 4 * k;
                const double x0 = in[2 * k], x1 = in[2 * k + 1];
                out[2 * k] = p[0] * x0 + p[1] * x1;
                out[2 * k + 1] = p[2] * x0 + p[3] * x1;
            }
            return;
        case TransformKind::full:
            for (std::size_t i = 0; i < dim_; ++i) {
                double s = 0.0;
                const double* row = params_.data() + i * dim_;
                for (std::size_t j = 0; j < dim_; ++j) s += row[j] * in[j];
                out[i] = s;
            }
            return;
    }
    throw std::invalid_argument("apply_linear: bad TransformKind");
}

Matrix RelationTransform::as_matrix() const {
    Matrix m(dim_, dim_);
    switch (kind_) {
        case TransformKind::diagonal:
            for (std::size_t i = 0; i < dim_; ++i) m.at(i, i) = params_[i];
            break;
        case TransformKind::block2_rotation_scale:
            for (std::size_t k = 0; k < dim_ / 2; ++k) {
                const double a = params_[2 * k], b = params_[2 * k + 1];
                m.at(2 * k, 2 * k) = a;
                m.at(2 * k, 2 * k + 1) = -b;
                m.at(2 * k + 1, 2 * k) = b;
                m.at(2 * k + 1, 2 * k + 1) = a;
            }
            break;
        case TransformKind::block2_general:
            for (std::size_t k = 0; k < dim_ / 2; ++k) {
                const double* p = params_.data() + 4 * k;
                m.at(2 * k, 2 * k) = p[0];
                m.at(2 * k, 2 * k + 1) = p[1];
                m.at(2 * k + 1, 2 * k) = p[2];
                m.at(2 * k + 1, 2 * k + 1) = p[3];
            }
            break;
        case TransformKind::full:
            m.data = params_;
            break;
    }
    return m;
}

BallPoint apply_transform(const RelationTransform& t, const BallPoint& e_h) {
    if (t.dim() != e_h.dim()) throw std::invalid_argument("apply_transform: dimension mismatch");
    TangentVector v = log0(e_h);
    std::vector<double> out(t.dim());
    t.apply_linear(v.coords, out);
    return exp0(TangentVector::at_origin(std::move(out)), e_h.curvature());
}

}  // namespace ffhr
