#include "ffhr/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ffhr/ball.hpp"

namespace ffhr {

void Tape::check(Id id) const {
    if (id >= nodes_.size()) throw std::invalid_argument("Tape: node id out of range");
}

void Tape::check_scalar(Id id) const {
    check(id);
    if (nodes_[id].len != 1) throw std::invalid_argument("Tape: expected scalar node");
}

Tape::Id Tape::alloc(Op op, std::uint32_t len, Id a, Id b, std::uint32_t aux) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.off = static_cast<std::uint32_t>(val_.size());
    n.len = len;
    n.aux = aux;
    val_.resize(val_.size() + len);
    nodes_.push_back(n);
    return static_cast<Id>(nodes_.size() - 1);
}

std::span<double> Tape::vals(Id id) { return {val_.data() + nodes_[id].off, nodes_[id].len}; }
std::span<const double> Tape::vals(Id id) const { return {val_.data() + nodes_[id].off, nodes_[id].len}; }
std::span<double> Tape::adj(Id id) { return {adj_.data() + nodes_[id].off, nodes_[id].len}; }

std::span<const double> Tape::value(Id id) const {
    check(id);
    return vals(id);
}

double Tape::value_scalar(Id id) const {
    check_scalar(id);
    return val_[nodes_[id].off];
}

std::span<const double> Tape::grad(Id id) const {
    check(id);
    if (adj_.size() != val_.size()) throw std::logic_error("Tape: backward has not run");
    return {adj_.data() + nodes_[id].off, nodes_[id].len};
}

double Tape::grad_scalar(Id id) const {
    check_scalar(id);
    return grad(id)[0];
}

std::size_t Tape::size(Id id) const {
    check(id);
    return nodes_[id].len;
}

Tape::Id Tape::leaf(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("Tape: empty leaf");
    Id id = alloc(Op::leaf, static_cast<std::uint32_t>(values.size()));
    std::copy(values.begin(), values.end(), vals(id).begin());
    return id;
}

Tape::Id Tape::leaf_scalar(double value) { return leaf(std::span<const double>(&value, 1)); }

Tape::Id Tape::constant(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("Tape: empty constant");
    Id id = alloc(Op::constant, static_cast<std::uint32_t>(values.size()));
    std::copy(values.begin(), values.end(), vals(id).begin());
    return id;
}

Tape::Id Tape::constant_scalar(double value) { return constant(std::span<const double>(&value, 1)); }

Tape::Id Tape::binary_elementwise(Op op, Id a, Id b) {
    check(a);
    check(b);
    if (nodes_[a].len != nodes_[b].len) throw std::invalid_argument("Tape: length mismatch");
    Id id = alloc(op, nodes_[a].len, a, b);
    auto out = vals(id);
    auto va = vals(a);
    auto vb = vals(b);
    switch (op) {
        case Op::add_vv:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] + vb[i];
            break;
        case Op::sub_vv:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] - vb[i];
            break;
        case Op::mul_vv:
            for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
            break;
        default: throw std::logic_error("Tape: bad elementwise op");
    }
    return id;
}

Tape::Id Tape::add(Id a, Id b) { return binary_elementwise(Op::add_vv, a, b); }
Tape::Id Tape::sub(Id a, Id b) { return binary_elementwise(Op::sub_vv, a, b); }
Tape::Id Tape::mul(Id a, Id b) { return binary_elementwise(Op::mul_vv, a, b); }

Tape::Id Tape::scale(Id v, Id s) {
    check(v);
    check_scalar(s);
    Id id = alloc(Op::scale_vs, nodes_[v].len, v, s);
    const double k = val_[nodes_[s].off];
    auto out = vals(id);
    auto vv = vals(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = k * vv[i];
    return id;
}

Tape::Id Tape::scale_const(Id v, double k) {
    check(v);
    const auto aux = static_cast<std::uint32_t>(saved_.size());
    saved_.push_back(k);
    Id id = alloc(Op::scale_vc, nodes_[v].len, v, 0, aux);
    auto out = vals(id);
    auto vv = vals(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = k * vv[i];
    return id;
}

Tape::Id Tape::div_by(Id v, Id s) {
    check(v);
    check_scalar(s);
    Id id = alloc(Op::div_vs, nodes_[v].len, v, s);
    const double k = val_[nodes_[s].off];
    auto out = vals(id);
    auto vv = vals(v);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = vv[i] / k;
    return id;
}

Tape::Id Tape::matvec(Id w, Id x) {
    check(w);
    check(x);
    const std::uint32_t cols = nodes_[x].len;
    if (cols == 0 || nodes_[w].len % cols != 0)
        throw std::invalid_argument("Tape: matvec shape mismatch");
    const std::uint32_t rows = nodes_[w].len / cols;
    Id id = alloc(Op::matvec_op, rows, w, x);
    auto out = vals(id);
    auto vw = vals(w);
    auto vx = vals(x);
    for (std::uint32_t i = 0; i < rows; ++i) {
        double s = 0.0;
        const double* row = vw.data() + static_cast<std::size_t>(i) * cols;
        for (std::uint32_t j = 0; j < cols; ++j) s += row[j] * vx[j];
        out[i] = s;
    }
    return id;
}

Tape::Id Tape::block_rotation(Id angles, Id x) {
    check(angles);
    check(x);
    if (nodes_[x].len != 2 * nodes_[angles].len)
        throw std::invalid_argument("Tape: block_rotation shape mismatch");
    Id id = alloc(Op::block_rot, nodes_[x].len, angles, x);
    auto out = vals(id);
    auto va = vals(angles);
    auto vx = vals(x);
    for (std::size_t k = 0; k < va.size(); ++k) {
        const double co = std::cos(va[k]);
        const double si = std::sin(va[k]);
        out[2 * k] = co * vx[2 * k] - si * vx[2 * k + 1];
        out[2 * k + 1] = si * vx[2 * k] + co * vx[2 * k + 1];
    }
    return id;
}

Tape::Id Tape::rot_scale_blocks(Id params, Id x) {
    check(params);
    check(x);
    if (nodes_[x].len != nodes_[params].len || nodes_[x].len % 2 != 0)
        throw std::invalid_argument("Tape: rot_scale_blocks shape mismatch");
    Id id = alloc(Op::rot_scale_mv, nodes_[x].len, params, x);
    auto out = vals(id);
    auto vp = vals(params);
    auto vx = vals(x);
    for (std::size_t k = 0; k < vx.size() / 2; ++k) {
        const double a = vp[2 * k], b = vp[2 * k + 1];
        out[2 * k] = a * vx[2 * k] - b * vx[2 * k + 1];
        out[2 * k + 1] = b * vx[2 * k] + a * vx[2 * k + 1];
    }
    return id;
}

Tape::Id Tape::general_blocks(Id params, Id x) {
    check(params);
    check(x);
    if (nodes_[params].len != 2 * nodes_[x].len || nodes_[x].len % 2 != 0)
        throw std::invalid_argument("Tape: general_blocks shape mismatch");
    Id id = alloc(Op::block2_mv, nodes_[x].len, params, x);
    auto out = vals(id);
    auto vp = vals(params);
    auto vx = vals(x);
    for (std::size_t k = 0; k < vx.size() / 2; ++k) {
        const double* p = vp.data() + 4 * k;
        out[2 * k] = p[0] * vx[2 * k] + p[1] * vx[2 * k + 1];
        out[2 * k + 1] = p[2] * vx[2 * k] + p[3] * vx[2 * k + 1];
    }
    return id;
}

Tape::Id Tape::leaky_relu(Id x, double slope) {
    check(x);
    const auto aux = static_cast<std::uint32_t>(saved_.size());
    saved_.push_back(slope);
    Id id = alloc(Op::leaky_relu_v, nodes_[x].len, x, 0, aux);
    auto out = vals(id);
    auto vx = vals(x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = vx[i] > 0.0 ? vx[i] : slope * vx[i];
    return id;
}

Tape::Id Tape::project(Id x, double c) {
    check(x);
    const auto aux = static_cast<std::uint32_t>(saved_.size());
    saved_.push_back(0.0);  // clamp flag, set below
    Id id = alloc(Op::ball_project, nodes_[x].len, x, 0, aux);
    auto out = vals(id);
    auto vx = vals(x);
    std::copy(vx.begin(), vx.end(), out.begin());
    ++proj_calls_;
    double n2 = 0.0;
    for (double v : out) n2 += v * v;
    const double max_norm = (1.0 - kBallMargin) / std::sqrt(c);
    if (n2 >= max_norm * max_norm) {
        const double f = max_norm / std::sqrt(n2);
        for (double& v : out) v *= f;
        saved_[aux] = 1.0;
        ++proj_clamps_;
    }
    return id;
}

Tape::Id Tape::dot(Id a, Id b) {
    check(a);
    check(b);
    if (nodes_[a].len != nodes_[b].len) throw std::invalid_argument("Tape: dot length mismatch");
    Id id = alloc(Op::dot_op, 1, a, b);
    auto va = vals(a);
    auto vb = vals(b);
    double s = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) s += va[i] * vb[i];
    val_[nodes_[id].off] = s;
    return id;
}

Tape::Id Tape::scalar_binary(Op op, Id a, Id b) {
    check_scalar(a);
    check_scalar(b);
    Id id = alloc(op, 1, a, b);
    const double x = val_[nodes_[a].off];
    const double y = val_[nodes_[b].off];
    double r = 0.0;
    switch (op) {
        case Op::add_ss: r = x + y; break;
        case Op::sub_ss: r = x - y; break;
        case Op::mul_ss: r = x * y; break;
        case Op::div_ss: r = x / y; break;
        default: throw std::logic_error("Tape: bad scalar binary op");
    }
    val_[nodes_[id].off] = r;
    return id;
}

Tape::Id Tape::add_s(Id a, Id b) { return scalar_binary(Op::add_ss, a, b); }
Tape::Id Tape::sub_s(Id a, Id b) { return scalar_binary(Op::sub_ss, a, b); }
Tape::Id Tape::mul_s(Id a, Id b) { return scalar_binary(Op::mul_ss, a, b); }
Tape::Id Tape::div_s(Id a, Id b) { return scalar_binary(Op::div_ss, a, b); }

Tape::Id Tape::scalar_unary(Op op, Id a, std::uint32_t aux) {
    check_scalar(a);
    Id id = alloc(op, 1, a, 0, aux);
    const double x = val_[nodes_[a].off];
    double r = 0.0;
    switch (op) {
        case Op::mul_sc_op: r = x * saved_[aux]; break;
        case Op::add_sc_op: r = x + saved_[aux]; break;
        case Op::abs_op: r = std::abs(x); break;
        case Op::sqrt_op: r = std::sqrt(x); break;
        case Op::tanh_op: r = safe_tanh(x); break;
        case Op::artanh_op: r = safe_artanh(x); break;
        case Op::exp_op: r = std::exp(std::clamp(x, -kTanhArgMax, kTanhArgMax)); break;
        case Op::leaky_relu_op: r = x > 0.0 ? x : saved_[aux] * x; break;
        default: throw std::logic_error("Tape: bad scalar unary op");
    }
    val_[nodes_[id].off] = r;
    return id;
}

Tape::Id Tape::mul_sc(Id a, double k) {
    const auto aux = static_cast<std::uint32_t>(saved_.size());
    saved_.push_back(k);
    return scalar_unary(Op::mul_sc_op, a, aux);
}

Tape::Id Tape::add_sc(Id a, double k) {
    const auto aux = static_cast<std::uint32_t>(saved_.size());
    saved_.push_back(k);
    return scalar_unary(Op::add_sc_op, a, aux);
}

Tape::Id Tape::abs_s(Id a) { return scalar_unary(Op::abs_op, a); }
Tape::Id Tape::sqrt_s(Id a) { return scalar_unary(Op::sqrt_op, a); }
Tape::Id Tape::tanh_s(Id a) { return scalar_unary(Op::tanh_op, a); }
Tape::Id Tape::artanh_s(Id a) { return scalar_unary(Op::artanh_op, a); }
Tape::Id Tape::exp_s(Id a) { return scalar_unary(Op::exp_op, a); }

Tape::Id Tape::leaky_relu_s(Id a, double slope) {
    const auto aux = static_cast<std::uint32_t>(saved_.size());
    saved_.push_back(slope);
    return scalar_unary(Op::leaky_relu_op, a, aux);
}

Tape::Id Tape::log_sum_exp(std::span<const Id> scores) {
    if (scores.empty()) throw std::invalid_argument("Tape: log_sum_exp over nothing");
    for (Id s : scores) check_scalar(s);
    const auto aux = static_cast<std::uint32_t>(args_.size());
    args_.push_back(static_cast<Id>(scores.size()));
    args_.insert(args_.end(), scores.begin(), scores.end());
    Id id = alloc(Op::lse_op, 1, 0, 0, aux);
    double m = -std::numeric_limits<double>::infinity();
    for (Id s : scores) m = std::max(m, val_[nodes_[s].off]);
    double sum = 0.0;
    for (Id s : scores) sum += std::exp(val_[nodes_[s].off] - m);
    val_[nodes_[id].off] = m + std::log(sum);
    return id;
}

void Tape::backward(Id output) {
    check_scalar(output);
    if (swept_) throw std::logic_error("Tape: backward already ran; reset first");
    swept_ = true;
    adj_.assign(val_.size(), 0.0);
    adj_[nodes_[output].off] = 1.0;
    for (std::uint32_t i = static_cast<std::uint32_t>(nodes_.size()); i-- > 0;) {
        backward_node(i);
    }
}

void Tape::backward_node(std::uint32_t i) {
    const Node& n = nodes_[i];
    const std::span<const double> g{adj_.data() + n.off, n.len};
    switch (n.op) {
        case Op::leaf:
        case Op::constant:
            return;
        case Op::add_vv: {
            auto da = adj(n.a);
            auto db = adj(n.b);
            for (std::size_t k = 0; k < n.len; ++k) {
                da[k] += g[k];
                db[k] += g[k];
            }
            return;
        }
        case Op::sub_vv: {
            auto da = adj(n.a);
            auto db = adj(n.b);
            for (std::size_t k = 0; k < n.len; ++k) {
                da[k] += g[k];
                db[k] -= g[k];
            }
            return;
        }
        case Op::mul_vv: {
            auto da = adj(n.a);
            auto db = adj(n.b);
            auto va = vals(n.a);
            auto vb = vals(n.b);
            for (std::size_t k = 0; k < n.len; ++k) {
                da[k] += g[k] * vb[k];
                db[k] += g[k] * va[k];
            }
            return;
        }
        case Op::scale_vs: {
            auto dv = adj(n.a);
            auto vv = vals(n.a);
            const double k = val_[nodes_[n.b].off];
            double ds = 0.0;
            for (std::size_t j = 0; j < n.len; ++j) {
                dv[j] += k * g[j];
                ds += g[j] * vv[j];
            }
            adj_[nodes_[n.b].off] += ds;
            return;
        }
        case Op::scale_vc: {
            auto dv = adj(n.a);
            const double k = saved_[n.aux];
            for (std::size_t j = 0; j < n.len; ++j) dv[j] += k * g[j];
            return;
        }
        case Op::div_vs: {
            auto dv = adj(n.a);
            const double s = val_[nodes_[n.b].off];
            auto out = vals(i);
            double ds = 0.0;
            for (std::size_t j = 0; j < n.len; ++j) {
                dv[j] += g[j] / s;
                ds -= g[j] * out[j];
            }
            adj_[nodes_[n.b].off] += ds / s;
            return;
        }
        case Op::matvec_op: {
            const std::uint32_t cols = nodes_[n.b].len;
            auto dw = adj(n.a);
            auto dx = adj(n.b);
            auto vw = vals(n.a);
            auto vx = vals(n.b);
            for (std::uint32_t r = 0; r < n.len; ++r) {
                const double gr = g[r];
                if (gr == 0.0) continue;
                double* dwrow = dw.data() + static_cast<std::size_t>(r) * cols;
                const double* wrow = vw.data() + static_cast<std::size_t>(r) * cols;
                for (std::uint32_t c = 0; c < cols; ++c) {
                    dwrow[c] += gr * vx[c];
                    dx[c] += gr * wrow[c];
                }
            }
            return;
        }
        case Op::block_rot: {
            auto dang = adj(n.a);
            auto dx = adj(n.b);
            auto van = vals(n.a);
            auto out = vals(i);
            for (std::size_t k = 0; k < van.size(); ++k) {
                const double co = std::cos(van[k]);
                const double si = std::sin(van[k]);
                const double g0 = g[2 * k], g1 = g[2 * k + 1];
                dang[k] += -g0 * out[2 * k + 1] + g1 * out[2 * k];
                dx[2 * k] += co * g0 + si * g1;
                dx[2 * k + 1] += -si * g0 + co * g1;
            }
            return;
        }
        case Op::rot_scale_mv: {
            auto dp = adj(n.a);
            auto dx = adj(n.b);
            auto vp = vals(n.a);
            auto vx = vals(n.b);
            for (std::size_t k = 0; k < n.len / 2; ++k) {
                const double a = vp[2 * k], b = vp[2 * k + 1];
                const double x0 = vx[2 * k], x1 = vx[2 * k + 1];
                const double g0 = g[2 * k], g1 = g[2 * k + 1];
                dp[2 * k] += g0 * x0 + g1 * x1;
                dp[2 * k + 1] += -g0 * x1 + g1 * x0;
                dx[2 * k] += a * g0 + b * g1;
                dx[2 * k + 1] += -b * g0 + a * g1;
            }
            return;
        }
        case Op::block2_mv: {
            auto dp = adj(n.a);
            auto dx = adj(n.b);
            auto vp = vals(n.a);
            auto vx = vals(n.b);
            for (std::size_t k = 0; k < n.len / 2; ++k) {
                const double* p = vp.data() + 4 * k;
                const double x0 = vx[2 * k], x1 = vx[2 * k + 1];
                const double g0 = g[2 * k], g1 = g[2 * k + 1];
                dp[4 * k] += g0 * x0;
                dp[4 * k + 1] += g0 * x1;
                dp[4 * k + 2] += g1 * x0;
                dp[4 * k + 3] += g1 * x1;
                dx[2 * k] += p[0] * g0 + p[2] * g1;
                dx[2 * k + 1] += p[1] * g0 + p[3] * g1;
            }
            return;
        }
        case Op::leaky_relu_v: {
            auto dx = adj(n.a);
            auto vx = vals(n.a);
            const double slope = saved_[n.aux];
            for (std::size_t k = 0; k < n.len; ++k) dx[k] += g[k] * (vx[k] > 0.0 ? 1.0 : slope);
            return;
        }
        case Op::ball_project: {
            if (saved_[n.aux] != 0.0) return;  // clamped: stop-gradient
            auto dx = adj(n.a);
            for (std::size_t k = 0; k < n.len; ++k) dx[k] += g[k];
            return;
        }
        case Op::dot_op: {
            const double gs = g[0];
            auto da = adj(n.a);
            auto db = adj(n.b);
            auto va = vals(n.a);
            auto vb = vals(n.b);
            for (std::size_t k = 0; k < va.size(); ++k) {
                da[k] += gs * vb[k];
                db[k] += gs * va[k];
            }
            return;
        }
        case Op::add_ss:
            adj_[nodes_[n.a].off] += g[0];
            adj_[nodes_[n.b].off] += g[0];
            return;
        case Op::sub_ss:
            adj_[nodes_[n.a].off] += g[0];
            adj_[nodes_[n.b].off] -= g[0];
            return;
        case Op::mul_ss:
            adj_[nodes_[n.a].off] += g[0] * val_[nodes_[n.b].off];
            adj_[nodes_[n.b].off] += g[0] * val_[nodes_[n.a].off];
            return;
        case Op::div_ss: {
            const double y = val_[nodes_[n.b].off];
            const double out = val_[n.off];
            adj_[nodes_[n.a].off] += g[0] / y;
            adj_[nodes_[n.b].off] -= g[0] * out / y;
            return;
        }
        case Op::mul_sc_op:
            adj_[nodes_[n.a].off] += g[0] * saved_[n.aux];
            return;
        case Op::add_sc_op:
            adj_[nodes_[n.a].off] += g[0];
            return;
        case Op::abs_op: {
            const double x = val_[nodes_[n.a].off];
            adj_[nodes_[n.a].off] += g[0] * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
            return;
        }
        case Op::sqrt_op: {
            const double out = val_[n.off];
            if (out > kZeroNormTol) adj_[nodes_[n.a].off] += g[0] / (2.0 * out);
            return;
        }
        case Op::tanh_op: {
            const double out = val_[n.off];
            adj_[nodes_[n.a].off] += g[0] * (1.0 - out * out);
            return;
        }
        case Op::artanh_op: {
            const double xc = std::clamp(val_[nodes_[n.a].off], -kArtanhArgMax, kArtanhArgMax);
            adj_[nodes_[n.a].off] += g[0] / (1.0 - xc * xc);
            return;
        }
        case Op::exp_op: {
            const double x = val_[nodes_[n.a].off];
            if (std::abs(x) <= kTanhArgMax) adj_[nodes_[n.a].off] += g[0] * val_[n.off];
            return;
        }
        case Op::leaky_relu_op: {
            const double x = val_[nodes_[n.a].off];
            adj_[nodes_[n.a].off] += g[0] * (x > 0.0 ? 1.0 : saved_[n.aux]);
            return;
        }
        case Op::lse_op: {
            const double gs = g[0];
            if (gs == 0.0) return;
            const double out = val_[n.off];
            const Id count = args_[n.aux];
            for (Id k = 0; k < count; ++k) {
                const Id s = args_[n.aux + 1 + k];
                adj_[nodes_[s].off] += gs * std::exp(val_[nodes_[s].off] - out);
            }
            return;
        }
    }
    throw std::logic_error("Tape: unhandled op in backward");
}

void Tape::reset() {
    nodes_.clear();
    val_.clear();
    adj_.clear();
    saved_.clear();
    args_.clear();
    swept_ = false;
    proj_calls_ = 0;
    proj_clamps_ = 0;
}

}  // namespace ffhr
