#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ffhr {

/// Dense row-major matrix of doubles. Small sizes only (embedding dim).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sq_norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

/// out = M * x
inline void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
    if (x.size() != m.cols || out.size() != m.rows) throw std::invalid_argument("matvec: size mismatch");
    for (std::size_t i = 0; i < m.rows; ++i) out[i] = dot(m.row(i), x);
}

inline std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    std::vector<double> out(m.rows);
    matvec(m, x, out);
    return out;
}

}  // namespace ffhr
