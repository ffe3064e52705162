#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "scnet/error.hpp"

namespace scnet {

// Dense row-major matrix of doubles. The single numeric carrier of the
// library: activation batches are (samples x width), weights are
// (in_width x out_width).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;

    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows = init.size();
        cols = rows == 0 ? 0 : init.begin()->size();
        data.reserve(rows * cols);
        for (const auto& row : init) {
            if (row.size() != cols) {
                throw ShapeError("matrix literal: ragged rows (" +
                                 std::to_string(row.size()) + " vs " + std::to_string(cols) + ")");
            }
            data.insert(data.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    double* row_ptr(std::size_t i) { return data.data() + i * cols; }
    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    bool is_finite() const {
        for (double v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    std::string shape_str() const {
        return std::to_string(rows) + "x" + std::to_string(cols);
    }
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                         " vs " + b.shape_str());
    }
}

// Standard product, (m x k)(k x n) -> (m x n). ikj loop order keeps the
// inner accumulation streaming over contiguous rows of b.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: lhs " + a.shape_str() + " incompatible with rhs " +
                         b.shape_str());
    }
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* crow = c.row_ptr(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

// a^T b without materializing the transpose, (s x m)^T (s x n) -> (m x n).
inline Matrix matmul_at(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) {
        throw ShapeError("matmul_at: lhs " + a.shape_str() + " incompatible with rhs " +
                         b.shape_str());
    }
    Matrix c(a.cols, b.cols);
    for (std::size_t s = 0; s < a.rows; ++s) {
        const double* arow = a.row_ptr(s);
        const double* brow = b.row_ptr(s);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double ai = arow[i];
            double* crow = c.row_ptr(i);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += ai * brow[j];
        }
    }
    return c;
}

// a b^T without materializing the transpose, (s x n)(m x n)^T -> (s x m).
inline Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) {
        throw ShapeError("matmul_bt: lhs " + a.shape_str() + " incompatible with rhs " +
                         b.shape_str());
    }
    Matrix c(a.rows, b.rows);
    for (std::size_t s = 0; s < a.rows; ++s) {
        const double* arow = a.row_ptr(s);
        for (std::size_t i = 0; i < b.rows; ++i) {
            const double* brow = b.row_ptr(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < a.cols; ++j) acc += arow[j] * brow[j];
            c(s, i) = acc;
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data[i] += b.data[i];
    return c;
}

inline Matrix subtract(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "subtract");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data[i] -= b.data[i];
    return c;
}

inline Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data[i] *= b.data[i];
    return c;
}

inline Matrix scale(const Matrix& m, double s) {
    Matrix c = m;
    for (double& v : c.data) v *= s;
    return c;
}

// a + s*b, used for sensitivity injection and parameter updates.
inline void add_scaled_in_place(Matrix& a, const Matrix& b, double s) {
    require_same_shape(a, b, "add_scaled");
    for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += s * b.data[i];
}

// Row vector broadcast: out(i,j) = m(i,j) + row(0,j).
inline Matrix add_row_broadcast(const Matrix& m, const Matrix& row) {
    if (row.rows != 1 || row.cols != m.cols) {
        throw ShapeError("add_row_broadcast: row " + row.shape_str() +
                         " does not broadcast over " + m.shape_str());
    }
    Matrix c = m;
    for (std::size_t i = 0; i < c.rows; ++i) {
        double* crow = c.row_ptr(i);
        for (std::size_t j = 0; j < c.cols; ++j) crow[j] += row.data[j];
    }
    return c;
}

// Column sums as a 1 x cols row vector.
inline Matrix column_sums(const Matrix& m) {
    Matrix out(1, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double* row = m.row_ptr(i);
        for (std::size_t j = 0; j < m.cols; ++j) out.data[j] += row[j];
    }
    return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::fabs(a.data[i] - b.data[i]);
        if (d > worst) worst = d;
    }
    return worst;
}

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

}  // namespace scnet
