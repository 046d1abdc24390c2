// SPDX-License-Identifier: MIT

/**
 * @file tensor.hpp
 * @brief Row-major dense double matrix used by the encoder.
 */

#pragma once

#include "qapr/errors.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace qapr::nn {

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
        if (r < 0 || c < 0) {
            throw InvalidShape("negative matrix extent");
        }
    }

    [[nodiscard]] double& operator()(int r, int c) noexcept {
        return v[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
    }
    [[nodiscard]] double operator()(int r, int c) const noexcept {
        return v[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)];
    }
    [[nodiscard]] std::size_t size() const noexcept { return v.size(); }
    [[nodiscard]] bool same_shape(const Mat& o) const noexcept { return rows == o.rows && cols == o.cols; }

    [[nodiscard]] bool all_finite() const noexcept {
        for (double x : v) {
            if (!std::isfinite(x)) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const Mat&, const Mat&) = default;
};

[[nodiscard]] inline std::string shape_str(const Mat& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

inline void require_shape(bool ok, const char* op, const Mat& a, const Mat& b) {
    if (!ok) {
        throw ShapeMismatch(std::string(op) + ": " + shape_str(a) + " vs " + shape_str(b));
    }
}

/// C += A * B
inline void gemm_acc(const Mat& a, const Mat& b, Mat& c) {
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            const double x = a(i, k);
            if (x == 0.0) {
                continue;
            }
            const double* brow = &b.v[static_cast<std::size_t>(k) * static_cast<std::size_t>(b.cols)];
            double* crow = &c.v[static_cast<std::size_t>(i) * static_cast<std::size_t>(c.cols)];
            for (int j = 0; j < b.cols; ++j) {
                crow[j] += x * brow[j];
            }
        }
    }
}

/// C += A^T * B
inline void gemm_tn_acc(const Mat& a, const Mat& b, Mat& c) {
    for (int k = 0; k < a.rows; ++k) {
        for (int i = 0; i < a.cols; ++i) {
            const double x = a(k, i);
            if (x == 0.0) {
                continue;
            }
            for (int j = 0; j < b.cols; ++j) {
                c(i, j) += x * b(k, j);
            }
        }
    }
}

/// C += A * B^T
inline void gemm_nt_acc(const Mat& a, const Mat& b, Mat& c) {
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < b.rows; ++j) {
            double s = 0.0;
            for (int k = 0; k < a.cols; ++k) {
                s += a(i, k) * b(j, k);
            }
            c(i, j) += s;
        }
    }
}

[[nodiscard]] inline Mat matmul(const Mat& a, const Mat& b) {
    require_shape(a.cols == b.rows, "matmul", a, b);
    Mat c(a.rows, b.cols);
    gemm_acc(a, b, c);
    return c;
}

} // namespace qapr::nn
