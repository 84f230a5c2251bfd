#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pwd {

// Dense row-major matrix, just enough for the desk-scale models here.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    bool operator==(const Matrix&) const = default;
};

inline std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
    if (x.size() != a.cols) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double sum = 0.0;
        const double* row = a.data.data() + i * a.cols;
        for (std::size_t j = 0; j < a.cols; ++j) sum += row[j] * x[j];
        y[i] = sum;
    }
    return y;
}

inline std::vector<double> matvec_transposed(const Matrix& a, const std::vector<double>& x) {
    if (x.size() != a.rows) throw std::invalid_argument("matvec_transposed: dimension mismatch");
    std::vector<double> y(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* row = a.data.data() + i * a.cols;
        const double xi = x[i];
        for (std::size_t j = 0; j < a.cols; ++j) y[j] += row[j] * xi;
    }
    return y;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

inline double norm2(const std::vector<double>& a) {
    double sum = 0.0;
    for (double x : a) sum += x * x;
    return sum;
}

}  // namespace pwd
