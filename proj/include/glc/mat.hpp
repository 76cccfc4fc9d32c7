#pragma once

#include <cstddef>
#include <vector>

namespace glc {

// Dense row-major matrix of doubles. Rows are contiguous so the SIMD kernels
// can work on them directly.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
    void set_zero() { std::fill(data.begin(), data.end(), 0.0); }
};

}  // namespace glc
