#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvlab {

inline constexpr const char* kVersion = "0.1.0";

using Vec = std::vector<double>;

// Dense row-major matrix, small dimensions only (d x n diffusion blocks,
// d x d Hessians).
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Mat scalar1x1(double v) {
        Mat m(1, 1);
        m.a[0] = v;
        return m;
    }
};

inline bool is_finite(double v) { return std::isfinite(v); }

inline bool is_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool is_finite(const Mat& m) {
    for (double x : m.a)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(const Vec& u, const Vec& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

// tr(A * B) for square A, B of equal size.
inline double trace_product(const Mat& A, const Mat& B) {
    double s = 0.0;
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t k = 0; k < A.cols; ++k) s += A(i, k) * B(k, i);
    return s;
}

// sigma * sigma^T for a d x n block.
inline Mat gram(const Mat& sigma) {
    Mat g(sigma.rows, sigma.rows);
    for (std::size_t i = 0; i < sigma.rows; ++i)
        for (std::size_t j = 0; j < sigma.rows; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < sigma.cols; ++k) s += sigma(i, k) * sigma(j, k);
            g(i, j) = s;
        }
    return g;
}

struct BlowupError : std::runtime_error {
    std::size_t particle;
    std::size_t step;
    BlowupError(std::size_t p, std::size_t s, const std::string& what)
        : std::runtime_error(what), particle(p), step(s) {}
};

}  // namespace mvlab
