#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace conelab {

// Small dense vector for point/gradient data, dim <= 3.
// Grids are 1D/2D; dim 3 appears only in pointwise matrix algebra.
struct Vec {
    int dim = 0;
    std::array<double, 3> c{0.0, 0.0, 0.0};

    Vec() = default;
    explicit Vec(int d) : dim(d) {
        if (d < 1 || d > 3) throw std::invalid_argument("Vec: dim must be 1..3");
    }
    Vec(double x) : dim(1), c{x, 0.0, 0.0} {}
    Vec(double x, double y) : dim(2), c{x, y, 0.0} {}
    Vec(double x, double y, double z) : dim(3), c{x, y, z} {}

    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Vec operator+(const Vec& o) const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) r[i] = c[i] + o[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) r[i] = c[i] - o[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) r[i] = c[i] * s;
        return r;
    }
    Vec operator-() const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) r[i] = -c[i];
        return r;
    }

    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += c[i] * o[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    bool finite() const {
        for (int i = 0; i < dim; ++i)
            if (!std::isfinite(c[i])) return false;
        return true;
    }
};

inline Vec operator*(double s, const Vec& v) { return v * s; }

// Symmetric matrix, dim <= 3, upper-triangle storage.
// Entry order: (0,0) (0,1) (1,1) (0,2) (1,2) (2,2).
struct SymMat {
    int dim = 0;
    std::array<double, 6> a{};

    SymMat() = default;
    explicit SymMat(int d) : dim(d) {
        if (d < 1 || d > 3) throw std::invalid_argument("SymMat: dim must be 1..3");
        a.fill(0.0);
    }

    static int tri_index(int i, int j) {
        if (i > j) std::swap(i, j);
        return j * (j + 1) / 2 + i;
    }
    static int packed_size(int d) { return d * (d + 1) / 2; }

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(tri_index(i, j))]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(tri_index(i, j))]; }

    static SymMat identity(int d) {
        SymMat m(d);
        for (int i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }
    // Rank-one v (x) v.
    static SymMat outer(const Vec& v) {
        SymMat m(v.dim);
        for (int j = 0; j < v.dim; ++j)
            for (int i = 0; i <= j; ++i) m(i, j) = v[i] * v[j];
        return m;
    }

    SymMat operator+(const SymMat& o) const {
        SymMat r(dim);
        for (int k = 0; k < packed_size(dim); ++k) r.a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] + o.a[static_cast<std::size_t>(k)];
        return r;
    }
    SymMat operator-(const SymMat& o) const {
        SymMat r(dim);
        for (int k = 0; k < packed_size(dim); ++k) r.a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] - o.a[static_cast<std::size_t>(k)];
        return r;
    }
    SymMat operator*(double s) const {
        SymMat r(dim);
        for (int k = 0; k < packed_size(dim); ++k) r.a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] * s;
        return r;
    }
    SymMat operator-() const { return (*this) * -1.0; }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < dim; ++i) t += (*this)(i, i);
        return t;
    }
    double frobenius() const {
        double s = 0.0;
        for (int j = 0; j < dim; ++j)
            for (int i = 0; i < dim; ++i) s += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(s);
    }
    Vec apply(const Vec& v) const {
        Vec r(dim);
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += (*this)(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }
    double quad(const Vec& v) const { return v.dot(apply(v)); }

    bool finite() const {
        for (int k = 0; k < packed_size(dim); ++k)
            if (!std::isfinite(a[static_cast<std::size_t>(k)])) return false;
        return true;
    }

    // Eigenvalues in ascending order. Closed form for dim 1 and 2,
    // cyclic Jacobi iteration for dim 3.
    std::array<double, 3> eigenvalues() const;
};

// General (possibly nonsymmetric) small matrix, row-major, dim <= 3.
struct Mat {
    int dim = 0;
    std::array<double, 9> a{};

    Mat() = default;
    explicit Mat(int d) : dim(d) {
        if (d < 1 || d > 3) throw std::invalid_argument("Mat: dim must be 1..3");
        a.fill(0.0);
    }
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * dim + j)]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * dim + j)]; }

    static Mat identity(int d) {
        Mat m(d);
        for (int i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat from_sym(const SymMat& s) {
        Mat m(s.dim);
        for (int i = 0; i < s.dim; ++i)
            for (int j = 0; j < s.dim; ++j) m(i, j) = s(i, j);
        return m;
    }

    Mat operator+(const Mat& o) const {
        Mat r(dim);
        for (int k = 0; k < dim * dim; ++k) r.a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] + o.a[static_cast<std::size_t>(k)];
        return r;
    }
    Mat operator*(double s) const {
        Mat r(dim);
        for (int k = 0; k < dim * dim; ++k) r.a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k)] * s;
        return r;
    }
    Mat matmul(const Mat& o) const {
        Mat r(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                double s = 0.0;
                for (int k = 0; k < dim; ++k) s += (*this)(i, k) * o(k, j);
                r(i, j) = s;
            }
        return r;
    }
    Mat transpose() const {
        Mat r(dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) r(i, j) = (*this)(j, i);
        return r;
    }
    SymMat symmetrize() const {
        SymMat r(dim);
        for (int j = 0; j < dim; ++j)
            for (int i = 0; i <= j; ++i) r(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        return r;
    }
    double trace() const {
        double t = 0.0;
        for (int i = 0; i < dim; ++i) t += (*this)(i, i);
        return t;
    }
    double det() const {
        if (dim == 1) return a[0];
        if (dim == 2) return (*this)(0, 0) * (*this)(1, 1) - (*this)(0, 1) * (*this)(1, 0);
        const Mat& m = *this;
        return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
               m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
               m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    }
};

}  // namespace conelab
