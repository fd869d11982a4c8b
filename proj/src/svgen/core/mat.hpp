#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svgen/core/errors.hpp"

namespace svgen {

// Dense 2-D array, row-major. Feature sequences are stored as
// (rows x frames): mel 80xT, piano roll 88xT, noise UxT, chroma 12xT.
template <typename Real>
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<Real> data; // row-major, rows*cols

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), Real(0)) {}
    Mat(int r, int c, std::vector<Real> values) : rows(r), cols(c), data(std::move(values)) {
        if (data.size() != static_cast<size_t>(r) * static_cast<size_t>(c)) {
            throw data_error("Mat: data length does not match rows*cols");
        }
    }

    static Mat zeros(int r, int c) { return Mat(r, c); }
    static Mat filled(int r, int c, Real v) {
        Mat m(r, c);
        std::fill(m.data.begin(), m.data.end(), v);
        return m;
    }

    Real& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const Real& operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    void fill(Real v) { std::fill(data.begin(), data.end(), v); }
};

using Mat32 = Mat<float>;
using Mat64 = Mat<double>;

template <typename Real>
using EigenRM = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Real>
Eigen::Map<EigenRM<Real>> emap(Mat<Real>& m) {
    return Eigen::Map<EigenRM<Real>>(m.data.data(), m.rows, m.cols);
}

template <typename Real>
Eigen::Map<const EigenRM<Real>> cemap(const Mat<Real>& m) {
    return Eigen::Map<const EigenRM<Real>>(m.data.data(), m.rows, m.cols);
}

template <typename Real>
bool all_finite(const Mat<Real>& m) {
    for (Real v : m.data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

template <typename Real>
void require_finite(const Mat<Real>& m, const std::string& where) {
    if (!all_finite(m)) throw numeric_error("non-finite values in " + where);
}

template <typename To, typename From>
Mat<To> mat_cast(const Mat<From>& m) {
    Mat<To> out(m.rows, m.cols);
    for (size_t i = 0; i < m.data.size(); ++i) out.data[i] = static_cast<To>(m.data[i]);
    return out;
}

template <typename Real>
bool exact_equal(const Mat<Real>& a, const Mat<Real>& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

// c = a * b
template <typename Real>
Mat<Real> mat_mul(const Mat<Real>& a, const Mat<Real>& b) {
    if (a.cols != b.rows) throw data_error("mat_mul: inner dimensions do not match");
    Mat<Real> c(a.rows, b.cols);
    emap(c).noalias() = cemap(a) * cemap(b);
    return c;
}

} // namespace svgen
