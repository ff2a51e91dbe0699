#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace oneshot {

using complexd = std::complex<double>;

/// Global cap on matrix dimensions produced by tensor products and channel
/// powers. Overridable through the ONESHOT_MAX_DIM environment variable.
inline std::size_t max_dim() {
    static const std::size_t cap = [] {
        if (const char* env = std::getenv("ONESHOT_MAX_DIM")) {
            long v = std::atol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        }
        return static_cast<std::size_t>(4096);
    }();
    return cap;
}

/// Dense complex matrix, row-major storage.
class ComplexMatrix {
  public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, complexd(0.0, 0.0)) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<complexd> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("ComplexMatrix: entry count does not match shape");
    }

    ComplexMatrix(std::initializer_list<std::initializer_list<complexd>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_)
                throw std::invalid_argument("ComplexMatrix: ragged initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix zero(std::size_t rows, std::size_t cols) { return {rows, cols}; }

    static ComplexMatrix diag(const std::vector<double>& d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    complexd& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const complexd& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<complexd>& data() const { return data_; }
    std::vector<complexd>& data() { return data_; }

    using EigenMap = Eigen::Map<Eigen::Matrix<complexd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
    using ConstEigenMap =
        Eigen::Map<const Eigen::Matrix<complexd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

    EigenMap map() {
        return EigenMap(data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    }
    ConstEigenMap map() const {
        return ConstEigenMap(data_.data(), static_cast<Eigen::Index>(rows_),
                             static_cast<Eigen::Index>(cols_));
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    ComplexMatrix transpose() const {
        ComplexMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    complexd trace() const {
        if (!is_square()) throw std::invalid_argument("trace: matrix not square");
        complexd t = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

    bool is_finite() const {
        for (const auto& z : data_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    void check_finite(const std::string& where) const {
        if (!is_finite()) throw std::domain_error(where + ": non-finite matrix entries");
    }

    double hermiticity_error() const {
        if (!is_square()) return std::numeric_limits<double>::infinity();
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) {
                complexd d = (*this)(i, j) - std::conj((*this)(j, i));
                s += std::norm(d);
            }
        return std::sqrt(s);
    }

    bool is_hermitian(double tol_rel = 1e-10) const {
        double n = frobenius_norm();
        return hermiticity_error() <= tol_rel * std::max(1.0, n);
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        check_same_shape(o, "operator+=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        check_same_shape(o, "operator-=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    ComplexMatrix& operator*=(complexd c) {
        for (auto& z : data_) z *= c;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, complexd c) { return a *= c; }
    friend ComplexMatrix operator*(complexd c, ComplexMatrix a) { return a *= c; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("operator*: inner dimensions differ");
        ComplexMatrix r(a.rows_, b.cols_);
        r.map().noalias() = a.map() * b.map();
        return r;
    }

  private:
    void check_same_shape(const ComplexMatrix& o, const char* where) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument(std::string(where) + ": shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complexd> data_;
};

/// Kronecker product. The left factor is the most significant index block.
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    std::size_t r = a.rows() * b.rows();
    std::size_t c = a.cols() * b.cols();
    if (r > max_dim() || c > max_dim())
        throw std::length_error("tensor: result dimension exceeds configured cap");
    ComplexMatrix out(r, c);
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ja = 0; ja < a.cols(); ++ja) {
            complexd va = a(ia, ja);
            if (va == complexd(0.0, 0.0)) continue;
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                for (std::size_t jb = 0; jb < b.cols(); ++jb)
                    out(ia * b.rows() + ib, ja * b.cols() + jb) = va * b(ib, jb);
        }
    return out;
}

inline ComplexMatrix tensor(const std::vector<ComplexMatrix>& factors) {
    if (factors.empty()) return ComplexMatrix::identity(1);
    ComplexMatrix out = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) out = tensor(out, factors[k]);
    return out;
}

inline double real_trace(const ComplexMatrix& m) { return m.trace().real(); }

/// tr(a^dagger b), the Hilbert-Schmidt inner product.
inline complexd hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
    complexd s = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) s += std::conj(a.data()[k]) * b.data()[k];
    return s;
}

}  // namespace oneshot
