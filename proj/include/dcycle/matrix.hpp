#pragma once

#include <dcycle/error.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <vector>

namespace dcycle {

/// Small dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::initializer_list<std::initializer_list<double>> init) {
        rows_ = init.size();
        cols_ = rows_ == 0 ? 0 : init.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw ValidationError("ragged matrix initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (rows[i].size() != m.cols()) throw ValidationError("ragged matrix rows");
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> col(std::size_t j) const {
        std::vector<double> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    const std::vector<double>& data() const { return data_; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// First `k` columns.
    Matrix left_cols(std::size_t k) const {
        Matrix m(rows_, k);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < k; ++j) m(i, j) = (*this)(i, j);
        return m;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw ValidationError("matrix dimension mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        Matrix c = a;
        for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
        return c;
    }

    double frobenius_norm() const {
        return std::sqrt(std::inner_product(data_.begin(), data_.end(), data_.begin(), 0.0));
    }

    double trace() const {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const double> a) {
    return std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
}

/// Eigenpairs of a symmetric matrix. `vectors` holds unit eigenvectors as
/// columns, matched to `values` sorted descending.
struct EigenDecomposition {
    std::vector<double> values;
    Matrix vectors;
};

struct JacobiOptions {
    double tolerance = 1e-12;  // off-diagonal Frobenius norm, scaled by max(1, |A|_F)
    std::size_t max_sweeps = 100;
};

namespace detail {

// Flips each column so its largest-magnitude entry (first on ties) is positive.
inline void normalize_signs(Matrix& vecs) {
    for (std::size_t j = 0; j < vecs.cols(); ++j) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < vecs.rows(); ++i)
            if (std::abs(vecs(i, j)) > std::abs(vecs(arg, j))) arg = i;
        if (vecs(arg, j) < 0.0)
            for (std::size_t i = 0; i < vecs.rows(); ++i) vecs(i, j) = -vecs(i, j);
    }
}

inline bool lexicographically_greater(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] > b[i];
    return false;
}

}  // namespace detail

/// Cyclic Jacobi eigensolver for symmetric matrices.
///
/// Eigenvalues are returned in descending order. Values closer than 1e-10
/// (relative) form a tie group ordered by the first differing eigenvector
/// entry, larger first, so the output is deterministic.
inline EigenDecomposition eigendecompose_sym(const Matrix& input, const JacobiOptions& opts = {}) {
    const std::size_t n = input.rows();
    if (n != input.cols()) throw ValidationError("eigendecompose_sym needs a square matrix");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(input(i, j) - input(j, i)) >
                1e-12 * std::max(1.0, std::abs(input(i, j))))
                throw ValidationError("eigendecompose_sym needs a symmetric matrix");

    Matrix a = input;
    Matrix v = Matrix::identity(n);
    const double threshold = opts.tolerance * std::max(1.0, input.frobenius_norm());

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    bool converged = off_norm() <= threshold;
    for (std::size_t sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        converged = off_norm() <= threshold;
    }
    if (!converged)
        throw NumericError("Jacobi eigensolver did not converge in " +
                           std::to_string(opts.max_sweeps) + " sweeps");

    detail::normalize_signs(v);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    // Reorder tie groups by eigenvector content.
    const double scale = std::max(1.0, input.frobenius_norm());
    std::size_t g = 0;
    while (g < n) {
        std::size_t h = g + 1;
        while (h < n && std::abs(a(order[h - 1], order[h - 1]) - a(order[h], order[h])) <=
                            1e-10 * scale)
            ++h;
        if (h - g > 1) {
            std::sort(order.begin() + static_cast<std::ptrdiff_t>(g),
                      order.begin() + static_cast<std::ptrdiff_t>(h),
                      [&](std::size_t i, std::size_t j) {
                          return detail::lexicographically_greater(v.col(i), v.col(j));
                      });
        }
        g = h;
    }

    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

}  // namespace dcycle
