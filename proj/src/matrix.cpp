#include <tslasso/matrix.hpp>

#include <tslasso/error.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace tslasso {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
{}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries))
{
    if (data_.size() != rows * cols) {
        throw DimensionError("DenseMatrix: entries length " + std::to_string(data_.size())
                             + " != " + std::to_string(rows) + "x" + std::to_string(cols));
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0)
{
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n)
{
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag)
{
    DenseMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

DenseMatrix DenseMatrix::transpose() const
{
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

DenseMatrix DenseMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
{
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("DenseMatrix::block out of range");
    DenseMatrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
}

void DenseMatrix::set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b)
{
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
        throw DimensionError("DenseMatrix::set_block out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

double DenseMatrix::frobenius_norm() const { return norm2(data_); }

double DenseMatrix::max_abs() const
{
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

bool DenseMatrix::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t DenseMatrix::count_nonzero() const
{
    return static_cast<std::size_t>(
        std::count_if(data_.begin(), data_.end(), [](double v) { return v != 0.0; }));
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o)
{
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("DenseMatrix +=: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o)
{
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionError("DenseMatrix -=: shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s)
{
    for (double& v : data_) v *= s;
    return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
    DenseMatrix c(a.cols(), b.cols());
    for (std::size_t t = 0; t < a.rows(); ++t) {
        auto arow = a.row(t);
        auto brow = b.row(t);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double ai = arow[i];
            if (ai == 0.0) continue;
            auto crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += ai * brow[j];
        }
    }
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.cols() != b.cols()) throw DimensionError("matmul_nt: column counts differ");
    DenseMatrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
    return c;
}

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x)
{
    if (a.cols() != x.size()) throw DimensionError("matvec: dimension mismatch");
    std::vector<double> y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

SymmetricMatrix::SymmetricMatrix(std::size_t dim, double fill)
    : dim_(dim), packed_(dim * (dim + 1) / 2, fill)
{}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n)
{
    SymmetricMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) s(i, i) = 1.0;
    return s;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> diag)
{
    SymmetricMatrix s(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) s(i, i) = diag[i];
    return s;
}

SymmetricMatrix SymmetricMatrix::from_dense(const DenseMatrix& m)
{
    if (!m.is_square()) throw DimensionError("SymmetricMatrix::from_dense: matrix not square");
    SymmetricMatrix s(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

DenseMatrix SymmetricMatrix::to_dense() const
{
    DenseMatrix m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j);
    return m;
}

SymmetricMatrix SymmetricMatrix::principal(std::span<const std::size_t> idx) const
{
    SymmetricMatrix s(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a; b < idx.size(); ++b) s(a, b) = (*this)(idx[a], idx[b]);
    return s;
}

double SymmetricMatrix::frobenius_norm() const
{
    double acc = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) {
            const double v = (*this)(i, j);
            acc += v * v;
        }
    return std::sqrt(acc);
}

double SymmetricMatrix::quadratic_form(std::span<const double> v) const
{
    if (v.size() != dim_) throw DimensionError("quadratic_form: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        if (v[i] == 0.0) continue;
        double row = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) row += (*this)(i, j) * v[j];
        acc += v[i] * row;
    }
    return acc;
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
    return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm1(std::span<const double> a)
{
    double acc = 0.0;
    for (double v : a) acc += std::abs(v);
    return acc;
}

} // namespace tslasso
