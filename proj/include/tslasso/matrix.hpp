#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace tslasso {

/**
 * Row-major dense real matrix.
 *
 * Entry (i, j) lives at data()[i * cols() + j]. Rows are exposed as spans so
 * kernels can walk them without copying.
 */
class DenseMatrix
{
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);
    static DenseMatrix diagonal(std::span<const double> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    DenseMatrix transpose() const;
    DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b);

    double frobenius_norm() const;
    double max_abs() const;
    bool all_finite() const;
    std::size_t count_nonzero() const;

    DenseMatrix& operator+=(const DenseMatrix& o);
    DenseMatrix& operator-=(const DenseMatrix& o);
    DenseMatrix& operator*=(double s);

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(double s, DenseMatrix a);

/// C = A B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// C = Aᵀ B
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// C = A Bᵀ
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x);

/**
 * Symmetric matrix stored as its packed upper triangle.
 *
 * Symmetry holds by construction; (i, j) and (j, i) address the same slot.
 */
class SymmetricMatrix
{
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t dim, double fill = 0.0);

    static SymmetricMatrix identity(std::size_t n);
    static SymmetricMatrix diagonal(std::span<const double> diag);
    /// Symmetrizes: entry (i, j) becomes (M(i,j) + M(j,i)) / 2.
    static SymmetricMatrix from_dense(const DenseMatrix& m);

    std::size_t dim() const noexcept { return dim_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return packed_[index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return packed_[index(i, j)]; }

    const std::vector<double>& packed() const noexcept { return packed_; }

    DenseMatrix to_dense() const;
    SymmetricMatrix principal(std::span<const std::size_t> idx) const;
    double frobenius_norm() const;
    double quadratic_form(std::span<const double> v) const;

    friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

private:
    std::size_t index(std::size_t i, std::size_t j) const noexcept
    {
        if (i > j) {
            const std::size_t t = i;
            i = j;
            j = t;
        }
        return i * dim_ - i * (i + 1) / 2 + j;
    }

    std::size_t dim_ = 0;
    std::vector<double> packed_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm1(std::span<const double> a);

} // namespace tslasso
