#include <tslasso/kernels.hpp>

#include <tslasso/error.hpp>

#include <cstddef>

namespace tslasso::kernels {

namespace {

// Column-major copy so every entry is a contiguous dot product.
std::vector<double> columns_of(const DenseMatrix& m)
{
    std::vector<double> out(m.size());
    const std::size_t n = m.rows();
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t j = 0; j < m.cols(); ++j) out[j * n + t] = m(t, j);
    return out;
}

inline double column_dot(const double* a, const double* b, std::size_t n)
{
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) acc += a[t] * b[t];
    return acc;
}

void check_rows(const DenseMatrix& x)
{
    if (x.rows() == 0) throw DimensionError("kernel: design has no rows");
}

} // namespace

SymmetricMatrix gram_serial(const DenseMatrix& x)
{
    check_rows(x);
    const std::size_t n = x.rows(), p = x.cols();
    const std::vector<double> cols = columns_of(x);
    const double inv = 1.0 / static_cast<double>(n);
    SymmetricMatrix g(p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) g(i, j) = column_dot(&cols[i * n], &cols[j * n], n) * inv;
    return g;
}

SymmetricMatrix gram_parallel(const DenseMatrix& x)
{
    check_rows(x);
    const std::size_t n = x.rows(), p = x.cols();
    const std::vector<double> cols = columns_of(x);
    const double inv = 1.0 / static_cast<double>(n);
    SymmetricMatrix g(p);
    const auto pp = static_cast<std::ptrdiff_t>(p);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < pp; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t j = i; j < p; ++j) g(i, j) = column_dot(&cols[i * n], &cols[j * n], n) * inv;
    }
    return g;
}

DenseMatrix cross_serial(const DenseMatrix& x, const DenseMatrix& y)
{
    check_rows(x);
    if (y.rows() != x.rows()) throw DimensionError("cross: row counts differ");
    const std::size_t n = x.rows();
    const std::vector<double> xc = columns_of(x), yc = columns_of(y);
    const double inv = 1.0 / static_cast<double>(n);
    DenseMatrix c(x.cols(), y.cols());
    for (std::size_t i = 0; i < x.cols(); ++i)
        for (std::size_t k = 0; k < y.cols(); ++k) c(i, k) = column_dot(&xc[i * n], &yc[k * n], n) * inv;
    return c;
}

DenseMatrix cross_parallel(const DenseMatrix& x, const DenseMatrix& y)
{
    check_rows(x);
    if (y.rows() != x.rows()) throw DimensionError("cross: row counts differ");
    const std::size_t n = x.rows();
    const std::vector<double> xc = columns_of(x), yc = columns_of(y);
    const double inv = 1.0 / static_cast<double>(n);
    DenseMatrix c(x.cols(), y.cols());
    const auto pp = static_cast<std::ptrdiff_t>(x.cols());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < pp; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t k = 0; k < y.cols(); ++k) c(i, k) = column_dot(&xc[i * n], &yc[k * n], n) * inv;
    }
    return c;
}

} // namespace tslasso::kernels
