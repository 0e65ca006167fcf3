#include <tslasso/numerics.hpp>

#include <tslasso/error.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace tslasso {

namespace {

constexpr std::size_t kJacobiMaxDim = 64;
constexpr int kPowerMaxIter = 100000;

std::vector<double> ones_seed(std::size_t n)
{
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    return v;
}

// Second deterministic start, used when the all-ones vector is (nearly)
// orthogonal to the dominant eigenvector.
std::vector<double> restart_seed(std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i + 1) * 0.6180339887498949;
        v[i] = (x - std::floor(x)) - 0.5 + 1e-3;
    }
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    return v;
}

using Operator = std::function<void(std::span<const double>, std::span<double>)>;

// Dominant eigenvalue of a symmetric positive semidefinite operator.
// Stops when ||B v - mu v|| <= rel_tol * scale(mu).
double power_top_psd(const Operator& apply, std::size_t n, double rel_tol,
                     const std::function<double(double)>& scale)
{
    auto run = [&](std::vector<double> v) -> double {
        std::vector<double> u(n);
        double mu = 0.0;
        for (int it = 0; it < kPowerMaxIter; ++it) {
            apply(v, u);
            mu = dot(v, u);
            const double nu = norm2(u);
            if (nu == 0.0) return 0.0;
            double res2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = u[i] - mu * v[i];
                res2 += r * r;
            }
            if (std::sqrt(res2) <= rel_tol * scale(mu)) return mu;
            for (std::size_t i = 0; i < n; ++i) v[i] = u[i] / nu;
        }
        throw NumericError("power iteration did not converge", mu);
    };
    double best = 0.0;
    try {
        best = run(ones_seed(n));
    } catch (const NumericError& e) {
        best = e.best_estimate();
        const double other = run(restart_seed(n));
        return std::max(best, other);
    }
    return std::max(best, run(restart_seed(n)));
}

std::pair<double, double> gershgorin_bounds(const SymmetricMatrix& s)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        double radius = 0.0;
        for (std::size_t j = 0; j < s.dim(); ++j)
            if (j != i) radius += std::abs(s(i, j));
        lo = std::min(lo, s(i, i) - radius);
        hi = std::max(hi, s(i, i) + radius);
    }
    return {lo, hi};
}

void sym_apply(const DenseMatrix& d, std::span<const double> v, std::span<double> out)
{
    for (std::size_t i = 0; i < d.rows(); ++i) out[i] = dot(d.row(i), v);
}

} // namespace

double operator_norm(const DenseMatrix& m)
{
    if (m.empty()) return 0.0;
    const std::size_t n = m.cols();
    std::vector<double> w(m.rows());
    Operator ata = [&](std::span<const double> v, std::span<double> out) {
        for (std::size_t i = 0; i < m.rows(); ++i) w[i] = dot(m.row(i), v);
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            auto r = m.row(i);
            for (std::size_t j = 0; j < n; ++j) out[j] += r[j] * w[i];
        }
    };
    const double lam = power_top_psd(ata, n, 1e-11, [](double mu) { return std::abs(mu); });
    return std::sqrt(std::max(lam, 0.0));
}

double spectral_radius(const DenseMatrix& m)
{
    if (!m.is_square()) throw DimensionError("spectral_radius: matrix is not square");
    if (m.empty()) return 0.0;
    const double upper = operator_norm(m);
    if (upper == 0.0) return 0.0;

    DenseMatrix b = m;
    double fro = b.frobenius_norm();
    b *= 1.0 / fro;
    double log_norm = std::log(fro); // log ||M^(2^k)||_F
    double power = 1.0;              // 2^k
    double est = std::exp(log_norm);
    for (int k = 0; k < 64; ++k) {
        b = matmul(b, b);
        fro = b.frobenius_norm();
        if (fro == 0.0) return 0.0; // nilpotent
        b *= 1.0 / fro;
        log_norm = 2.0 * log_norm + std::log(fro);
        power *= 2.0;
        const double next = std::exp(log_norm / power);
        const double diff = std::abs(next - est);
        est = next;
        if (k >= 2 && diff <= 1e-11 * est) return std::min(est, upper);
    }
    throw NumericError("spectral_radius: power sequence did not settle", std::min(est, upper));
}

SymEigen jacobi_eigen(const SymmetricMatrix& s)
{
    const std::size_t n = s.dim();
    DenseMatrix a = s.to_dense();
    DenseMatrix v = DenseMatrix::identity(n);

    double total = 0.0;
    for (double x : a.data()) total += x * x;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off == 0.0 || off <= 1e-32 * total) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0)
                                 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = a(p, k) = c * akp - sn * akq;
                    a(k, q) = a(q, k) = sn * akp + c * akq;
                }
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SymEigen out{std::vector<double>(n), DenseMatrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

double min_eigen_sym(const SymmetricMatrix& s)
{
    if (s.dim() == 0) throw DimensionError("min_eigen_sym: empty matrix");
    if (s.dim() <= kJacobiMaxDim) return jacobi_eigen(s).values.front();

    const auto [lo, hi] = gershgorin_bounds(s);
    const DenseMatrix d = s.to_dense();
    Operator shifted = [&, hi = hi](std::span<const double> v, std::span<double> out) {
        sym_apply(d, v, out);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = hi * v[i] - out[i];
    };
    const double mu = power_top_psd(shifted, s.dim(), 1e-9,
                                    [hi = hi](double m) { return 1.0 + std::abs(hi - m); });
    return hi - mu;
}

double max_eigen_sym(const SymmetricMatrix& s)
{
    if (s.dim() == 0) throw DimensionError("max_eigen_sym: empty matrix");
    if (s.dim() <= kJacobiMaxDim) return jacobi_eigen(s).values.back();

    const auto [lo, hi] = gershgorin_bounds(s);
    const DenseMatrix d = s.to_dense();
    Operator shifted = [&, lo = lo](std::span<const double> v, std::span<double> out) {
        sym_apply(d, v, out);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] -= lo * v[i];
    };
    const double mu = power_top_psd(shifted, s.dim(), 1e-9,
                                    [lo = lo](double m) { return 1.0 + std::abs(m + lo); });
    return mu + lo;
}

SymmetricMatrix solve_discrete_lyapunov(const DenseMatrix& a, const SymmetricMatrix& q)
{
    if (!a.is_square()) throw DimensionError("solve_discrete_lyapunov: A is not square");
    if (a.rows() != q.dim()) throw DimensionError("solve_discrete_lyapunov: A and Q differ in size");
    const double r = spectral_radius(a);
    if (r >= 1.0) throw StabilityError("solve_discrete_lyapunov: spectral radius >= 1", r);

    DenseMatrix sigma = q.to_dense();
    DenseMatrix ak = a;
    for (int it = 0; it < 200; ++it) {
        DenseMatrix inc = matmul_nt(matmul(ak, sigma), ak);
        sigma += inc;
        if (inc.frobenius_norm() < 1e-12 * (1.0 + sigma.frobenius_norm()))
            return SymmetricMatrix::from_dense(sigma);
        ak = matmul(ak, ak);
    }
    throw NumericError("solve_discrete_lyapunov: doubling did not converge", sigma.frobenius_norm());
}

double scalar_subgaussian_norm(const DistributionSpec& dist)
{
    double best = 0.0;
    for (int p = 1; p <= kSubgaussianMaxMoment; ++p) {
        const double m = dist.abs_moment(p);
        if (m <= 0.0) continue;
        const double pd = static_cast<double>(p);
        best = std::max(best, std::pow(m, 1.0 / pd) / std::sqrt(pd));
    }
    return best;
}

DenseMatrix cholesky_psd(const SymmetricMatrix& s, double tol)
{
    const std::size_t n = s.dim();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(s(i, i)));
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = s(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= tol * max_diag) {
            if (d < -1e-8 * std::max(max_diag, 1.0))
                throw NumericError("cholesky_psd: matrix is not positive semidefinite", d);
            continue; // zero pivot: column stays zero
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double acc = s(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
            l(i, j) = acc / ljj;
        }
    }
    return l;
}

DenseMatrix solve_spd(const SymmetricMatrix& s, const DenseMatrix& b)
{
    const std::size_t n = s.dim();
    if (b.rows() != n) throw DimensionError("solve_spd: right-hand side has wrong row count");
    const DenseMatrix l = cholesky_psd(s, 1e-13);
    for (std::size_t i = 0; i < n; ++i)
        if (l(i, i) == 0.0) throw NumericError("solve_spd: matrix is singular", 0.0);

    DenseMatrix x = b;
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = x(i, c);
            for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * x(k, c);
            x(i, c) = acc / l(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = x(ii, c);
            for (std::size_t k = ii + 1; k < n; ++k) acc -= l(k, ii) * x(k, c);
            x(ii, c) = acc / l(ii, ii);
        }
    }
    return x;
}

} // namespace tslasso
