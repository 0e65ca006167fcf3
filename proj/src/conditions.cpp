#include <tslasso/conditions.hpp>

#include <tslasso/error.hpp>
#include <tslasso/kernels.hpp>
#include <tslasso/numerics.hpp>
#include <tslasso/rng.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>

namespace tslasso {

std::string to_string(REMode mode)
{
    switch (mode) {
    case REMode::exact: return "exact";
    case REMode::randomized: return "randomized";
    case REMode::automatic: return "automatic";
    }
    return "unknown";
}

double binomial(std::size_t n, std::size_t m)
{
    if (m > n) return 0.0;
    m = std::min(m, n - m);
    double r = 1.0;
    for (std::size_t i = 1; i <= m; ++i) {
        r = r * static_cast<double>(n - m + i) / static_cast<double>(i);
        if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
    }
    return std::round(r);
}

namespace {

struct Tracker
{
    double alpha, tau;
    double min_eig = std::numeric_limits<double>::infinity();
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t vectors = 0;

    void vector(double rayleigh, double l1)
    {
        min_eig = std::min(min_eig, rayleigh);
        min_margin = std::min(min_margin, rayleigh - alpha + tau * l1 * l1);
        ++vectors;
    }

    void support(const SymmetricMatrix& gram, const std::vector<std::size_t>& idx)
    {
        const SymEigen eig = jacobi_eigen(gram.principal(idx));
        for (std::size_t c = 0; c < idx.size(); ++c) {
            double l1 = 0.0;
            for (std::size_t r = 0; r < idx.size(); ++r) l1 += std::abs(eig.vectors(r, c));
            vector(eig.values[c], l1);
        }
    }
};

bool next_combination(std::vector<std::size_t>& idx, std::size_t n)
{
    const std::size_t m = idx.size();
    std::size_t i = m;
    while (i-- > 0) {
        if (idx[i] < n - m + i) {
            ++idx[i];
            for (std::size_t j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

std::vector<std::size_t> random_support(Philox4x32& g, std::size_t n, std::size_t m)
{
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(all[i], all[pick(g)]);
    }
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
}

} // namespace

REReport lower_re_certificate(const SymmetricMatrix& gram, std::size_t k, REMode mode, double alpha, double tau,
                              std::uint64_t seed)
{
    const std::size_t n = gram.dim();
    const std::size_t m = 2 * k;
    if (k < 1 || m > n) throw ArgumentError("lower_re_certificate: need k >= 1 and 2k <= dim");
    const double count = binomial(n, m);
    if (mode == REMode::automatic) mode = count <= kExactSupportBudget ? REMode::exact : REMode::randomized;
    if (mode == REMode::exact && count > kExactSupportBudget)
        throw BudgetError("lower_re_certificate: " + std::to_string(count) +
                          " supports exceed the exact budget; use randomized mode");

    Tracker tr{alpha, tau};
    REReport rep;
    rep.k = k;
    rep.alpha = alpha;
    rep.tau = tau;
    rep.mode = mode;

    if (mode == REMode::exact) {
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        do {
            tr.support(gram, idx);
            ++rep.supports_tested;
        } while (next_combination(idx, n));
    } else {
        Philox4x32 g(derive_key({seed, tag_hash("re-certificate")}));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> v(n, 0.0);
        for (std::size_t r = 0; r < kRandomVectors; ++r) {
            const auto idx = random_support(g, n, m);
            std::fill(v.begin(), v.end(), 0.0);
            for (std::size_t i : idx) v[i] = normal(g);
            const double nv = norm2(v);
            if (nv == 0.0) continue;
            for (double& x : v) x /= nv;
            tr.vector(gram.quadratic_form(v), norm1(v));
        }
        for (std::size_t r = 0; r < kRandomSupports; ++r) {
            tr.support(gram, random_support(g, n, m));
            ++rep.supports_tested;
        }
    }
    rep.min_sparse_eig = tr.min_eig;
    rep.min_margin = tr.min_margin;
    rep.vectors_tested = tr.vectors;
    rep.holds = tr.min_margin >= -1e-10;
    return rep;
}

REConstants re_constants(double K_X, double lambda_min, double c_beta, double C_B)
{
    if (!(K_X > 0.0 && lambda_min > 0.0 && c_beta > 0.0 && C_B > 0.0))
        throw ArgumentError("re_constants: inputs must be positive");
    REConstants r;
    r.b = std::min(lambda_min / (54.0 * K_X), 1.0);
    r.c_sub = std::min(C_B, 2.0);
    r.c = std::max(c_beta, r.c_sub * r.b * r.b) / 6.0;
    r.c_min = std::min(c_beta, r.c_sub * r.b * r.b) / 6.0;
    return r;
}

RETolerance re_tolerance(const REParams& in)
{
    if (!(in.T > 0.0 && in.p > 1.0)) throw ArgumentError("re_tolerance: need T > 0 and p > 1");
    const REConstants rc = re_constants(in.K_X, in.lambda_min, in.c_beta, in.C_B);
    RETolerance r;
    r.b = rc.b;
    r.c = rc.c;
    r.c_min = rc.c_min;
    r.c_sub = rc.c_sub;
    const double lp = std::log(in.p);
    r.required_T = (lp / rc.c) * (lp / rc.c);
    if (in.T < r.required_T) throw ThresholdError("re_tolerance: T below (log p / c)^2", r.required_T);
    const double root_T = std::sqrt(in.T);
    r.alpha2 = 0.5 * in.lambda_min;
    r.tau2 = 27.0 * rc.b * in.K_X * lp / (rc.c * root_T);
    r.tau2_min = 27.0 * rc.b * in.K_X * lp / (rc.c_min * root_T);
    r.prob_lower = 1.0 - 5.0 * std::exp(-rc.c_sub * rc.b * rc.b * root_T) -
                   2.0 * (root_T - 1.0) * std::exp(-0.5 * in.c_beta * root_T);
    r.prob_lower_stated = 1.0 - 5.0 * std::exp(-rc.c_sub * root_T) - 2.0 * (root_T - 1.0) * std::exp(-in.c_beta * root_T);
    return r;
}

double db_statistic(const DenseMatrix& X, const DenseMatrix& W)
{
    if (X.rows() != W.rows()) throw DimensionError("db_statistic: row counts differ");
    return kernels::cross_parallel(X, W).max_abs();
}

DBBound db_bound(double K, double C_B, double xi, double p, double q, double T, double c_beta)
{
    if (!(xi > 0.0 && xi < 1.0)) throw ArgumentError("db_bound: xi must lie in (0,1)");
    if (!(K > 0.0 && C_B > 0.0 && T > 0.0 && p * q > 1.0)) throw ArgumentError("db_bound: invalid constants");
    const double lpq = std::log(p * q);
    DBBound b;
    b.Q = std::sqrt(2.0 * std::pow(K, 4) / C_B);
    b.R = std::sqrt(lpq / std::pow(T, 1.0 - xi));
    const double first = std::pow(lpq * std::max(std::pow(K, 4) / (2.0 * C_B), K * K), 1.0 / (1.0 - xi));
    double threshold = first;
    if (c_beta > 0.0) {
        threshold = std::max(threshold, std::pow(2.0 / c_beta * lpq, 1.0 / xi));
        b.prob_lower = 1.0 - 15.0 * std::exp(-0.5 * lpq) -
                       6.0 * (std::pow(T, 1.0 - xi) - 1.0) * std::exp(-0.5 * c_beta * std::pow(T, xi));
    } else {
        b.prob_lower = std::numeric_limits<double>::quiet_NaN();
    }
    b.threshold_T = threshold;
    b.threshold_ok = T >= threshold;
    return b;
}

DBReport db_report(double stat, const DBBound& bound)
{
    return DBReport{stat, bound.Q, bound.R, stat <= bound.Q * bound.R};
}

double concentration_bound(double t, double K, double C_B, double c_beta, std::size_t mu, std::size_t a_T)
{
    if (!(t > 0.0 && K > 0.0)) throw ArgumentError("concentration_bound: need t > 0 and K > 0");
    const double m = static_cast<double>(mu);
    const double first = 4.0 * std::exp(-C_B * std::min(t * t * m / (K * K), t * m / K));
    const double second = 2.0 * (m - 1.0) * std::exp(-c_beta * static_cast<double>(a_T));
    const double third = std::exp(-2.0 * t * m / K);
    return first + second + third;
}

std::vector<double> concentration_deviations(const ModelSpec& spec, const ConcentrationSetup& s)
{
    const std::size_t p = observed_dim(spec);
    if (s.v.size() != p) throw DimensionError("concentration: direction has wrong length");
    if (std::abs(norm2(s.v) - 1.0) > 1e-10) throw ArgumentError("concentration: direction must be a unit vector");
    if (s.T == 0 || s.reps == 0) throw ArgumentError("concentration: need T >= 1 and reps >= 1");

    const double variance = observed_covariance(spec).quadratic_form(s.v);
    SimulationOptions opts;
    opts.burn_in = s.burn_in;

    std::vector<double> dev(s.reps, 0.0);
    std::vector<std::exception_ptr> errors(s.reps);
    const auto reps = static_cast<std::ptrdiff_t>(s.reps);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t rr = 0; rr < reps; ++rr) {
        const auto r = static_cast<std::size_t>(rr);
        try {
            const Series z = simulate(spec, s.T, derive_key({s.seed, r}), opts);
            double ss = 0.0;
            for (std::size_t t = 0; t < s.T; ++t) {
                const double x = dot(z.values.row(t), s.v);
                ss += x * x;
            }
            dev[r] = std::abs((ss - static_cast<double>(s.T) * variance) / static_cast<double>(s.T));
        } catch (...) {
            errors[r] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return dev;
}

ConcentrationReport summarize_tail(const std::vector<double>& deviations, double t, std::size_t T,
                                   std::size_t a_T, double K, double C_B, double c_beta)
{
    const BlockPartition part = blocking_indices(T, a_T);
    ConcentrationReport r;
    r.t = t;
    r.T = T;
    r.a_T = a_T;
    r.mu_T = part.mu;
    r.reps = deviations.size();
    r.exceed = static_cast<std::size_t>(
        std::count_if(deviations.begin(), deviations.end(), [t](double d) { return d > t; }));
    const double n = static_cast<double>(r.reps);
    r.empirical_tail = static_cast<double>(r.exceed) / n;
    const double qq = std::max(r.empirical_tail, 1.0 / n);
    r.binomial_sigma = std::sqrt(qq * (1.0 - std::min(qq, 1.0)) / n);
    r.K = K;
    r.C_B = C_B;
    r.c_beta = c_beta;
    r.bound = concentration_bound(t, K, C_B, c_beta, part.mu, a_T);
    return r;
}

ConcentrationReport concentration_tail_experiment(const ModelSpec& spec, const std::vector<double>& v,
                                                  std::size_t T, std::size_t a_T, double t, std::size_t reps,
                                                  std::uint64_t seed, double K, double C_B, double c_beta)
{
    if (!(t > 0.0)) throw ArgumentError("concentration: t must be > 0");
    if (reps < 100) throw ArgumentError("concentration: need at least 100 replicates");
    blocking_indices(T, a_T); // validates a_T before the expensive part
    ConcentrationSetup setup{v, T, reps, seed};
    return summarize_tail(concentration_deviations(spec, setup), t, T, a_T, K, C_B, c_beta);
}

double default_c_beta(const ModelSpec& spec)
{
    const DenseMatrix transition = std::visit(
        [](const auto& m) -> DenseMatrix {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GaussianVar>) return companion_form(m.coeffs);
            else if constexpr (std::is_same_v<M, OmittedVarVar>) return m.full_coeff;
            else return m.coeff;
        },
        spec);
    const double r = spectral_radius(transition);
    if (r >= 1.0) throw StabilityError("default_c_beta: process is not stable", r);
    if (r <= std::exp(-5.0)) return 5.0;
    return -std::log(r);
}

} // namespace tslasso
