#include <tslasso/lasso.hpp>

#include <tslasso/conditions.hpp>
#include <tslasso/error.hpp>
#include <tslasso/kernels.hpp>
#include <tslasso/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <exception>

namespace tslasso {

namespace {

struct ColumnResult
{
    std::vector<double> theta;
    std::size_t sweeps = 0;
    bool converged = false;
    std::vector<double> trace;
};

class ColumnSolver
{
public:
    ColumnSolver(const DenseMatrix& gram, std::vector<double> c, double yy, const LassoConfig& cfg)
        : gram_(gram), c_(std::move(c)), yy_(yy), cfg_(cfg), n_(gram.rows())
    {}

    ColumnResult run(std::vector<double> theta)
    {
        for (std::size_t j = 0; j < n_; ++j)
            if (gram_(j, j) <= 0.0 && c_[j] != 0.0)
                throw DegenerateColumnError("lasso: zero design column correlates with the response", j);

        theta_ = std::move(theta);
        refresh_gradient();
        ColumnResult out;
        auto record = [&] {
            if (cfg_.record_objective) out.trace.push_back(objective());
        };
        record();

        while (out.sweeps < cfg_.max_sweeps) {
            const double change = sweep(all_indices());
            ++out.sweeps;
            record();
            if (change < cfg_.tol) {
                // Incremental updates drift slightly; verify on a fresh gradient.
                refresh_gradient();
                if (kkt() <= cfg_.tol) {
                    out.converged = true;
                    break;
                }
                continue;
            }
            while (out.sweeps < cfg_.max_sweeps) {
                const double active_change = sweep(active_indices());
                ++out.sweeps;
                record();
                if (active_change < cfg_.tol) break;
            }
        }
        out.theta = std::move(theta_);
        return out;
    }

private:
    std::vector<std::size_t> all_indices() const
    {
        std::vector<std::size_t> idx(n_);
        for (std::size_t j = 0; j < n_; ++j) idx[j] = j;
        if (cfg_.order == LassoConfig::Order::reversed) std::reverse(idx.begin(), idx.end());
        return idx;
    }

    std::vector<std::size_t> active_indices() const
    {
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < n_; ++j)
            if (theta_[j] != 0.0) idx.push_back(j);
        if (cfg_.order == LassoConfig::Order::reversed) std::reverse(idx.begin(), idx.end());
        return idx;
    }

    double sweep(const std::vector<std::size_t>& idx)
    {
        const double half = 0.5 * cfg_.lambda;
        double max_change = 0.0;
        for (std::size_t j : idx) {
            const double gjj = gram_(j, j);
            if (gjj <= 0.0) continue;
            const double rho = c_[j] - (g_[j] - gjj * theta_[j]);
            const double updated = soft_threshold(rho, half) / gjj;
            const double delta = updated - theta_[j];
            if (delta == 0.0) continue;
            theta_[j] = updated;
            const auto row = gram_.row(j);
            for (std::size_t l = 0; l < n_; ++l) g_[l] += row[l] * delta;
            max_change = std::max(max_change, std::abs(delta));
        }
        return max_change;
    }

    void refresh_gradient()
    {
        g_.assign(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            if (theta_[j] == 0.0) continue;
            const auto row = gram_.row(j);
            for (std::size_t l = 0; l < n_; ++l) g_[l] += row[l] * theta_[j];
        }
    }

    double kkt() const
    {
        double worst = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            const double grad = 2.0 * (g_[j] - c_[j]);
            const double v = theta_[j] != 0.0 ? std::abs(grad + cfg_.lambda * std::copysign(1.0, theta_[j]))
                                               : std::max(std::abs(grad) - cfg_.lambda, 0.0);
            worst = std::max(worst, v);
        }
        return worst;
    }

    // θᵀΓθ - 2cᵀθ + yᵀy/T + λ||θ||_1, using the maintained Γθ.
    double objective() const { return dot(theta_, g_) - 2.0 * dot(c_, theta_) + yy_ + cfg_.lambda * norm1(theta_); }

    const DenseMatrix& gram_;
    std::vector<double> c_;
    double yy_;
    const LassoConfig& cfg_;
    std::size_t n_;
    std::vector<double> theta_;
    std::vector<double> g_;
};

void check_config(const LassoConfig& cfg)
{
    if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) throw ArgumentError("lasso: lambda must be finite and >= 0");
    if (!(cfg.tol > 0.0)) throw ArgumentError("lasso: tol must be > 0");
}

struct Prepared
{
    DenseMatrix gram;  // dense copy; row j is column j
    DenseMatrix cross; // XᵀY / T
    std::vector<double> yy;
};

Prepared prepare(const DenseMatrix& X, const DenseMatrix& Y, const SymmetricMatrix* gram, bool parallel)
{
    if (X.rows() != Y.rows()) throw DimensionError("lasso: X and Y row counts differ");
    if (X.rows() == 0) throw DimensionError("lasso: empty design");
    Prepared p;
    if (gram) {
        if (gram->dim() != X.cols()) throw DimensionError("lasso: Gram matrix has wrong dimension");
        p.gram = gram->to_dense();
    } else {
        p.gram = (parallel ? kernels::gram_parallel(X) : kernels::gram_serial(X)).to_dense();
    }
    p.cross = parallel ? kernels::cross_parallel(X, Y) : kernels::cross_serial(X, Y);
    p.yy.assign(Y.cols(), 0.0);
    const double inv = 1.0 / static_cast<double>(Y.rows());
    for (std::size_t k = 0; k < Y.cols(); ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t < Y.rows(); ++t) acc += Y(t, k) * Y(t, k);
        p.yy[k] = acc * inv;
    }
    return p;
}

std::vector<double> column_of(const DenseMatrix& m, std::size_t k)
{
    std::vector<double> v(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, k);
    return v;
}

ColumnResult solve_one(const Prepared& prep, const LassoConfig& cfg, std::size_t k)
{
    const std::size_t n = prep.gram.rows();
    std::vector<double> init(n, 0.0);
    if (cfg.warm_start) init = column_of(*cfg.warm_start, k);
    ColumnSolver solver(prep.gram, column_of(prep.cross, k), prep.yy[k], cfg);
    return solver.run(std::move(init));
}

LassoSolution assemble(std::vector<ColumnResult>& cols, const Prepared& prep, const DenseMatrix& X,
                       const DenseMatrix& Y, const LassoConfig& cfg)
{
    const std::size_t n = prep.gram.rows(), q = cols.size();
    LassoSolution sol;
    sol.theta_hat = DenseMatrix(n, q);
    sol.converged = true;
    for (std::size_t k = 0; k < q; ++k) {
        for (std::size_t j = 0; j < n; ++j) sol.theta_hat(j, k) = cols[k].theta[j];
        sol.sweeps = std::max(sol.sweeps, cols[k].sweeps);
        sol.converged = sol.converged && cols[k].converged;
        if (cfg.record_objective) sol.objective_trace.push_back(std::move(cols[k].trace));
    }
    sol.active_set_size = sol.theta_hat.count_nonzero();
    sol.objective = lasso_objective(X, Y, sol.theta_hat, cfg.lambda);

    // G = 2 (Γ Θ - XᵀY/T), the same gradient as (2/T) Xᵀ(XΘ - Y).
    double worst = 0.0;
    for (std::size_t k = 0; k < q; ++k)
        for (std::size_t j = 0; j < n; ++j) {
            double gt = 0.0;
            const auto row = prep.gram.row(j);
            for (std::size_t l = 0; l < n; ++l)
                if (sol.theta_hat(l, k) != 0.0) gt += row[l] * sol.theta_hat(l, k);
            const double grad = 2.0 * (gt - prep.cross(j, k));
            const double th = sol.theta_hat(j, k);
            const double v = th != 0.0 ? std::abs(grad + cfg.lambda * std::copysign(1.0, th))
                                       : std::max(std::abs(grad) - cfg.lambda, 0.0);
            worst = std::max(worst, v);
        }
    sol.kkt_residual = worst;
    return sol;
}

void check_warm_start(const LassoConfig& cfg, const DenseMatrix& X, const DenseMatrix& Y)
{
    if (cfg.warm_start && (cfg.warm_start->rows() != X.cols() || cfg.warm_start->cols() != Y.cols()))
        throw DimensionError("lasso: warm start has wrong shape");
}

LassoSolution solve_impl(const DenseMatrix& X, const DenseMatrix& Y, const SymmetricMatrix* gram, const LassoConfig& cfg)
{
    check_config(cfg);
    check_warm_start(cfg, X, Y);
    const Prepared prep = prepare(X, Y, gram, true);
    const std::size_t q = Y.cols();
    std::vector<ColumnResult> cols(q);
    std::vector<std::exception_ptr> errors(q);
    const auto qq = static_cast<std::ptrdiff_t>(q);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t kk = 0; kk < qq; ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        try {
            cols[k] = solve_one(prep, cfg, k);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return assemble(cols, prep, X, Y, cfg);
}

} // namespace

LassoSolution solve(const DenseMatrix& X, const DenseMatrix& Y, const LassoConfig& cfg)
{
    return solve_impl(X, Y, nullptr, cfg);
}

LassoSolution solve(const RegressionProblem& prob, const LassoConfig& cfg)
{
    return solve_impl(prob.X, prob.Y, &prob.gram, cfg);
}

LassoSolution solve_serial(const DenseMatrix& X, const DenseMatrix& Y, const LassoConfig& cfg)
{
    check_config(cfg);
    check_warm_start(cfg, X, Y);
    const Prepared prep = prepare(X, Y, nullptr, false);
    std::vector<ColumnResult> cols;
    for (std::size_t k = 0; k < Y.cols(); ++k) cols.push_back(solve_one(prep, cfg, k));
    return assemble(cols, prep, X, Y, cfg);
}

namespace {

// Y - X Θ, touching only the nonzero rows of Θ.
DenseMatrix residual_matrix(const DenseMatrix& X, const DenseMatrix& Y, const DenseMatrix& theta)
{
    if (X.rows() != Y.rows() || theta.rows() != X.cols() || theta.cols() != Y.cols())
        throw DimensionError("lasso: X, Y and theta shapes disagree");
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < theta.rows(); ++j) {
        const auto r = theta.row(j);
        if (std::any_of(r.begin(), r.end(), [](double v) { return v != 0.0; })) support.push_back(j);
    }
    DenseMatrix r = Y;
    for (std::size_t t = 0; t < X.rows(); ++t) {
        auto rt = r.row(t);
        for (std::size_t j : support) {
            const double x = X(t, j);
            if (x == 0.0) continue;
            const auto th = theta.row(j);
            for (std::size_t k = 0; k < rt.size(); ++k) rt[k] -= x * th[k];
        }
    }
    return r;
}

} // namespace

double lasso_objective(const DenseMatrix& X, const DenseMatrix& Y, const DenseMatrix& theta, double lambda)
{
    const DenseMatrix r = residual_matrix(X, Y, theta);
    double ss = 0.0;
    for (double v : r.data()) ss += v * v;
    return ss / static_cast<double>(X.rows()) + lambda * norm1(theta.data());
}

double kkt_residual(const DenseMatrix& X, const DenseMatrix& Y, const DenseMatrix& theta, double lambda)
{
    DenseMatrix r = residual_matrix(X, Y, theta); // Y - XΘ
    const DenseMatrix g = kernels::cross_parallel(X, r); // Xᵀ(Y - XΘ)/T
    double worst = 0.0;
    for (std::size_t j = 0; j < theta.rows(); ++j)
        for (std::size_t k = 0; k < theta.cols(); ++k) {
            const double grad = -2.0 * g(j, k);
            const double th = theta(j, k);
            const double v = th != 0.0 ? std::abs(grad + lambda * std::copysign(1.0, th))
                                       : std::max(std::abs(grad) - lambda, 0.0);
            worst = std::max(worst, v);
        }
    return worst;
}

ErrorMetrics error_metrics(const DenseMatrix& theta_hat, const DenseMatrix& theta_star, const SymmetricMatrix& gram)
{
    if (theta_hat.rows() != theta_star.rows() || theta_hat.cols() != theta_star.cols())
        throw DimensionError("error_metrics: estimate and target shapes differ");
    if (gram.dim() != theta_hat.rows()) throw DimensionError("error_metrics: Gram matrix has wrong dimension");
    const DenseMatrix delta = theta_hat - theta_star;
    ErrorMetrics m;
    m.l2_err = delta.frobenius_norm();
    const DenseMatrix inner = matmul_tn(delta, matmul(gram.to_dense(), delta));
    const double f = inner.frobenius_norm();
    m.pred_err = f * f;
    return m;
}

double estimation_bound(std::size_t s, double lambda_T, double alpha)
{
    return 4.0 * std::sqrt(static_cast<double>(s)) * lambda_T / alpha;
}

double prediction_bound(std::size_t s, double lambda_T, double alpha)
{
    return 32.0 * lambda_T * lambda_T * static_cast<double>(s) / alpha;
}

BoundReport theoretical_bounds(std::size_t s, const BoundConstants& c)
{
    if (!(c.xi > 0.0 && c.xi < 1.0)) throw ArgumentError("theoretical_bounds: xi must lie in (0,1)");
    if (!(c.K > 0.0 && c.C_B > 0.0 && c.p >= 1.0 && c.q >= 1.0 && c.T > 0.0 && c.c_beta > 0.0) || s == 0)
        throw ArgumentError("theoretical_bounds: constants must be positive");
    const double alpha = c.alpha > 0.0 ? c.alpha : 0.5 * c.lambda_min;
    if (!(alpha > 0.0)) throw ArgumentError("theoretical_bounds: need alpha or lambda_min");

    const DBBound db = db_bound(c.K, c.C_B, c.xi, c.p, c.q, c.T);
    BoundReport r;
    r.alpha = alpha;
    r.C_B = c.C_B;
    r.Q = db.Q;
    r.R = db.R;
    r.lambda_T = 4.0 * db.Q * db.R;
    r.est_error_bound = estimation_bound(s, r.lambda_T, alpha);
    r.pred_error_bound = prediction_bound(s, r.lambda_T, alpha);

    double threshold = db.threshold_T;
    const double c_sub = std::min(c.C_B, 2.0);
    if (c.K_X > 0.0 && c.lambda_min > 0.0) {
        const REConstants re = re_constants(c.K_X, c.lambda_min, c.c_beta, c.C_B);
        const double lp = std::log(c.p);
        const double ratio = 1728.0 * static_cast<double>(s) * re.b * c.K_X / c.lambda_min;
        threshold = std::max(threshold, (lp / re.c) * (lp / re.c) * std::max(ratio * ratio, 1.0));
        r.tau = 27.0 * re.b * c.K_X * lp / (re.c * std::sqrt(c.T));
    }
    r.sample_threshold = threshold;
    r.sample_threshold_ok = c.T >= threshold;
    r.curvature_ok = alpha >= 32.0 * static_cast<double>(s) * r.tau;

    const double c_tilde = std::min(c_sub, c.c_beta);
    const double root_T = std::sqrt(c.T);
    r.prob_lower = db.prob_lower - 5.0 * (root_T - 1.0) * std::exp(-c_tilde * root_T);
    return r;
}

} // namespace tslasso
