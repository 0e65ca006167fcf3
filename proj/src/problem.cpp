#include <tslasso/problem.hpp>

#include <tslasso/error.hpp>
#include <tslasso/kernels.hpp>
#include <tslasso/numerics.hpp>

#include <cmath>

namespace tslasso {

RegressionProblem build_problem(const Series& z, std::size_t d)
{
    if (d < 1 || d >= z.length()) throw ArgumentError("build_problem: need 1 <= d < series length");
    const std::size_t p = z.dim();
    const std::size_t n = z.length() - d;

    RegressionProblem prob;
    prob.lag = d;
    prob.X = DenseMatrix(n, p * d);
    prob.Y = DenseMatrix(n, p);
    for (std::size_t t = 0; t < n; ++t) {
        auto xr = prob.X.row(t);
        for (std::size_t k = 0; k < d; ++k) {
            const auto src = z.values.row(t + d - 1 - k);
            std::copy(src.begin(), src.end(), xr.begin() + static_cast<std::ptrdiff_t>(k * p));
        }
        const auto y = z.values.row(t + d);
        std::copy(y.begin(), y.end(), prob.Y.row(t).begin());
    }
    prob.gram = kernels::gram_parallel(prob.X);
    return prob;
}

namespace {

DenseMatrix stacked_transpose(const std::vector<DenseMatrix>& coeffs, std::size_t d)
{
    const std::size_t p = coeffs.front().rows();
    DenseMatrix theta(p * d, p);
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) theta(k * p + j, i) = coeffs[k](i, j);
    return theta;
}

} // namespace

DenseMatrix population_target(const ModelSpec& spec, std::size_t d)
{
    if (d < 1) throw ArgumentError("population_target: d must be >= 1");
    if (const auto* g = std::get_if<GaussianVar>(&spec)) {
        if (d < g->coeffs.size()) throw ArgumentError("population_target: d is below the model order");
        return stacked_transpose(g->coeffs, d);
    }
    if (const auto* s = std::get_if<SubgaussianVar>(&spec)) return stacked_transpose({s->coeff}, d);
    if (const auto* a = std::get_if<ClippedArch>(&spec)) return stacked_transpose({a->coeff}, d);

    const auto& o = std::get<OmittedVarVar>(spec);
    if (d != 1) throw UnsupportedError("population_target: omitted-variable target is defined for d = 1");
    const std::size_t p = o.retained;
    const std::size_t r = o.full_coeff.rows() - p;
    const OmittedPartition part = omitted_partition(o);
    if (!(min_eigen_sym(part.sigma_z) > 0.0)) throw NumericError("population_target: Sigma_Z is singular", 0.0);
    // (Θ*)ᵀ = A_ZZ + A_ZΞ Σ_ΞZ Σ_Z⁻¹; Σ_Z⁻¹ Σ_ZΞ solves for the transpose.
    const DenseMatrix m = solve_spd(part.sigma_z, part.sigma_xi_z.transpose());
    DenseMatrix target_t = o.full_coeff.block(0, 0, p, p);
    target_t += matmul(o.full_coeff.block(0, p, p, r), m.transpose());
    return target_t.transpose();
}

DenseMatrix residuals(RegressionProblem& prob, const DenseMatrix& theta_star)
{
    if (theta_star.rows() != prob.X.cols() || theta_star.cols() != prob.Y.cols())
        throw DimensionError("residuals: theta has wrong shape");
    DenseMatrix w = prob.Y;
    w -= matmul(prob.X, theta_star);
    prob.theta_star = theta_star;
    prob.W = w;
    return w;
}

SubgaussianConstants subgaussian_constants(const ModelSpec& spec, const DenseMatrix& theta_star, std::size_t d)
{
    SubgaussianConstants k;
    double root_x = 0.0, root_y = 0.0;
    if (const auto* g = std::get_if<GaussianVar>(&spec)) {
        // X_t is the companion state (padded with further lags if d > order);
        // its covariance has the same top eigenvalue bound as Σ̃ for the
        // stacked lags actually used.
        GaussianVar padded = *g;
        const std::size_t p = g->noise_cov.dim();
        while (padded.coeffs.size() < d) padded.coeffs.emplace_back(p, p);
        const SymmetricMatrix sx = stationary_covariance(padded);
        const SymmetricMatrix sy = observed_covariance(*g);
        root_x = scalar_subgaussian_norm(DistributionSpec::gaussian(max_eigen_sym(sx)));
        root_y = scalar_subgaussian_norm(DistributionSpec::gaussian(max_eigen_sym(sy)));
        k.basis = "exact-gaussian";
    } else {
        double ke = 0.0, a_norm = 0.0;
        if (const auto* s = std::get_if<SubgaussianVar>(&spec)) {
            ke = scalar_subgaussian_norm(s->innovation);
            a_norm = operator_norm(s->coeff);
        } else if (const auto* o = std::get_if<OmittedVarVar>(&spec)) {
            ke = scalar_subgaussian_norm(o->innovation);
            a_norm = operator_norm(o->full_coeff);
        } else {
            const auto& a = std::get<ClippedArch>(spec);
            ke = scalar_subgaussian_norm(a.innovation) * a.scale * a.clip_hi;
            a_norm = operator_norm(a.coeff);
        }
        if (a_norm >= 1.0) throw StabilityError("subgaussian_constants: |||A||| >= 1", a_norm);
        root_y = ke / (1.0 - a_norm);
        root_x = std::sqrt(static_cast<double>(d)) * root_y;
        k.basis = "analytic-upper";
    }
    k.K_X = root_x * root_x;
    k.K_Y = root_y * root_y;
    k.K_composite = root_y + root_x * (1.0 + operator_norm(theta_star));
    return k;
}

} // namespace tslasso
