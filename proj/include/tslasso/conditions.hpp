#pragma once

#include <tslasso/dgm.hpp>
#include <tslasso/matrix.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tslasso {

enum class REMode { exact, randomized, automatic };

std::string to_string(REMode mode);

/// Lower restricted eigenvalue check over 2k-sparse vectors.
///
/// This is the sparse-vector scope only. The extension to every v in R^p is
/// an analytic statement (see re_tolerance) and is not searched here.
struct REReport
{
    std::size_t k = 0;
    double min_sparse_eig = 0.0; // min over tested supports of lambda_min(Γ_SS)
    double alpha = 0.0;
    double tau = 0.0;
    bool holds = false;  // min over tested v of vᵀΓv - α||v||² + τ||v||_1² >= -1e-10
    double min_margin = 0.0;
    REMode mode = REMode::exact;
    std::size_t supports_tested = 0;
    std::size_t vectors_tested = 0;
};

inline constexpr double kExactSupportBudget = 1e5;
inline constexpr std::size_t kRandomVectors = 10000;
inline constexpr std::size_t kRandomSupports = 200;

/// C(n, m), saturating at +inf instead of overflowing.
double binomial(std::size_t n, std::size_t m);

/**
 * Exact mode enumerates every support of size 2k (C(dim, 2k) <= 1e5, else
 * BudgetError) and takes the smallest principal-submatrix eigenvalue; every
 * eigenvector of every support enters the inequality check. Randomized mode
 * draws 1e4 random 2k-sparse unit vectors plus the exact minima over 200
 * random supports. Automatic picks exact when the budget allows.
 */
REReport lower_re_certificate(const SymmetricMatrix& gram, std::size_t k, REMode mode, double alpha = 0.0,
                              double tau = 0.0, std::uint64_t seed = 0);

/// Constants shared by the RE tolerance and the Lasso sample-size condition.
struct REConstants
{
    double b = 0.0;
    double c_sub = 0.0;
    double c = 0.0;     // (1/6) max{c_beta, c_sub b²}, as stated
    double c_min = 0.0; // (1/6) min{c_beta, c_sub b²}, as used in the proof
};

REConstants re_constants(double K_X, double lambda_min, double c_beta, double C_B);

struct REParams
{
    double K_X = 0.0;
    double lambda_min = 0.0; // lambda_min(Sigma_X)
    double c_beta = 0.0;
    double C_B = 0.5;
    double T = 0.0;
    double p = 0.0;
};

struct RETolerance
{
    double alpha2 = 0.0;
    double tau2 = 0.0;      // with the stated c
    double tau2_min = 0.0;  // with the proof's c
    double b = 0.0;
    double c = 0.0;
    double c_min = 0.0;
    double c_sub = 0.0;
    double required_T = 0.0; // (log p / c)²
    /// 1 - 5 exp(-c_sub b² √T) - 2(√T - 1) exp(-c_beta √T / 2), from the proof.
    double prob_lower = 0.0;
    /// 1 - 5 exp(-c_sub √T) - 2(√T - 1) exp(-c_beta √T), as stated.
    double prob_lower_stated = 0.0;
};

/// Throws ThresholdError (carrying the required T) when T < (log p / c)².
RETolerance re_tolerance(const REParams& params);

/// (1/T) max |XᵀW|.
double db_statistic(const DenseMatrix& X, const DenseMatrix& W);

struct DBBound
{
    double Q = 0.0; // sqrt(2 K^4 / C_B)
    double R = 0.0; // sqrt(log(pq) / T^(1-xi))
    double threshold_T = 0.0;
    bool threshold_ok = false;
    /// 1 - 15 exp(-log(pq)/2) - 6 (T^(1-xi) - 1) exp(-c_beta T^xi / 2); NaN
    /// unless c_beta is supplied.
    double prob_lower = 0.0;
};

DBBound db_bound(double K, double C_B, double xi, double p, double q, double T, double c_beta = 0.0);

struct DBReport
{
    double stat = 0.0;
    double Q = 0.0;
    double R = 0.0;
    bool holds = false;
};

DBReport db_report(double stat, const DBBound& bound);

/// Three-term tail bound for the blocked sum of squares of a mixing
/// sequence with subgaussian norm at most sqrt(K).
double concentration_bound(double t, double K, double C_B, double c_beta, std::size_t mu, std::size_t a_T);

struct ConcentrationReport
{
    double t = 0.0;
    std::size_t T = 0;
    std::size_t a_T = 0;
    std::size_t mu_T = 0;
    std::size_t exceed = 0;
    std::size_t reps = 0;
    double empirical_tail = 0.0;
    double bound = 0.0;
    double K = 0.0;
    double C_B = 0.0;
    double c_beta = 0.0;
    double binomial_sigma = 0.0; // sqrt(max(q, 1/reps) (1 - q) / reps)
};

struct ConcentrationSetup
{
    std::vector<double> v; // unit projection direction
    std::size_t T = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::size_t burn_in = 500;
};

/// |(1/T)(Σ_t (vᵀZ_t)² - T vᵀΣ_Z v)| per replicate, replicates in parallel.
/// Replicate r uses stream derive_key({seed, r}).
std::vector<double> concentration_deviations(const ModelSpec& spec, const ConcentrationSetup& setup);

ConcentrationReport summarize_tail(const std::vector<double>& deviations, double t, std::size_t T,
                                   std::size_t a_T, double K, double C_B, double c_beta);

ConcentrationReport concentration_tail_experiment(const ModelSpec& spec, const std::vector<double>& v,
                                                  std::size_t T, std::size_t a_T, double t, std::size_t reps,
                                                  std::uint64_t seed, double K, double C_B, double c_beta);

/// -log r(Ã) clamped to (0, 5]; the default mixing rate used in reports.
double default_c_beta(const ModelSpec& spec);

} // namespace tslasso
