#include <tslasso/dgm.hpp>

#include <tslasso/error.hpp>
#include <tslasso/numerics.hpp>
#include <tslasso/rng.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

namespace tslasso {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};

// Nonzeros of each row, in ascending column order.
using SparseRows = std::vector<std::vector<std::pair<std::size_t, double>>>;

SparseRows sparse_rows(const DenseMatrix& m)
{
    SparseRows rows(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) rows[i].emplace_back(j, m(i, j));
    return rows;
}

SymmetricMatrix block_diag_noise(const SymmetricMatrix& top, std::size_t total)
{
    SymmetricMatrix q(total);
    for (std::size_t i = 0; i < top.dim(); ++i)
        for (std::size_t j = i; j < top.dim(); ++j) q(i, j) = top(i, j);
    return q;
}

SymmetricMatrix scaled_identity(std::size_t n, double v)
{
    SymmetricMatrix q(n);
    for (std::size_t i = 0; i < n; ++i) q(i, i) = v;
    return q;
}

void check_square(const DenseMatrix& a, const char* what)
{
    if (!a.is_square() || a.empty()) throw DimensionError(std::string(what) + ": coefficient matrix must be square and non-empty");
}

StateDynamics dynamics(const ModelSpec& spec)
{
    return std::visit(
        overloaded{
            [](const GaussianVar& g) {
                DenseMatrix comp = companion_form(g.coeffs);
                if (g.noise_cov.dim() != g.coeffs.front().rows())
                    throw DimensionError("GaussianVar: noise covariance has wrong dimension");
                return StateDynamics{std::move(comp), block_diag_noise(g.noise_cov, g.coeffs.size() * g.noise_cov.dim())};
            },
            [](const SubgaussianVar& s) {
                check_square(s.coeff, "SubgaussianVar");
                return StateDynamics{s.coeff, scaled_identity(s.coeff.rows(), s.innovation.var())};
            },
            [](const OmittedVarVar& o) {
                check_square(o.full_coeff, "OmittedVarVar");
                if (o.retained == 0 || o.retained >= o.full_coeff.rows())
                    throw DimensionError("OmittedVarVar: retained must be in [1, dim)");
                return StateDynamics{o.full_coeff, scaled_identity(o.full_coeff.rows(), o.innovation.var())};
            },
            [](const ClippedArch&) -> StateDynamics {
                throw UnsupportedError("ClippedArch: state-dependent noise has no closed-form covariance");
            },
        },
        spec);
}

class InnovationSampler
{
public:
    explicit InnovationSampler(const DistributionSpec& d) : dist_(d)
    {
        if (d.family == DistributionSpec::Family::gaussian)
            sd_ = std::sqrt(d.variance);
    }

    template <class Engine>
    double operator()(Engine& g)
    {
        if (dist_.family == DistributionSpec::Family::gaussian) {
            if (sd_ == 0.0) return 0.0;
            return sd_ * normal_(g);
        }
        return uniform_(g);
    }

private:
    DistributionSpec dist_;
    double sd_ = 0.0;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{dist_.lo, dist_.hi};
};

void check_length(std::size_t T)
{
    if (T == 0) throw ArgumentError("simulate: T must be >= 1");
}

void require_stable(const DenseMatrix& transition, const char* what)
{
    const double r = spectral_radius(transition);
    if (r >= 1.0) throw StabilityError(std::string(what) + ": spectral radius >= 1", r);
}

std::vector<double> start_state(const SimulationOptions& opts, std::size_t n)
{
    if (!opts.initial_state) return std::vector<double>(n, 0.0);
    if (opts.initial_state->size() != n) throw DimensionError("simulate: initial_state has wrong length");
    return *opts.initial_state;
}

SimulationTrace simulate_gaussian(const GaussianVar& g, std::size_t T, std::uint64_t seed,
                                  const SimulationOptions& opts)
{
    const StateDynamics dyn = dynamics(g);
    const std::size_t p = g.noise_cov.dim();
    const std::size_t n = dyn.transition.rows();
    require_stable(dyn.transition, "GaussianVar");

    Philox4x32 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Lag buffer (Z_{t-1}; ...; Z_{t-d}); the top block row of the companion
    // matrix acts on it directly.
    std::vector<double> state(n, 0.0);
    if (opts.initial_state) {
        state = start_state(opts, n);
    } else {
        const SymmetricMatrix sigma = solve_discrete_lyapunov(dyn.transition, dyn.noise_cov);
        const DenseMatrix l0 = cholesky_psd(sigma);
        std::vector<double> z(n, 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (l0(j, j) > 0.0) z[j] = normal(engine);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= i; ++j)
                if (l0(j, j) > 0.0) acc += l0(i, j) * z[j];
            state[i] = acc;
        }
    }

    const DenseMatrix l = cholesky_psd(g.noise_cov);
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < p; ++j)
        if (l(j, j) > 0.0) active.push_back(j);

    const SparseRows top = [&] {
        SparseRows rows = sparse_rows(dyn.transition);
        rows.resize(p);
        return rows;
    }();

    SimulationTrace out;
    out.series.values = DenseMatrix(T, n == p * g.coeffs.size() ? p : n);
    if (opts.record_innovations) out.innovations = DenseMatrix(T, p);

    std::vector<double> draws(p, 0.0), noise(p, 0.0), next(p, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j : active) draws[j] = normal(engine);
        for (std::size_t i = 0; i < p; ++i) {
            double acc = 0.0;
            for (std::size_t j : active) {
                if (j > i) break;
                acc += l(i, j) * draws[j];
            }
            noise[i] = acc;
        }
        for (std::size_t i = 0; i < p; ++i) {
            double acc = 0.0;
            for (const auto& [j, v] : top[i]) acc += v * state[j];
            next[i] = acc + noise[i];
        }
        std::copy_backward(state.begin(), state.end() - static_cast<std::ptrdiff_t>(p), state.end());
        std::copy(next.begin(), next.end(), state.begin());
        auto row = out.series.values.row(t);
        std::copy(next.begin(), next.end(), row.begin());
        if (opts.record_innovations) std::copy(noise.begin(), noise.end(), out.innovations.row(t).begin());
    }
    return out;
}

// Shared recursion for the burn-in variants: x_t = A x_{t-1} + s(x_{t-1}) e_t.
template <class ScaleFn>
SimulationTrace simulate_burn_in(const DenseMatrix& a, const DistributionSpec& innovation,
                                 std::size_t observed, ScaleFn scale_of, bool record_scales,
                                 std::size_t T, std::uint64_t seed, const SimulationOptions& opts)
{
    const std::size_t n = a.rows();
    const SparseRows rows = sparse_rows(a);
    Philox4x32 engine(seed);
    InnovationSampler sample(innovation);

    std::vector<double> state = start_state(opts, n);
    std::vector<double> next(n), eps(n);

    SimulationTrace out;
    out.series.values = DenseMatrix(T, observed);
    if (opts.record_innovations) out.innovations = DenseMatrix(T, observed);
    if (record_scales) out.noise_scales.reserve(T);

    const std::size_t total = opts.burn_in + T;
    for (std::size_t step = 0; step < total; ++step) {
        const double scale = scale_of(state);
        for (std::size_t i = 0; i < n; ++i) eps[i] = sample(engine);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (const auto& [j, v] : rows[i]) acc += v * state[j];
            next[i] = acc + scale * eps[i];
        }
        state.swap(next);
        if (step < opts.burn_in) continue;
        const std::size_t t = step - opts.burn_in;
        std::copy_n(state.begin(), observed, out.series.values.row(t).begin());
        if (opts.record_innovations) {
            auto r = out.innovations.row(t);
            for (std::size_t i = 0; i < observed; ++i) r[i] = scale * eps[i];
        }
        if (record_scales) out.noise_scales.push_back(scale);
    }
    return out;
}

void require_centered(const DistributionSpec& d)
{
    if (d.mean() != 0.0) throw ArgumentError("innovation distribution must have mean zero");
}

} // namespace

std::string_view model_tag(const ModelSpec& spec)
{
    return std::visit(overloaded{
                          [](const GaussianVar&) { return std::string_view("gaussian_var"); },
                          [](const SubgaussianVar&) { return std::string_view("subgaussian_var"); },
                          [](const OmittedVarVar&) { return std::string_view("omitted_var"); },
                          [](const ClippedArch&) { return std::string_view("arch"); },
                      },
                      spec);
}

std::size_t observed_dim(const ModelSpec& spec)
{
    return std::visit(overloaded{
                          [](const GaussianVar& g) { return g.coeffs.empty() ? std::size_t{0} : g.coeffs.front().rows(); },
                          [](const SubgaussianVar& s) { return s.coeff.rows(); },
                          [](const OmittedVarVar& o) { return o.retained; },
                          [](const ClippedArch& a) { return a.coeff.rows(); },
                      },
                      spec);
}

std::size_t model_order(const ModelSpec& spec)
{
    if (const auto* g = std::get_if<GaussianVar>(&spec)) return g->coeffs.size();
    return 1;
}

DenseMatrix companion_form(const std::vector<DenseMatrix>& coeff_mats)
{
    if (coeff_mats.empty()) throw DimensionError("companion_form: need at least one coefficient matrix");
    const std::size_t p = coeff_mats.front().rows();
    const std::size_t d = coeff_mats.size();
    for (const auto& a : coeff_mats)
        if (a.rows() != p || a.cols() != p) throw DimensionError("companion_form: all blocks must be p x p");
    DenseMatrix comp(d * p, d * p);
    for (std::size_t k = 0; k < d; ++k) comp.set_block(0, k * p, coeff_mats[k]);
    for (std::size_t k = 1; k < d; ++k)
        for (std::size_t i = 0; i < p; ++i) comp(k * p + i, (k - 1) * p + i) = 1.0;
    return comp;
}

bool ValidationReport::ok() const
{
    return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* ValidationReport::find(std::string_view name) const
{
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate_model(const ModelSpec& spec)
{
    ValidationReport rep;
    auto add = [&rep](std::string name, bool passed, double value, double margin, std::string detail) {
        rep.checks.push_back({std::move(name), passed, value, margin, std::move(detail)});
    };

    StateDynamics dyn;
    try {
        dyn.transition = std::visit(overloaded{
                                        [](const GaussianVar& g) { return companion_form(g.coeffs); },
                                        [](const SubgaussianVar& s) { return s.coeff; },
                                        [](const OmittedVarVar& o) { return o.full_coeff; },
                                        [](const ClippedArch& a) { return a.coeff; },
                                    },
                                    spec);
        if (!dyn.transition.is_square() || dyn.transition.empty())
            throw DimensionError("coefficient matrix must be square and non-empty");
        if (const auto* g = std::get_if<GaussianVar>(&spec); g && g->noise_cov.dim() != g->coeffs.front().rows())
            throw DimensionError("noise covariance has wrong dimension");
        if (const auto* o = std::get_if<OmittedVarVar>(&spec); o && (o->retained == 0 || o->retained >= o->full_coeff.rows()))
            throw DimensionError("retained must be in [1, dim)");
    } catch (const Error& e) {
        add("shapes", false, 0.0, -1.0, e.what());
        return rep;
    }
    add("shapes", true, 0.0, 0.0, "");

    bool stable = false;
    if (std::holds_alternative<GaussianVar>(spec)) {
        const double r = spectral_radius(dyn.transition);
        stable = r < 1.0;
        add("stability", stable, r, 1.0 - r, "spectral radius of companion matrix < 1");
        const auto& g = std::get<GaussianVar>(spec);
        const double lmin = min_eigen_sym(g.noise_cov);
        add("noise_covariance", lmin > 0.0, lmin, lmin, "lambda_min(noise covariance) > 0");
    } else {
        const double nrm = operator_norm(dyn.transition);
        stable = nrm < 1.0;
        add("stability", stable, nrm, 1.0 - nrm, "operator norm of coefficient matrix < 1");
        const DistributionSpec& innov = std::visit(
            overloaded{
                [](const SubgaussianVar& s) -> const DistributionSpec& { return s.innovation; },
                [](const OmittedVarVar& o) -> const DistributionSpec& { return o.innovation; },
                [](const ClippedArch& a) -> const DistributionSpec& { return a.innovation; },
                [](const GaussianVar&) -> const DistributionSpec& { throw std::logic_error("unreachable"); },
            },
            spec);
        add("innovation_centered", innov.mean() == 0.0, innov.mean(), -std::abs(innov.mean()),
            "innovation mean is zero");
        add("innovation_nondegenerate", innov.var() > 0.0, innov.var(), innov.var(), "innovation variance > 0");
    }

    // Sparsity of the population target implied by the model.
    double nnz = 0.0;
    std::string sparsity_detail = "nonzeros of the population target";
    bool sparsity_ok = true;
    std::visit(overloaded{
                   [&](const GaussianVar& g) {
                       for (const auto& a : g.coeffs) nnz += static_cast<double>(a.count_nonzero());
                   },
                   [&](const SubgaussianVar& s) { nnz = static_cast<double>(s.coeff.count_nonzero()); },
                   [&](const ClippedArch& a) { nnz = static_cast<double>(a.coeff.count_nonzero()); },
                   [&](const OmittedVarVar& o) {
                       if (!stable) {
                           sparsity_ok = false;
                           sparsity_detail = "target undefined for an unstable model";
                           return;
                       }
                       const OmittedPartition part = omitted_partition(o);
                       const std::size_t p = o.retained;
                       const std::size_t r = o.full_coeff.rows() - p;
                       const DenseMatrix azz = o.full_coeff.block(0, 0, p, p);
                       const DenseMatrix azx = o.full_coeff.block(0, p, p, r);
                       // (Theta*)' = A_ZZ + A_ZXi Sigma_XiZ Sigma_Z^{-1}
                       const DenseMatrix m = solve_spd(part.sigma_z, part.sigma_xi_z.transpose()).transpose();
                       const DenseMatrix t = azz + matmul(azx, m);
                       for (double v : t.data())
                           if (std::abs(v) > 1e-12) nnz += 1.0;
                   },
               },
               spec);
    add("sparsity", sparsity_ok, nnz, 0.0, sparsity_detail);

    if (const auto* a = std::get_if<ClippedArch>(&spec)) {
        const double m = a->exponent;
        add("arch_exponent", m > 0.0 && m < 1.0, m, std::min(m, 1.0 - m), "m in (0,1)");
        add("arch_clip", a->clip_lo > 0.0 && a->clip_hi > a->clip_lo, a->clip_hi - a->clip_lo,
            std::min(a->clip_lo, a->clip_hi - a->clip_lo), "0 < a < b");
        add("arch_scale", a->scale > 0.0, a->scale, a->scale, "c > 0");
    }
    return rep;
}

SymmetricMatrix stationary_covariance(const ModelSpec& spec)
{
    const StateDynamics dyn = dynamics(spec);
    return solve_discrete_lyapunov(dyn.transition, dyn.noise_cov);
}

OmittedPartition omitted_partition(const OmittedVarVar& spec)
{
    const SymmetricMatrix full = stationary_covariance(spec);
    const std::size_t p = spec.retained;
    const std::size_t r = full.dim() - p;
    OmittedPartition out{SymmetricMatrix(p), DenseMatrix(r, p), SymmetricMatrix(r)};
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) out.sigma_z(i, j) = full(i, j);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t j = 0; j < p; ++j) out.sigma_xi_z(a, j) = full(p + a, j);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t b = a; b < r; ++b) out.sigma_xi(a, b) = full(p + a, p + b);
    return out;
}

SymmetricMatrix observed_covariance(const ModelSpec& spec)
{
    const SymmetricMatrix full = stationary_covariance(spec);
    const std::size_t p = observed_dim(spec);
    SymmetricMatrix out(p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) out(i, j) = full(i, j);
    return out;
}

SimulationTrace simulate_traced(const ModelSpec& spec, std::size_t T, std::uint64_t seed,
                                const SimulationOptions& opts)
{
    check_length(T);
    SimulationTrace trace = std::visit(
        overloaded{
            [&](const GaussianVar& g) { return simulate_gaussian(g, T, seed, opts); },
            [&](const SubgaussianVar& s) {
                check_square(s.coeff, "SubgaussianVar");
                require_centered(s.innovation);
                require_stable(s.coeff, "SubgaussianVar");
                return simulate_burn_in(s.coeff, s.innovation, s.coeff.rows(),
                                        [](const std::vector<double>&) { return 1.0; }, false, T, seed, opts);
            },
            [&](const OmittedVarVar& o) {
                dynamics(o); // shape checks
                require_centered(o.innovation);
                require_stable(o.full_coeff, "OmittedVarVar");
                return simulate_burn_in(o.full_coeff, o.innovation, o.retained,
                                        [](const std::vector<double>&) { return 1.0; }, false, T, seed, opts);
            },
            [&](const ClippedArch& a) {
                check_square(a.coeff, "ClippedArch");
                require_centered(a.innovation);
                require_stable(a.coeff, "ClippedArch");
                if (!(a.scale > 0.0) || !(a.clip_lo > 0.0) || a.clip_hi < a.clip_lo)
                    throw ArgumentError("ClippedArch: need c > 0 and 0 < a <= b");
                const double c = a.scale, m = a.exponent, lo = a.clip_lo, hi = a.clip_hi;
                auto scale_of = [c, m, lo, hi](const std::vector<double>& z) {
                    return c * std::clamp(std::pow(norm2(z), m), lo, hi);
                };
                return simulate_burn_in(a.coeff, a.innovation, a.coeff.rows(), scale_of, true, T, seed, opts);
            },
        },
        spec);
    if (!trace.series.values.all_finite()) throw NumericError("simulate: trajectory is not finite", 0.0);
    return trace;
}

Series simulate(const ModelSpec& spec, std::size_t T, std::uint64_t seed, const SimulationOptions& opts)
{
    SimulationOptions o = opts;
    o.record_innovations = false;
    return std::move(simulate_traced(spec, T, seed, o).series);
}

BlockPartition blocking_indices(std::size_t T, std::size_t a_T)
{
    if (a_T < 1 || 2 * a_T > T) throw ArgumentError("blocking_indices: need 1 <= a_T and 2 a_T <= T");
    BlockPartition part;
    part.mu = T / (2 * a_T);
    for (std::size_t j = 1; j <= part.mu; ++j) {
        part.odd.push_back({2 * (j - 1) * a_T + 1, (2 * j - 1) * a_T});
        part.even.push_back({(2 * j - 1) * a_T + 1, 2 * j * a_T});
    }
    if (2 * part.mu * a_T < T) part.remainder = Interval{2 * part.mu * a_T + 1, T};
    return part;
}

namespace {

DenseMatrix banded_pattern(std::size_t p, std::size_t s)
{
    if (p == 0 || s == 0 || s > p) throw ArgumentError("banded pattern: need 1 <= s <= p");
    DenseMatrix a(p, p);
    for (std::size_t k = 0; k < s; ++k) {
        const std::size_t r = k * p / s;
        const std::size_t c = (k % 2 == 0) ? r : (r + 1) % p;
        a(r, c) = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    }
    return a;
}

void rescale_to(DenseMatrix& a, double op_norm)
{
    if (!(op_norm > 0.0)) throw ArgumentError("target operator norm must be positive");
    const double current = operator_norm(a);
    if (current == 0.0) throw ArgumentError("cannot rescale a zero matrix");
    a *= op_norm / current;
}

} // namespace

DenseMatrix banded_sparse_coefficients(std::size_t p, std::size_t s, double op_norm)
{
    DenseMatrix a = banded_pattern(p, s);
    rescale_to(a, op_norm);
    return a;
}

DenseMatrix omitted_variable_coefficients(std::size_t p, std::size_t s, double op_norm)
{
    const DenseMatrix band = banded_pattern(p, s);
    std::vector<bool> touched(p, false);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            if (band(i, j) != 0.0) touched[i] = touched[j] = true;
    std::size_t free_row = p - 1;
    for (std::size_t i = p; i-- > 0;)
        if (!touched[i]) {
            free_row = i;
            break;
        }

    DenseMatrix a(p + 1, p + 1);
    a.set_block(0, 0, band);
    a(free_row, p) = 0.6;
    a(p, p) = 0.6;
    rescale_to(a, op_norm);
    return a;
}

} // namespace tslasso
