#include <tslasso/distribution.hpp>

#include <tslasso/error.hpp>

#include <cmath>
#include <numbers>

namespace tslasso {

DistributionSpec DistributionSpec::gaussian(double variance)
{
    if (!(variance >= 0.0) || !std::isfinite(variance))
        throw ArgumentError("gaussian: variance must be finite and >= 0");
    DistributionSpec d;
    d.family = Family::gaussian;
    d.variance = variance;
    return d;
}

DistributionSpec DistributionSpec::uniform(double lo, double hi)
{
    if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw ArgumentError("uniform: need finite lo <= hi");
    DistributionSpec d;
    d.family = Family::uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
}

DistributionSpec DistributionSpec::unit_uniform(double scale)
{
    const double h = std::sqrt(3.0) * std::abs(scale);
    return uniform(-h, h);
}

DistributionSpec DistributionSpec::point_mass(double x) { return uniform(x, x); }

DistributionSpec DistributionSpec::from_name(const std::string& family, double a, double b)
{
    if (family == "gaussian") return gaussian(a);
    if (family == "uniform" || family == "bounded") return uniform(a, b);
    throw UnsupportedError("unsupported distribution family '" + family
                           + "' (only gaussian and uniform/bounded are subgaussian here)");
}

double DistributionSpec::mean() const
{
    return family == Family::gaussian ? 0.0 : 0.5 * (lo + hi);
}

double DistributionSpec::var() const
{
    if (family == Family::gaussian) return variance;
    const double w = hi - lo;
    return w * w / 12.0;
}

double DistributionSpec::abs_moment(int k) const
{
    if (k < 1) throw ArgumentError("abs_moment: order must be >= 1");
    const double kd = static_cast<double>(k);
    if (family == Family::gaussian) {
        if (variance == 0.0) return 0.0;
        // E|N(0, s^2)|^k = s^k 2^{k/2} Gamma((k+1)/2) / sqrt(pi)
        const double log_m = 0.5 * kd * std::log(variance) + 0.5 * kd * std::log(2.0)
                             + std::lgamma(0.5 * (kd + 1.0)) - 0.5 * std::log(std::numbers::pi);
        return std::exp(log_m);
    }
    if (lo == hi) return std::pow(std::abs(lo), kd);
    // antiderivative of |u|^k is sign(u) |u|^{k+1} / (k+1)
    auto F = [kd](double u) { return std::copysign(std::pow(std::abs(u), kd + 1.0), u) / (kd + 1.0); };
    return (F(hi) - F(lo)) / (hi - lo);
}

DistributionSpec DistributionSpec::scaled(double c) const
{
    if (family == Family::gaussian) return gaussian(c * c * variance);
    const double a = c * lo;
    const double b = c * hi;
    return a <= b ? uniform(a, b) : uniform(b, a);
}

std::string DistributionSpec::name() const
{
    return family == Family::gaussian ? "gaussian" : "uniform";
}

} // namespace tslasso
