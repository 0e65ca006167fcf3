#pragma once

#include <string>

namespace tslasso {

/**
 * Scalar law used for innovations and for subgaussian-norm evaluation.
 *
 * gaussian: N(0, variance).
 * uniform:  U[lo, hi]. A degenerate interval (lo == hi) is a point mass; the
 *           symmetric interval [-sqrt(3), sqrt(3)] has unit variance.
 *
 * Heavier-tailed families are not representable; parsing one from text
 * raises UnsupportedError.
 */
struct DistributionSpec
{
    enum class Family { gaussian, uniform };

    Family family = Family::uniform;
    double variance = 1.0; // gaussian
    double lo = 0.0;       // uniform
    double hi = 0.0;       // uniform

    static DistributionSpec gaussian(double variance);
    static DistributionSpec uniform(double lo, double hi);
    /// U[-sqrt(3), sqrt(3)] scaled by `scale`; unit variance when scale = 1.
    static DistributionSpec unit_uniform(double scale = 1.0);
    static DistributionSpec point_mass(double x);
    static DistributionSpec from_name(const std::string& family, double a, double b);

    double mean() const;
    double var() const;
    /// E|U|^k for integer k >= 1, in closed form.
    double abs_moment(int k) const;
    /// Law of c * U.
    DistributionSpec scaled(double c) const;

    std::string name() const;

    friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;
};

} // namespace tslasso
