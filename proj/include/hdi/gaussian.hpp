#pragma once

namespace hdi {

/// Standard normal c.d.f. Computed through erfc, so the relative error in
/// both tails is at the level of the libm erfc implementation (< 1e-12
/// everywhere, near machine precision for |x| <= 8).
double normal_cdf(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Inverse standard normal c.d.f. for q in (0,1).
///
/// Rational initial approximation refined by one Halley step against the
/// erfc-based c.d.f.; |Phi(result) - q| stays below 1e-14 over (1e-300,
/// 1 - 1e-16). Throws InputError outside (0,1).
double std_normal_quantile(double q);

/// Two-sided normal p-value 2*(1 - Phi(|z|)), evaluated as erfc(|z|/sqrt 2)
/// to keep precision for large |z|.
double two_sided_pvalue(double z);

}  // namespace hdi
