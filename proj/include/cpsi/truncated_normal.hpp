#pragma once

#include "cpsi/interval.hpp"

namespace cpsi {

double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);
// log(1 - Phi(x)) without underflow for any finite x.
double log_normal_sf(double x);
double normal_quantile(double p);

// log P(lo <= Y <= hi) for Y ~ N(mu, sigma^2); endpoints may be infinite.
// Differences are formed on the tail where both endpoints lie, so far-tail
// intervals keep full relative accuracy.
double log_interval_mass(double lo, double hi, double mu, double sigma);

// P(Y <= x | Y in region) for Y ~ N(mu, sigma2). Throws NumericError when the
// region's total mass is below 1e-300.
double truncated_normal_cdf(double x, double mu, double sigma2, const TruncationRegion& region);

// P(Y >= x | Y in region), evaluated entirely in log space with no lower
// limit on the region's mass. Used where the mean is swept far from the
// region (confidence-interval inversion).
double truncated_normal_sf(double x, double mu, double sigma2, const TruncationRegion& region);

}  // namespace cpsi
