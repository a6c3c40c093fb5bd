#pragma once

namespace baryflow {

// Standard normal CDF, accurate in both tails (erfc based).
double norm_cdf(double x);

// Standard normal quantile, Wichura's PPND16 rational approximation
// (relative error below 1e-15 on (0, 1)). Throws for p outside (0, 1).
double norm_quantile(double p);

}  // namespace baryflow
