#pragma once

namespace ntsopt {

double normal_pdf(double x);
double normal_cdf(double x);

// Inverse standard normal CDF, accurate to full double precision
// (rational initial guess refined by one Halley step).
double normal_quantile(double p);

}  // namespace ntsopt
