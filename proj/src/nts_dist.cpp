#include "ntsopt/nts_dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ntsopt/errors.hpp"
#include "ntsopt/normal.hpp"
#include "ntsopt/rng.hpp"

namespace ntsopt {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr cdouble kI{0.0, 1.0};
}  // namespace

SubordinatorParams::SubordinatorParams(double alpha_, double theta_) : alpha(alpha_), theta(theta_) {
  if (!std::isfinite(alpha) || !(alpha > 0.0) || !(alpha < 2.0))
    throw std::domain_error("SubordinatorParams: alpha must lie in (0, 2)");
  if (!std::isfinite(theta) || !(theta > 0.0))
    throw std::domain_error("SubordinatorParams: theta must be positive");
}

StdNtsParams::StdNtsParams(double alpha_, double theta_, double beta_)
    : alpha(alpha_), theta(theta_), beta(beta_) {
  SubordinatorParams check(alpha, theta);  // validates alpha, theta
  if (!std::isfinite(beta) || std::abs(beta) >= beta_bound())
    throw std::domain_error(
        "StdNtsParams: |beta| must be below sqrt(2*theta/(2-alpha)); "
        "unit variance is impossible otherwise");
}

double StdNtsParams::beta_bound() const { return std::sqrt(2.0 * theta / (2.0 - alpha)); }

double StdNtsParams::gamma2() const { return 1.0 - beta * beta * (2.0 - alpha) / (2.0 * theta); }

double StdNtsParams::gamma() const { return std::sqrt(gamma2()); }

double stdnts_beta_bound(double alpha, double theta) {
  SubordinatorParams check(alpha, theta);
  return std::sqrt(2.0 * theta / (2.0 - alpha));
}

cdouble subordinator_chf(cdouble u, const SubordinatorParams& p) {
  const cdouble base = p.theta - kI * u;
  if (!(base.real() > 0.0))
    throw std::domain_error("subordinator_chf: Re(theta - iu) must be positive (branch cut)");
  const double half_alpha = 0.5 * p.alpha;
  const double scale = 2.0 * std::pow(p.theta, 1.0 - half_alpha) / p.alpha;
  return std::exp(-scale * (std::pow(base, half_alpha) - std::pow(p.theta, half_alpha)));
}

cdouble stdnts_log_chf(cdouble z, const StdNtsParams& p) {
  const cdouble a = p.theta - kI * p.beta * z + 0.5 * p.gamma2() * z * z;
  if (!(a.real() > 0.0))
    throw std::domain_error(
        "stdnts_log_chf: argument leaves the analyticity strip (damping too large?)");
  const double half_alpha = 0.5 * p.alpha;
  const double scale = 2.0 * std::pow(p.theta, 1.0 - half_alpha) / p.alpha;
  return -p.beta * z * kI - scale * (std::pow(a, half_alpha) - std::pow(p.theta, half_alpha));
}

cdouble stdnts_chf(cdouble z, const StdNtsParams& p) { return std::exp(stdnts_log_chf(z, p)); }

cdouble stdnts_log_chf_dbeta(cdouble z, const StdNtsParams& p) {
  const double a = p.alpha, th = p.theta, b = p.beta;
  const cdouble w = 1.0 - kI * z * b / th + (1.0 - b * b * (2.0 - a) / (2.0 * th)) * z * z / (2.0 * th);
  if (!(w.real() > 0.0))
    throw std::domain_error("stdnts_log_chf_dbeta: argument leaves the analyticity strip");
  return -z * kI +
         std::pow(w, 0.5 * a - 1.0) * (z * kI + b * (2.0 - a) * z * z / (2.0 * th));
}

double auto_damping(const StdNtsParams& p) {
  const double g2 = p.gamma2();
  const double root = (p.beta + std::sqrt(p.beta * p.beta + 2.0 * g2 * p.theta)) / g2;
  return 0.5 * root;
}

namespace {

double resolve_damping(const StdNtsParams& p, const QuadratureConfig& q) {
  if (q.damping > 0.0) return q.damping;
  return auto_damping(p);
}

double clamp_unit(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

double stdnts_cdf(double x, const StdNtsParams& p, const QuadratureConfig& q) {
  q.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("stdnts_cdf: x must be finite");
  auto integrand = [&](double u) {
    const cdouble v = stdnts_chf(cdouble(u, 0.0), p) * std::exp(-kI * u * x);
    return v.imag() / u;
  };
  auto r = integrate_adaptive(integrand, 0.0, q.truncation, q.tolerance, q.nodes);
  return clamp_unit(0.5 - r.value / kPi);
}

double stdnts_pdf(double x, const StdNtsParams& p, const QuadratureConfig& q) {
  q.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("stdnts_pdf: x must be finite");
  auto integrand = [&](double u) {
    const cdouble v = stdnts_chf(cdouble(u, 0.0), p) * std::exp(-kI * u * x);
    return v.real();
  };
  auto r = integrate_adaptive(integrand, 0.0, q.truncation, q.tolerance, q.nodes);
  double density = r.value / kPi;
  if (density < 0.0) {
    if (density < -q.tolerance)
      throw ConvergenceError("stdnts_pdf: negative density beyond round-off tolerance");
    density = 0.0;
  }
  return density;
}

double stdnts_cdf_dbeta(double x, const StdNtsParams& p, const QuadratureConfig& q) {
  q.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("stdnts_cdf_dbeta: x must be finite");
  auto integrand = [&](double u) {
    const cdouble zu(u, 0.0);
    const cdouble v =
        stdnts_log_chf_dbeta(zu, p) * stdnts_chf(zu, p) * std::exp(-kI * u * x);
    return v.imag() / u;
  };
  auto r = integrate_adaptive(integrand, 0.0, q.truncation, q.tolerance, q.nodes);
  return -r.value / kPi;
}

double stdnts_quantile(double eta, const StdNtsParams& p, const QuadratureConfig& q) {
  q.validate();
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("stdnts_quantile: eta must lie in (0, 1)");
  if (eta < 10.0 * q.tolerance || 1.0 - eta < 10.0 * q.tolerance)
    throw ConvergenceError("stdnts_quantile: eta is below the quadrature resolution");

  // Bracket the root starting from the Gaussian guess, doubling outward.
  double lo = normal_quantile(eta) - 1.0;
  double hi = normal_quantile(eta) + 1.0;
  double flo = stdnts_cdf(lo, p, q) - eta;
  double fhi = stdnts_cdf(hi, p, q) - eta;
  while (flo > 0.0) {
    lo = lo < 0.0 ? lo * 2.0 : lo - 2.0;
    if (lo < -50.0) throw ConvergenceError("stdnts_quantile: bracket expansion left |x| <= 50");
    flo = stdnts_cdf(lo, p, q) - eta;
  }
  while (fhi < 0.0) {
    hi = hi > 0.0 ? hi * 2.0 : hi + 2.0;
    if (hi > 50.0) throw ConvergenceError("stdnts_quantile: bracket expansion left |x| <= 50");
    fhi = stdnts_cdf(hi, p, q) - eta;
  }

  // Brent's method on F(x) - eta.
  double a = lo, b = hi, fa = flo, fb = fhi;
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * 1e-16 * std::abs(b) + 1e-13;
    const double xm = 0.5 * (c - b);
    if (std::abs(fb) <= q.tolerance || std::abs(xm) <= tol1) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa, pp, qq, rr;
      if (a == c) {
        pp = 2.0 * xm * s;
        qq = 1.0 - s;
      } else {
        qq = fa / fc;
        rr = fb / fc;
        pp = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
        qq = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
      }
      if (pp > 0.0) qq = -qq;
      pp = std::abs(pp);
      if (2.0 * pp < std::min(3.0 * xm * qq - std::abs(tol1 * qq), std::abs(e * qq))) {
        e = d;
        d = pp / qq;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = stdnts_cdf(b, p, q) - eta;
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  throw ConvergenceError("stdnts_quantile: root refinement did not converge");
}

double stdnts_quantile_dbeta(double eta, const StdNtsParams& p, const QuadratureConfig& q) {
  const double x = stdnts_quantile(eta, p, q);
  const double density = stdnts_pdf(x, p, q);
  if (density < 1e-12)
    throw ConvergenceError("stdnts_quantile_dbeta: density at the quantile is numerically degenerate");
  return -stdnts_cdf_dbeta(x, p, q) / density;
}

namespace {

// Kanter's representation of a standard positive alpha/2-stable variable
// (Laplace transform exp(-lambda^rho)).
double standard_positive_stable(double rho, Rng& rng) {
  const double u = kPi * rng.uniform();
  const double e = rng.exponential();
  const double b = std::pow(std::sin(rho * u), rho / (1.0 - rho)) * std::sin((1.0 - rho) * u) /
                   std::pow(std::sin(u), 1.0 / (1.0 - rho));
  return std::pow(b / e, (1.0 - rho) / rho);
}

double draw_subordinator(const SubordinatorParams& p, Rng& rng) {
  const double rho = 0.5 * p.alpha;
  const double scale = std::pow(p.theta, 1.0 - rho) / rho;  // Laplace exponent coefficient
  const double stable_scale = std::pow(scale, 1.0 / rho);
  for (;;) {
    const double s = stable_scale * standard_positive_stable(rho, rng);
    if (rng.uniform() <= std::exp(-p.theta * s)) return s;
  }
}

}  // namespace

std::vector<double> sample_subordinator(const SubordinatorParams& p, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& t : out) t = draw_subordinator(p, rng);
  return out;
}

std::vector<double> sample_stdnts(const StdNtsParams& p, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const SubordinatorParams sub{p.alpha, p.theta};
  const double g = p.gamma();
  std::vector<double> out(n);
  for (auto& x : out) {
    const double t = draw_subordinator(sub, rng);
    x = p.beta * (t - 1.0) + g * std::sqrt(t) * rng.normal();
  }
  return out;
}

std::vector<double> stdnts_cdf_many(const std::vector<double>& xs, const StdNtsParams& p,
                                    const QuadratureConfig& q) {
  q.validate();
  const FixedScheme scheme = make_fixed_scheme(q.truncation, q.nodes);
  const std::size_t m = scheme.nodes.size();
  // Kernel: w_j * chf(u_j) / u_j, shared across all x.
  std::vector<double> k_re(m), k_im(m);
  for (std::size_t j = 0; j < m; ++j) {
    const cdouble v = scheme.weights[j] * stdnts_chf(cdouble(scheme.nodes[j], 0.0), p) / scheme.nodes[j];
    k_re[j] = v.real();
    k_im[j] = v.imag();
  }
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      // Im[e^{-iux} K] = K_im cos(ux) - K_re sin(ux)
      const double ux = scheme.nodes[j] * x;
      acc += k_im[j] * std::cos(ux) - k_re[j] * std::sin(ux);
    }
    out[i] = clamp_unit(0.5 - acc / kPi);
  }
  return out;
}

double stdnts_chf_tail_magnitude(const StdNtsParams& p, double truncation) {
  return std::exp(stdnts_log_chf(cdouble(truncation, 0.0), p).real());
}

StdNtsCdfTable::StdNtsCdfTable(const StdNtsParams& p, const QuadratureConfig& q, int grid_points,
                               double tail_mass)
    : params_(p), quad_(q) {
  if (grid_points < 16) throw std::invalid_argument("StdNtsCdfTable: need at least 16 grid points");
  if (!(tail_mass > 0.0 && tail_mass < 0.1))
    throw std::invalid_argument("StdNtsCdfTable: tail_mass must lie in (0, 0.1)");
  x_lo_ = stdnts_quantile(tail_mass, p, q);
  x_hi_ = stdnts_quantile(1.0 - tail_mass, p, q);
  step_ = (x_hi_ - x_lo_) / (grid_points - 1);
  std::vector<double> xs(grid_points);
  for (int i = 0; i < grid_points; ++i) xs[i] = x_lo_ + step_ * i;
  values_ = stdnts_cdf_many(xs, p, q);
  // The shared-node sums carry ~1e-8 wiggle; enforce monotonicity so the
  // table is a valid CDF.
  for (std::size_t i = 1; i < values_.size(); ++i)
    values_[i] = std::max(values_[i], values_[i - 1]);
}

double StdNtsCdfTable::operator()(double x) const {
  if (x < x_lo_ || x > x_hi_) return stdnts_cdf(x, params_, quad_);
  const double pos = (x - x_lo_) / step_;
  const std::size_t i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return values_[i] + frac * (values_[i + 1] - values_[i]);
}

}  // namespace ntsopt
