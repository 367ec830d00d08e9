#include "ntsopt/estimate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "ntsopt/errors.hpp"
#include "ntsopt/normal.hpp"
#include "ntsopt/rng.hpp"

namespace ntsopt {

namespace {

constexpr double kPi = std::numbers::pi;

// Parameter box for the full fit. The alpha/theta walls are soft modelling
// choices (stability index must stay off 2, tempering must stay positive and
// bounded); beta lives strictly inside its admissible interval so gamma^2
// stays positive no matter where the optimizer wanders.
constexpr double kAlphaLo = 0.05;
constexpr double kAlphaHi = 1.95;
constexpr double kThetaLo = 1e-3;
constexpr double kThetaHi = 50.0;
constexpr double kBetaShrink = 0.99;

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logit(double s) { return std::log(s / (1.0 - s)); }

StdNtsParams decode(const Eigen::Vector3d& u) {
  const double alpha = kAlphaLo + (kAlphaHi - kAlphaLo) * sigmoid(u[0]);
  const double theta =
      std::exp(std::log(kThetaLo) + (std::log(kThetaHi) - std::log(kThetaLo)) * sigmoid(u[1]));
  const double beta = kBetaShrink * stdnts_beta_bound(alpha, theta) * std::tanh(u[2]);
  return {alpha, theta, beta};
}

Eigen::Vector3d encode(double alpha, double theta, double beta_frac) {
  Eigen::Vector3d u;
  u[0] = logit((alpha - kAlphaLo) / (kAlphaHi - kAlphaLo));
  u[1] = logit((std::log(theta) - std::log(kThetaLo)) / (std::log(kThetaHi) - std::log(kThetaLo)));
  u[2] = std::atanh(std::clamp(beta_frac / kBetaShrink, -0.999, 0.999));
  return u;
}

// Shared state for all objective evaluations against one smoothed ECDF: the
// quadrature scheme and the trig factors cos(u_j g_i), sin(u_j g_i) depend
// only on the grid, so they are built once. Each evaluation then costs one
// chf pass over the nodes plus two matrix-vector products.
class CurveObjective {
 public:
  CurveObjective(const SmoothedEcdf& target, const QuadratureConfig& q) {
    q.validate();
    if (target.grid.size() != target.values.size() || target.grid.size() < 8)
      throw std::invalid_argument("curve fit: smoothed ECDF grid is malformed");
    scheme_ = make_fixed_scheme(q.truncation, q.nodes);
    truncation_ = q.truncation;
    const Eigen::Index g = static_cast<Eigen::Index>(target.grid.size());
    const Eigen::Index m = static_cast<Eigen::Index>(scheme_.nodes.size());
    cosm_.resize(g, m);
    sinm_.resize(g, m);
    for (Eigen::Index i = 0; i < g; ++i) {
      const double x = target.grid[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < m; ++j) {
        const double ux = scheme_.nodes[static_cast<std::size_t>(j)] * x;
        cosm_(i, j) = std::cos(ux);
        sinm_(i, j) = std::sin(ux);
      }
    }
    target_ = Eigen::Map<const Eigen::VectorXd>(target.values.data(), g);
  }

  // Sum of squared CDF errors over the grid plus a slow-decay penalty: when
  // |chf| is still O(1) at the truncation frequency the inversion integral is
  // meaningless, so such parameter corners are priced out of the search.
  double operator()(const StdNtsParams& p) const {
    const Eigen::Index m = cosm_.cols();
    Eigen::VectorXd kre(m), kim(m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::size_t js = static_cast<std::size_t>(j);
      const cdouble v =
          scheme_.weights[js] * stdnts_chf(cdouble(scheme_.nodes[js], 0.0), p) / scheme_.nodes[js];
      kre[j] = v.real();
      kim[j] = v.imag();
    }
    const Eigen::VectorXd model =
        Eigen::VectorXd::Constant(cosm_.rows(), 0.5) - (cosm_ * kim - sinm_ * kre) / kPi;
    const double rss = (model - target_).squaredNorm();
    const double tail = stdnts_chf_tail_magnitude(p, truncation_);
    return rss + 100.0 * tail * tail;
  }

 private:
  FixedScheme scheme_;
  Eigen::MatrixXd cosm_, sinm_;
  Eigen::VectorXd target_;
  double truncation_ = 0.0;
};

struct NmResult {
  Eigen::Vector3d x;
  double f = std::numeric_limits<double>::infinity();
};

// Plain Nelder-Mead on R^3 with the textbook coefficients. Good enough here:
// the objective is smooth and cheap, and the multistart loop handles the rest.
template <typename F>
NmResult nelder_mead(const F& f, const Eigen::Vector3d& x0, int max_evals) {
  constexpr int kDim = 3;
  std::array<Eigen::Vector3d, kDim + 1> xs;
  std::array<double, kDim + 1> fs;
  xs[0] = x0;
  for (int k = 0; k < kDim; ++k) {
    xs[k + 1] = x0;
    xs[k + 1][k] += 0.5;
  }
  int evals = 0;
  for (int i = 0; i <= kDim; ++i) {
    fs[i] = f(xs[i]);
    ++evals;
  }
  auto order = [&] {
    std::array<int, kDim + 1> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    std::array<Eigen::Vector3d, kDim + 1> xs2;
    std::array<double, kDim + 1> fs2;
    for (int i = 0; i <= kDim; ++i) {
      xs2[i] = xs[idx[i]];
      fs2[i] = fs[idx[i]];
    }
    xs = xs2;
    fs = fs2;
  };
  order();
  while (evals < max_evals) {
    if (fs[kDim] - fs[0] <= 1e-12 * (1.0 + std::abs(fs[0]))) break;
    double diam = 0.0;
    for (int i = 1; i <= kDim; ++i) diam = std::max(diam, (xs[i] - xs[0]).lpNorm<Eigen::Infinity>());
    if (diam <= 1e-8) break;

    const Eigen::Vector3d centroid = (xs[0] + xs[1] + xs[2]) / 3.0;
    const Eigen::Vector3d xr = centroid + (centroid - xs[kDim]);
    const double fr = f(xr);
    ++evals;
    if (fr < fs[0]) {
      const Eigen::Vector3d xe = centroid + 2.0 * (centroid - xs[kDim]);
      const double fe = f(xe);
      ++evals;
      if (fe < fr) {
        xs[kDim] = xe;
        fs[kDim] = fe;
      } else {
        xs[kDim] = xr;
        fs[kDim] = fr;
      }
    } else if (fr < fs[kDim - 1]) {
      xs[kDim] = xr;
      fs[kDim] = fr;
    } else {
      // Contract toward the better of {reflected, worst}; shrink on failure.
      const bool outside = fr < fs[kDim];
      const Eigen::Vector3d xc = outside ? Eigen::Vector3d(centroid + 0.5 * (xr - centroid))
                                         : Eigen::Vector3d(centroid - 0.5 * (centroid - xs[kDim]));
      const double fc = f(xc);
      ++evals;
      if (fc < std::min(fr, fs[kDim])) {
        xs[kDim] = xc;
        fs[kDim] = fc;
      } else {
        for (int i = 1; i <= kDim; ++i) {
          xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
          fs[i] = f(xs[i]);
          ++evals;
        }
      }
    }
    order();
  }
  return {xs[0], fs[0]};
}

// Brent's scalar minimizer (golden section with parabolic steps) on [a, b].
template <typename F>
double brent_minimize(const F& f, double a, double b, double tol_abs, int max_iter) {
  constexpr double kGold = 0.3819660112501051;  // 2 - golden ratio
  double x = a + kGold * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol = tol_abs * (1.0 + std::abs(x));
    if (std::abs(x - m) <= 2.0 * tol - 0.5 * (b - a)) break;
    double step = 0.0;
    bool golden = true;
    if (std::abs(e) > tol) {
      // Parabola through (v, fv), (w, fw), (x, fx).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < 2.0 * tol || b - u < 2.0 * tol) d = (x < m) ? tol : -tol;
        golden = false;
      }
    }
    if (golden) {
      e = (x < m) ? b - x : a - x;
      d = kGold * e;
    }
    step = (std::abs(d) >= tol) ? d : ((d > 0.0) ? tol : -tol);
    const double u = x + step;
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x)
        b = x;
      else
        a = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return x;
}

// Deterministic start points: a coarse lattice over the box first, then
// seeded pseudo-random fill if more starts are requested.
std::vector<Eigen::Vector3d> make_starts(int count) {
  std::vector<Eigen::Vector3d> starts;
  for (double alpha : {0.6, 1.4})
    for (double theta : {0.15, 1.5})
      for (double bf : {-0.3, 0.3}) starts.push_back(encode(alpha, theta, bf));
  Rng rng(0xE57);
  while (static_cast<int>(starts.size()) < count) {
    const double alpha = 0.2 + 1.6 * rng.uniform();
    const double theta = std::exp(std::log(0.05) + (std::log(5.0) - std::log(0.05)) * rng.uniform());
    const double bf = -0.8 + 1.6 * rng.uniform();
    starts.push_back(encode(alpha, theta, bf));
  }
  starts.resize(static_cast<std::size_t>(count));
  return starts;
}

}  // namespace

void ReturnPanel::validate() const {
  const auto rows = static_cast<std::size_t>(returns.rows());
  const auto cols = static_cast<std::size_t>(returns.cols());
  if (dates.size() != rows)
    throw ParseError("return panel: date count does not match the number of rows");
  if (assets.size() != cols)
    throw ParseError("return panel: symbol count does not match the number of columns");
  if (rows < 2) throw ParseError("return panel: need at least two observations");
  if (cols < 1) throw ParseError("return panel: need at least one asset");
  std::set<std::string> seen;
  for (const auto& a : assets) {
    if (a.empty()) throw ParseError("return panel: empty asset symbol");
    if (!seen.insert(a).second) throw ParseError("return panel: duplicate asset symbol '" + a + "'");
  }
  for (std::size_t t = 1; t < rows; ++t)
    if (!(dates[t - 1] < dates[t]))
      throw ParseError("return panel: dates not strictly increasing at row " + std::to_string(t + 1));
  if (!returns.allFinite()) throw ParseError("return panel: non-finite return value");
}

StandardizeResult standardize(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("standardize: need at least two observations");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : series) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(n - 1);
  // Relative guard: a constant series can leave var ~ 1e-34 from rounding in
  // the mean, which would pass an absolute var > 0 test and blow up the
  // residuals. Treat anything at rounding scale as constant.
  if (!(var > 1e-24 * std::max(1.0, mean * mean)))
    throw std::invalid_argument("standardize: series has zero variance");
  StandardizeResult out;
  out.mean = mean;
  out.stddev = std::sqrt(var);
  out.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.residuals[i] = (series[i] - mean) / out.stddev;
  return out;
}

SmoothedEcdf smoothed_ecdf(const std::vector<double>& residuals, double bandwidth, int grid_size) {
  const std::size_t n = residuals.size();
  if (n < 2) throw std::invalid_argument("smoothed_ecdf: need at least two observations");
  if (grid_size < 8) throw std::invalid_argument("smoothed_ecdf: grid_size must be at least 8");
  for (double v : residuals)
    if (!std::isfinite(v)) throw std::invalid_argument("smoothed_ecdf: non-finite observation");

  double h = bandwidth;
  if (h <= 0.0) {
    double mean = 0.0;
    for (double v : residuals) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : residuals) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    h = 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
  }
  if (!(h > 0.0)) throw std::invalid_argument("smoothed_ecdf: bandwidth must be positive");

  std::vector<double> sorted(residuals);
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;

  SmoothedEcdf out;
  out.bandwidth = h;
  out.grid.resize(static_cast<std::size_t>(grid_size));
  out.values.resize(static_cast<std::size_t>(grid_size));
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  // Kernel CDF contributions are 1 (resp. 0) to machine precision once an
  // observation sits more than 8 bandwidths below (resp. above) the grid
  // point, so only the window in between needs erfc evaluations.
  const double window = 8.0 * h;
  for (int i = 0; i < grid_size; ++i) {
    const double g = lo + step * i;
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), g - window);
    const auto last = std::upper_bound(first, sorted.end(), g + window);
    double acc = static_cast<double>(first - sorted.begin());
    for (auto it = first; it != last; ++it) acc += normal_cdf((g - *it) / h);
    out.grid[static_cast<std::size_t>(i)] = g;
    out.values[static_cast<std::size_t>(i)] = acc / static_cast<double>(n);
  }
  for (std::size_t i = 1; i < out.values.size(); ++i)
    out.values[i] = std::max(out.values[i], out.values[i - 1]);
  return out;
}

FullFit fit_stdnts_full(const SmoothedEcdf& target, const EstimateConfig& cfg) {
  if (cfg.starts < 1) throw std::invalid_argument("fit: need at least one start");
  if (cfg.max_evaluations < 20)
    throw std::invalid_argument("fit: max_evaluations must be at least 20");
  const CurveObjective obj(target, cfg.quad);
  const auto eval = [&obj](const Eigen::Vector3d& u) { return obj(decode(u)); };

  NmResult best;
  for (const Eigen::Vector3d& start : make_starts(cfg.starts)) {
    const NmResult r = nelder_mead(eval, start, cfg.max_evaluations);
    if (r.f < best.f) best = r;
  }
  return {decode(best.x), best.f};
}

double fit_beta_given(const SmoothedEcdf& target, double alpha, double theta,
                      const EstimateConfig& cfg) {
  const CurveObjective obj(target, cfg.quad);
  const double bound = kBetaShrink * stdnts_beta_bound(alpha, theta);
  const auto eval = [&](double beta) { return obj(StdNtsParams(alpha, theta, beta)); };
  return brent_minimize(eval, -bound, bound, 1e-9, 200);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double F = cdf(sample[i]);
    if (!std::isfinite(F)) throw std::invalid_argument("ks_statistic: CDF returned non-finite value");
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(std::abs(F - lo), std::abs(hi - F)));
  }
  return d;
}

double ks_pvalue(double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("ks_pvalue: lambda must be nonnegative");
  if (lambda < 1e-3) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta dual of the alternating series; far better conditioned for
    // small arguments where the direct series needs hundreds of terms.
    const double x = std::exp(-kPi * kPi / (8.0 * lambda * lambda));
    const double sum = x + std::pow(x, 9.0) + std::pow(x, 25.0) + std::pow(x, 49.0);
    return std::clamp(1.0 - std::sqrt(2.0 * kPi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 12; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

std::pair<double, double> ks_test(const std::vector<double>& residuals, const StdNtsParams& p,
                                  const QuadratureConfig& q) {
  const std::size_t n = residuals.size();
  if (n == 0) throw std::invalid_argument("ks_test: empty sample");
  std::vector<double> sorted(residuals);
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double> F = stdnts_cdf_many(sorted, p, q);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max(d, std::max(std::abs(F[i] - lo), std::abs(hi - F[i])));
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  const double lambda = (root_n + 0.12 + 0.11 / root_n) * d;
  return {d, ks_pvalue(lambda)};
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& returns) {
  const Eigen::Index t = returns.rows();
  if (t < 2) throw std::invalid_argument("sample_covariance: need at least two rows");
  const Eigen::MatrixXd centered = returns.rowwise() - returns.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(t - 1);
}

TwoStepFit two_step_fit(const ReturnPanel& panel, const std::vector<double>& index_returns,
                        const EstimateConfig& cfg) {
  panel.validate();
  if (index_returns.size() != static_cast<std::size_t>(panel.returns.rows()))
    throw std::invalid_argument("two_step_fit: index series length does not match the panel");
  if (panel.returns.rows() < 250)
    throw std::invalid_argument("two_step_fit: need at least 250 observations per asset");

  // Step 1: tail parameters and index skew from the standardized index series.
  const StandardizeResult idx = standardize(index_returns);
  const SmoothedEcdf idx_ecdf = smoothed_ecdf(idx.residuals, cfg.bandwidth, cfg.grid_size);
  const FullFit full = fit_stdnts_full(idx_ecdf, cfg);
  const auto [idx_d, idx_p] = ks_test(idx.residuals, full.params, cfg.quad);

  const double alpha = full.params.alpha;
  const double theta = full.params.theta;
  const double bound = stdnts_beta_bound(alpha, theta);

  // Step 2: per-asset skew with (alpha, theta) pinned, plus sample moments.
  const int n_assets = static_cast<int>(panel.returns.cols());
  Eigen::VectorXd mu(n_assets), sigma(n_assets), beta(n_assets);
  std::vector<FitResult> asset_fits;
  std::vector<std::string> warnings;
  asset_fits.reserve(static_cast<std::size_t>(n_assets));
  for (int a = 0; a < n_assets; ++a) {
    const Eigen::VectorXd col = panel.returns.col(a);
    const std::vector<double> series(col.data(), col.data() + col.size());
    const StandardizeResult st = standardize(series);
    const SmoothedEcdf ecdf = smoothed_ecdf(st.residuals, cfg.bandwidth, cfg.grid_size);
    const double b = fit_beta_given(ecdf, alpha, theta, cfg);
    const StdNtsParams params(alpha, theta, b);
    const CurveObjective obj(ecdf, cfg.quad);
    const auto [d, p] = ks_test(st.residuals, params, cfg.quad);
    asset_fits.push_back({params, obj(params), d, p});
    mu[a] = st.mean;
    sigma[a] = st.stddev;
    beta[a] = b;
    if (std::abs(b) >= 0.985 * bound)
      warnings.push_back("beta for '" + panel.assets[static_cast<std::size_t>(a)] +
                         "' sits at the admissible boundary; skew may be understated");
  }

  MarketModel model(alpha, theta, mu, sigma, beta, sample_covariance(panel.returns), panel.assets);
  if (!model.samplable()) warnings.push_back(model.sampling_issue());
  return {std::move(model), {full.params, full.objective, idx_d, idx_p}, std::move(asset_fits),
          std::move(warnings)};
}

}  // namespace ntsopt
