#include "ntsopt/risk.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ntsopt/normal.hpp"

namespace ntsopt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cdouble kI{0.0, 1.0};

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 0.5)) throw std::invalid_argument("risk: eta must lie in (0, 0.5]");
}

double resolve_damping(const StdNtsParams& p, const QuadratureConfig& q) {
  return q.damping > 0.0 ? q.damping : auto_damping(p);
}

// Shared sensitivities of the projected scale: d sigma_bar / d w_n.
Eigen::VectorXd scale_gradient(const MarketModel& m, const Eigen::VectorXd& w, double sigma_bar) {
  return (m.cov() * w) / sigma_bar;
}

}  // namespace

double cvar_stdnts(double eta, const StdNtsParams& p, const QuadratureConfig& q) {
  check_eta(eta);
  q.validate();
  const double quantile = stdnts_quantile(eta, p, q);
  const double delta = resolve_damping(p, q);
  auto integrand = [&](double u) {
    const cdouble z(-u, delta);
    const cdouble v = std::exp((kI * u + delta) * quantile) * stdnts_chf(z, p) / (z * z);
    return v.real();
  };
  const auto r = integrate_adaptive(integrand, 0.0, q.truncation, q.tolerance, q.nodes);
  return -quantile - r.value / (kPi * eta);
}

double cvar_stdnts_dbeta(double eta, const StdNtsParams& p, const QuadratureConfig& q) {
  check_eta(eta);
  q.validate();
  const double quantile = stdnts_quantile(eta, p, q);
  const double dq_dbeta = stdnts_quantile_dbeta(eta, p, q);
  const double delta = resolve_damping(p, q);
  // Differentiates the CVaR integral in beta: the quantile moves (chain rule
  // through the exponential and the leading term) and the chf itself moves
  // (log-derivative factor).
  auto integrand = [&](double u) {
    const cdouble z(-u, delta);
    const cdouble iud = kI * u + delta;
    const cdouble v = std::exp(iud * quantile) * stdnts_chf(z, p) / (z * z) *
                      (iud * dq_dbeta + stdnts_log_chf_dbeta(z, p));
    return v.real();
  };
  const auto r = integrate_adaptive(integrand, 0.0, q.truncation, q.tolerance, q.nodes);
  return -dq_dbeta - r.value / (kPi * eta);
}

double var_portfolio(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                     const QuadratureConfig& q) {
  check_eta(eta);
  const auto proj = project_portfolio(m, w);
  const double quantile = stdnts_quantile(eta, proj.std_params(m.alpha(), m.theta()), q);
  return -(proj.mu_bar + proj.sigma_bar * quantile);
}

double cvar_portfolio(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                      const QuadratureConfig& q) {
  check_eta(eta);
  const auto proj = project_portfolio(m, w);
  return -proj.mu_bar + proj.sigma_bar * cvar_stdnts(eta, proj.std_params(m.alpha(), m.theta()), q);
}

Eigen::VectorXd mct_var(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                        const QuadratureConfig& q) {
  check_eta(eta);
  const auto proj = project_portfolio(m, w);
  const StdNtsParams params = proj.std_params(m.alpha(), m.theta());
  const double quantile = stdnts_quantile(eta, params, q);
  const double dq_dbeta = stdnts_quantile_dbeta(eta, params, q);
  const Eigen::VectorXd dscale = scale_gradient(m, w, proj.sigma_bar);

  Eigen::VectorXd out(m.size());
  for (int n = 0; n < m.size(); ++n) {
    // Chain rule through sigma_bar and beta_bar; beta_bar's weight derivative
    // is (sigma_n beta_n - beta_bar dscale_n) / sigma_bar.
    const double dbeta_bar = (m.sigma()[n] * m.beta()[n] - proj.beta_bar * dscale[n]);
    out[n] = -m.mu()[n] - quantile * dscale[n] - dbeta_bar * dq_dbeta;
  }
  return out;
}

Eigen::VectorXd mct_cvar(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                         const QuadratureConfig& q) {
  check_eta(eta);
  const auto proj = project_portfolio(m, w);
  const StdNtsParams params = proj.std_params(m.alpha(), m.theta());
  const double cvar_std = cvar_stdnts(eta, params, q);
  const double dcvar_dbeta = cvar_stdnts_dbeta(eta, params, q);
  const Eigen::VectorXd dscale = scale_gradient(m, w, proj.sigma_bar);

  Eigen::VectorXd out(m.size());
  for (int n = 0; n < m.size(); ++n) {
    const double dbeta_bar = (m.sigma()[n] * m.beta()[n] - proj.beta_bar * dscale[n]);
    out[n] = -m.mu()[n] + cvar_std * dscale[n] + dbeta_bar * dcvar_dbeta;
  }
  return out;
}

RiskReport nts_risk_report(const MarketModel& m, const Eigen::VectorXd& w, double eta,
                           const QuadratureConfig& q) {
  RiskReport report;
  report.eta = eta;
  report.var = var_portfolio(m, w, eta, q);
  report.cvar = cvar_portfolio(m, w, eta, q);
  report.mct_var = mct_var(m, w, eta, q);
  report.mct_cvar = mct_cvar(m, w, eta, q);
  return report;
}

double gaussian_cvar_std(double eta) {
  check_eta(eta);
  return normal_pdf(normal_quantile(eta)) / eta;
}

std::pair<double, double> gaussian_var_cvar(const GaussianModel& g, const Eigen::VectorXd& w,
                                            double eta) {
  check_eta(eta);
  const auto [mean, sd] = project_gaussian(g, w);
  return {-mean - sd * normal_quantile(eta), -mean + sd * gaussian_cvar_std(eta)};
}

Eigen::VectorXd gaussian_mct_var(const GaussianModel& g, const Eigen::VectorXd& w, double eta) {
  check_eta(eta);
  const auto [mean, sd] = project_gaussian(g, w);
  const Eigen::VectorXd dscale = (g.cov * w) / sd;
  return -g.mu - normal_quantile(eta) * dscale;
}

Eigen::VectorXd gaussian_mct_cvar(const GaussianModel& g, const Eigen::VectorXd& w, double eta) {
  check_eta(eta);
  const auto [mean, sd] = project_gaussian(g, w);
  const Eigen::VectorXd dscale = (g.cov * w) / sd;
  return -g.mu + gaussian_cvar_std(eta) * dscale;
}

RiskReport gaussian_risk_report(const GaussianModel& g, const Eigen::VectorXd& w, double eta) {
  RiskReport report;
  report.eta = eta;
  std::tie(report.var, report.cvar) = gaussian_var_cvar(g, w, eta);
  report.mct_var = gaussian_mct_var(g, w, eta);
  report.mct_cvar = gaussian_mct_cvar(g, w, eta);
  return report;
}

}  // namespace ntsopt
