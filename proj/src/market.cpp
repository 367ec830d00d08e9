#include "ntsopt/market.hpp"

#include <cmath>
#include <sstream>

#include "ntsopt/errors.hpp"
#include "ntsopt/rng.hpp"

namespace ntsopt {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidModelError(msg);
}

}  // namespace

MarketModel::MarketModel(double alpha, double theta, Eigen::VectorXd mu, Eigen::VectorXd sigma,
                         Eigen::VectorXd beta, Eigen::MatrixXd cov, std::vector<std::string> symbols)
    : alpha_(alpha),
      theta_(theta),
      mu_(std::move(mu)),
      sigma_(std::move(sigma)),
      beta_(std::move(beta)),
      cov_(std::move(cov)),
      symbols_(std::move(symbols)) {
  SubordinatorParams tail(alpha_, theta_);  // validates alpha, theta
  const auto n = mu_.size();
  require(n >= 1, "MarketModel: need at least one asset");
  require(sigma_.size() == n && beta_.size() == n && cov_.rows() == n && cov_.cols() == n,
          "MarketModel: dimension mismatch between mu, sigma, beta, cov");
  require(!symbols_.empty() ? static_cast<Eigen::Index>(symbols_.size()) == n : true,
          "MarketModel: symbol list does not match asset count");
  require(mu_.allFinite() && sigma_.allFinite() && beta_.allFinite() && cov_.allFinite(),
          "MarketModel: parameters must be finite");
  require((sigma_.array() > 0.0).all(), "MarketModel: sigma must be positive");

  const double bound = beta_bound();
  for (Eigen::Index k = 0; k < n; ++k)
    require(std::abs(beta_[k]) < bound,
            "MarketModel: |beta| >= sqrt(2*theta/(2-alpha)) for asset " + std::to_string(k));

  require(cov_.isApprox(cov_.transpose(), 1e-10), "MarketModel: covariance must be symmetric");
  for (Eigen::Index k = 0; k < n; ++k) {
    const double d = cov_(k, k);
    require(std::abs(d - sigma_[k] * sigma_[k]) <= 1e-8 * std::max(1.0, d),
            "MarketModel: cov diagonal must equal sigma^2 (asset " + std::to_string(k) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_);
  require(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()),
          "MarketModel: covariance is not positive semidefinite");

  // Mixing-normal correlations implied by the return covariance:
  //   corr(R_k, R_l) = beta_k beta_l (2-alpha)/(2 theta) + gamma_k gamma_l rho_kl
  const double c = (2.0 - alpha_) / (2.0 * theta_);
  Eigen::VectorXd gamma(n);
  for (Eigen::Index k = 0; k < n; ++k) gamma[k] = std::sqrt(1.0 - beta_[k] * beta_[k] * c);
  eps_corr_.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      if (k == l) {
        eps_corr_(k, l) = 1.0;
        continue;
      }
      const double corr = cov_(k, l) / (sigma_[k] * sigma_[l]);
      eps_corr_(k, l) = (corr - beta_[k] * beta_[l] * c) / (gamma[k] * gamma[l]);
    }
  }
  std::ostringstream issue;
  const double max_abs = eps_corr_.cwiseAbs().maxCoeff();
  if (max_abs > 1.0 + 1e-10) {
    issue << "implied mixing correlation reaches " << max_abs << " (outside [-1, 1])";
  } else {
    eps_corr_ = eps_corr_.cwiseMax(-1.0).cwiseMin(1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_eps(eps_corr_);
    if (es_eps.eigenvalues().minCoeff() < -1e-10)
      issue << "implied mixing correlation matrix is not positive semidefinite (min eigenvalue "
            << es_eps.eigenvalues().minCoeff() << ")";
  }
  sampling_issue_ = issue.str();
}

double MarketModel::beta_bound() const { return std::sqrt(2.0 * theta_ / (2.0 - alpha_)); }

const Eigen::MatrixXd& MarketModel::implied_epsilon_corr() const {
  if (!samplable()) throw InvalidModelError("MarketModel: " + sampling_issue_);
  return eps_corr_;
}

PortfolioProjection project_portfolio(const MarketModel& m, const Eigen::VectorXd& w) {
  if (w.size() != m.size()) throw std::invalid_argument("project_portfolio: weight size mismatch");
  if (!w.allFinite()) throw std::invalid_argument("project_portfolio: weights must be finite");
  const double mu_bar = w.dot(m.mu());
  const double var = w.dot(m.cov() * w);
  if (var <= 1e-24) throw std::invalid_argument("project_portfolio: degenerate portfolio (zero variance)");
  const double sigma_bar = std::sqrt(var);
  const double beta_bar = w.dot(m.sigma().cwiseProduct(m.beta())) / sigma_bar;
  return {mu_bar, sigma_bar, beta_bar};
}

double asym_measure(const MarketModel& m, const Eigen::VectorXd& w) {
  if (w.size() != m.size()) throw std::invalid_argument("asym_measure: weight dimension mismatch");
  return w.dot(m.beta());
}

double disp_measure(const MarketModel& m, const Eigen::VectorXd& w) {
  return project_portfolio(m, w).sigma_bar;
}

Eigen::MatrixXd sample_market(const MarketModel& m, std::size_t n, std::uint64_t seed) {
  if (!m.samplable()) throw InvalidModelError("sample_market: " + m.sampling_issue());
  const Eigen::Index dim = m.size();
  const double c = (2.0 - m.alpha()) / (2.0 * m.theta());
  Eigen::VectorXd gamma(dim);
  for (Eigen::Index k = 0; k < dim; ++k)
    gamma[k] = std::sqrt(1.0 - m.beta()[k] * m.beta()[k] * c);

  // PSD square root via eigendecomposition; LLT would reject the boundary
  // case of exactly-unit correlations.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.implied_epsilon_corr());
  Eigen::MatrixXd chol =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  Rng rng(seed);
  SubordinatorParams sub{m.alpha(), m.theta()};
  Eigen::MatrixXd draws(static_cast<Eigen::Index>(n), dim);
  Eigen::VectorXd z(dim);
  std::vector<double> t_draws = sample_subordinator(sub, n, seed + 1);
  for (std::size_t row = 0; row < n; ++row) {
    const double t = t_draws[row];
    const double sqrt_t = std::sqrt(t);
    for (Eigen::Index k = 0; k < dim; ++k) z[k] = rng.normal();
    const Eigen::VectorXd eps = chol * z;
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double x = m.beta()[k] * (t - 1.0) + sqrt_t * gamma[k] * eps[k];
      draws(static_cast<Eigen::Index>(row), k) = m.mu()[k] + m.sigma()[k] * x;
    }
  }
  return draws;
}

GaussianModel to_gaussian(const MarketModel& m) { return {m.mu(), m.cov()}; }

std::pair<double, double> project_gaussian(const GaussianModel& g, const Eigen::VectorXd& w) {
  if (w.size() != g.mu.size()) throw std::invalid_argument("project_gaussian: weight size mismatch");
  const double var = w.dot(g.cov * w);
  if (var <= 1e-24) throw std::invalid_argument("project_gaussian: degenerate portfolio");
  return {w.dot(g.mu), std::sqrt(var)};
}

}  // namespace ntsopt
