#include "ntsopt/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ntsopt/backtest.hpp"
#include "ntsopt/budget.hpp"
#include "ntsopt/csv.hpp"
#include "ntsopt/errors.hpp"
#include "ntsopt/estimate.hpp"
#include "ntsopt/frontier.hpp"
#include "ntsopt/market.hpp"
#include "ntsopt/model_io.hpp"
#include "ntsopt/risk.hpp"

namespace ntsopt::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string out_path(const std::string& dir, const char* name) {
  if (!dir.empty() && dir != ".") fs::create_directories(dir);
  return (fs::path(dir.empty() ? "." : dir) / name).string();
}

std::string fmt(double v) { return csv::format_number(v); }

// ---------------------------------------------------------------- ingestion

struct DatedSeries {
  std::vector<std::string> dates;
  std::vector<double> values;
};

// Single-value-column CSV; with prices=true the values are price levels and
// the series holds their log returns (dropping the first date), mirroring the
// panel loader's convention.
DatedSeries load_dated_series(const std::string& path, bool prices) {
  const csv::Table t = csv::read_table(path);
  if (t.values.cols() != 1)
    throw ParseError(path + ": expected exactly one value column, found " +
                     std::to_string(t.values.cols()));
  DatedSeries out;
  const Eigen::Index rows = t.values.rows();
  if (!prices) {
    out.dates = t.labels;
    out.values.assign(t.values.data(), t.values.data() + rows);
    return out;
  }
  if (rows < 3) throw ParseError(path + ": need at least three price rows");
  for (Eigen::Index r = 0; r < rows; ++r)
    if (!(t.values(r, 0) > 0.0))
      throw ParseError(path + ": nonpositive price in file row " + std::to_string(r + 2));
  out.dates.assign(t.labels.begin() + 1, t.labels.end());
  out.values.resize(static_cast<std::size_t>(rows - 1));
  for (Eigen::Index r = 1; r < rows; ++r)
    out.values[static_cast<std::size_t>(r - 1)] = std::log(t.values(r, 0) / t.values(r - 1, 0));
  return out;
}

bool date_in_range(const std::string& d, const std::string& start, const std::string& end) {
  if (!start.empty() && d < start) return false;
  if (!end.empty() && d > end) return false;
  return true;
}

void filter_panel(ReturnPanel& p, const std::string& start, const std::string& end) {
  if (start.empty() && end.empty()) return;
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < p.dates.size(); ++i)
    if (date_in_range(p.dates[i], start, end)) keep.push_back(static_cast<Eigen::Index>(i));
  if (keep.empty()) throw std::invalid_argument("date filter leaves no observations");
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(keep.size()), p.returns.cols());
  std::vector<std::string> dates;
  dates.reserve(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = p.returns.row(keep[i]);
    dates.push_back(p.dates[static_cast<std::size_t>(keep[i])]);
  }
  p.returns = std::move(rows);
  p.dates = std::move(dates);
}

void filter_series(DatedSeries& s, const std::string& start, const std::string& end) {
  if (start.empty() && end.empty()) return;
  DatedSeries out;
  for (std::size_t i = 0; i < s.dates.size(); ++i) {
    if (!date_in_range(s.dates[i], start, end)) continue;
    out.dates.push_back(s.dates[i]);
    out.values.push_back(s.values[i]);
  }
  if (out.dates.empty()) throw std::invalid_argument("date filter leaves no observations");
  s = std::move(out);
}

void require_aligned(const ReturnPanel& panel, const DatedSeries& index) {
  if (panel.dates != index.dates)
    throw ParseError("index dates do not align with the price panel (after any date filter)");
}

// Weight file: symbol,weight rows. When the model carries symbols the rows
// may come in any order but must cover the model exactly; otherwise the file
// order is taken as the asset order.
Eigen::VectorXd load_weights_file(const std::string& path,
                                  const std::vector<std::string>& symbols, Eigen::Index n) {
  const csv::Table t = csv::read_table(path);
  if (t.values.cols() != 1)
    throw ParseError(path + ": expected a single weight column, found " +
                     std::to_string(t.values.cols()));
  if (static_cast<Eigen::Index>(t.labels.size()) != n)
    throw ParseError(path + ": expected " + std::to_string(n) + " weight rows, found " +
                     std::to_string(t.labels.size()));
  Eigen::VectorXd w(n);
  if (symbols.empty()) {
    w = t.values.col(0);
    return w;
  }
  std::map<std::string, Eigen::Index> pos;
  for (Eigen::Index i = 0; i < n; ++i) pos[symbols[static_cast<std::size_t>(i)]] = i;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (std::size_t r = 0; r < t.labels.size(); ++r) {
    const auto it = pos.find(t.labels[r]);
    if (it == pos.end()) throw ParseError(path + ": unknown symbol '" + t.labels[r] + "'");
    if (seen[static_cast<std::size_t>(it->second)])
      throw ParseError(path + ": duplicate symbol '" + t.labels[r] + "'");
    seen[static_cast<std::size_t>(it->second)] = true;
    w[it->second] = t.values(static_cast<Eigen::Index>(r), 0);
  }
  return w;
}

Eigen::VectorXd normalize_weights(Eigen::VectorXd w) {
  if (w.minCoeff() < -1e-12)
    throw std::invalid_argument("weights must be nonnegative (long-only)");
  const double s = w.sum();
  if (std::abs(s - 1.0) > 1e-6)
    throw std::invalid_argument("weights must sum to 1 (got " + fmt(s) + ")");
  return w / s;
}

Eigen::VectorXd resolve_weights(const std::string& weights_path, bool equal,
                                const std::vector<std::string>& symbols, Eigen::Index n) {
  if (equal != weights_path.empty())
    throw std::invalid_argument("exactly one of --weights or --equal-weights is required");
  if (equal) return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return normalize_weights(load_weights_file(weights_path, symbols, n));
}

std::vector<std::string> weight_headers(const std::vector<std::string>& symbols, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < n; ++i)
    out.push_back("w_" + (symbols.empty() ? std::to_string(i + 1)
                                          : symbols[static_cast<std::size_t>(i)]));
  return out;
}

void append_weight_cells(std::vector<std::string>& row, const Eigen::VectorXd& w,
                         Eigen::Index n) {
  if (w.size() == n)
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(fmt(w[i]));
  else
    for (Eigen::Index i = 0; i < n; ++i) row.push_back("nan");
}

// Rank 1 for the smallest value, ties broken by asset order.
std::vector<int> ascending_ranks(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  std::vector<int> rank(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < idx.size(); ++k)
    rank[static_cast<std::size_t>(idx[k])] = static_cast<int>(k) + 1;
  return rank;
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw ParseError("failed writing '" + path + "'");
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ------------------------------------------------------------- subcommands

struct FitOpts {
  std::string prices, index, outdir = ".", start, end;
  bool as_returns = false;
  EstimateConfig estimate{};
};

int run_fit(const FitOpts& o) {
  const bool prices = !o.as_returns;
  ReturnPanel panel = load_return_panel(o.prices, prices);
  DatedSeries index = load_dated_series(o.index, prices);
  filter_panel(panel, o.start, o.end);
  filter_series(index, o.start, o.end);
  require_aligned(panel, index);

  const TwoStepFit fit = two_step_fit(panel, index.values, o.estimate);
  print_warnings(fit.warnings);

  save_model(out_path(o.outdir, "model.json"), fit.model, &fit);

  const Eigen::Index n = fit.model.size();
  Eigen::MatrixXd table(n, 5);
  for (Eigen::Index a = 0; a < n; ++a) {
    const FitResult& f = fit.asset_fits[static_cast<std::size_t>(a)];
    table(a, 0) = fit.model.mu()[a];
    table(a, 1) = fit.model.sigma()[a];
    table(a, 2) = fit.model.beta()[a];
    table(a, 3) = f.ks;
    table(a, 4) = f.p_value;
  }
  csv::write_table(out_path(o.outdir, "fit_table.csv"),
                   {"symbol", "mu", "sigma", "beta", "ks", "p_value"}, fit.model.symbols(),
                   table);

  std::cout << "fit: " << n << " assets, " << panel.returns.rows() << " days; index alpha="
            << fit.index_fit.params.alpha << " theta=" << fit.index_fit.params.theta
            << " beta=" << fit.index_fit.params.beta << " (KS p=" << fit.index_fit.p_value
            << ")\n"
            << "wrote model.json and fit_table.csv\n";
  return 0;
}

struct FrontierOpts {
  std::string model, outdir = ".";
  int b_points = 51, m_points = 51;
};

int run_frontier(const FrontierOpts& o, int threads) {
  const MarketModel m = load_model(o.model);
  const FrontierSurface surf = frontier_surface(m, o.b_points, o.m_points, threads);
  print_warnings(surf.errors);

  const Eigen::Index n = m.size();
  std::vector<std::string> header = {"b_star", "m_star", "feasible", "disp", "asym", "reward"};
  for (const std::string& h : weight_headers(m.symbols(), n)) header.push_back(h);

  std::vector<std::vector<std::string>> rows;
  int feasible_count = 0;
  for (std::size_t i = 0; i < surf.b_grid.size(); ++i) {
    for (std::size_t j = 0; j < surf.m_grid.size(); ++j) {
      const FrontierPoint& p = surf.points[i][j];
      feasible_count += p.feasible ? 1 : 0;
      std::vector<std::string> row = {fmt(surf.b_grid[i]),    fmt(surf.m_grid[j]),
                                      p.feasible ? "1" : "0", fmt(p.disp),
                                      fmt(p.asym),            fmt(p.reward)};
      append_weight_cells(row, p.w, n);
      rows.push_back(std::move(row));
    }
  }
  csv::write_rows(out_path(o.outdir, "surface.csv"), header, rows);
  std::cout << "frontier: " << surf.b_grid.size() << "x" << surf.m_grid.size() << " cells, "
            << feasible_count << " feasible; wrote surface.csv\n";
  return 0;
}

struct AsratioOpts {
  std::string model, outdir = ".";
  double r_f = 0.0;
  int points = 51;
};

int run_asratio(const AsratioOpts& o) {
  const MarketModel m = load_model(o.model);
  const AsRatioCurve curve = as_ratio_curve(m, o.r_f, o.points);
  const AsRatioMax best = maximize_as_ratio(m, o.r_f, o.points);

  const Eigen::Index n = m.size();
  std::vector<std::string> header = {"b_star", "feasible", "a_score", "sharpe", "as_ratio"};
  for (const std::string& h : weight_headers(m.symbols(), n)) header.push_back(h);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < curve.b.size(); ++i) {
    std::vector<std::string> row = {fmt(curve.b[i]), curve.feasible[i] ? "1" : "0",
                                    fmt(curve.a_score[i]), fmt(curve.sharpe[i]),
                                    fmt(curve.as_value[i])};
    append_weight_cells(row, curve.w[i], n);
    rows.push_back(std::move(row));
  }
  csv::write_rows(out_path(o.outdir, "curve.csv"), header, rows);

  json doc;
  doc["b_star"] = best.b_star;
  doc["as_ratio"] = best.value;
  doc["sharpe"] = best.sharpe;
  doc["a_score"] = as_score(best.b_star, m.alpha(), m.theta());
  doc["r_f"] = o.r_f;
  doc["weights"] = std::vector<double>(best.w.data(), best.w.data() + best.w.size());
  doc["symbols"] = m.symbols();
  write_json_file(out_path(o.outdir, "optimum.json"), doc);

  std::cout << "asratio: optimum b*=" << best.b_star << " value=" << best.value
            << " sharpe=" << best.sharpe << "; wrote curve.csv and optimum.json\n";
  return 0;
}

struct MarginalOpts {
  std::string model, weights, outdir = ".";
  bool equal = false;
  double eta = 0.01;
};

int run_marginal(const MarginalOpts& o) {
  const MarketModel m = load_model(o.model);
  const Eigen::Index n = m.size();
  const Eigen::VectorXd w = resolve_weights(o.weights, o.equal, m.symbols(), n);

  const RiskReport nts = nts_risk_report(m, w, o.eta);
  const RiskReport gauss = gaussian_risk_report(to_gaussian(m), w, o.eta);
  const std::vector<int> rank_var_g = ascending_ranks(gauss.mct_var);
  const std::vector<int> rank_var_n = ascending_ranks(nts.mct_var);
  const std::vector<int> rank_cvar_g = ascending_ranks(gauss.mct_cvar);
  const std::vector<int> rank_cvar_n = ascending_ranks(nts.mct_cvar);

  std::vector<std::vector<std::string>> rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const std::string sym =
        m.symbols().empty() ? std::to_string(i + 1) : m.symbols()[k];
    rows.push_back({sym, fmt(w[i]), fmt(gauss.mct_var[i]),
                    fmt(static_cast<double>(rank_var_g[k])), fmt(nts.mct_var[i]),
                    fmt(static_cast<double>(rank_var_n[k])), fmt(gauss.mct_cvar[i]),
                    fmt(static_cast<double>(rank_cvar_g[k])), fmt(nts.mct_cvar[i]),
                    fmt(static_cast<double>(rank_cvar_n[k]))});
  }
  csv::write_rows(out_path(o.outdir, "risk_table.csv"),
                  {"symbol", "weight", "mct_var_gauss", "rank_var_gauss", "mct_var_nts",
                   "rank_var_nts", "mct_cvar_gauss", "rank_cvar_gauss", "mct_cvar_nts",
                   "rank_cvar_nts"},
                  rows);

  std::cout << "marginal: eta=" << o.eta << " VaR nts=" << nts.var << " gauss=" << gauss.var
            << "; CVaR nts=" << nts.cvar << " gauss=" << gauss.cvar
            << "; wrote risk_table.csv\n";
  return 0;
}

struct BudgetOpts {
  std::string model, weights, prices, outdir = ".", start, end;
  std::string measure = "cvar", driver = "nts";
  bool equal = false, as_returns = false;
  double d = 2.5e-4, eta = 0.01;
  int steps = 50;
};

int run_budget(const BudgetOpts& o) {
  const MarketModel m = load_model(o.model);
  const Eigen::Index n = m.size();
  const Eigen::VectorXd w0 = resolve_weights(o.weights, o.equal, m.symbols(), n);

  RiskMeasure measure;
  if (o.measure == "var")
    measure = RiskMeasure::VaR;
  else if (o.measure == "cvar")
    measure = RiskMeasure::CVaR;
  else
    throw std::invalid_argument("--measure must be 'var' or 'cvar'");
  BudgetDriver driver;
  if (o.driver == "nts")
    driver = BudgetDriver::Nts;
  else if (o.driver == "gaussian")
    driver = BudgetDriver::Gaussian;
  else
    throw std::invalid_argument("--driver must be 'nts' or 'gaussian'");

  std::optional<ReturnPanel> panel;
  if (!o.prices.empty()) {
    ReturnPanel p = load_return_panel(o.prices, !o.as_returns);
    filter_panel(p, o.start, o.end);
    if (!p.assets.empty() && !m.symbols().empty() && p.assets != m.symbols())
      throw ParseError("panel symbols do not match the model");
    panel = std::move(p);
  }

  const BudgetTrajectory traj =
      iterative_budget(m, w0, o.d, o.eta, o.steps, measure, driver, panel);

  std::vector<std::string> header = {"iteration", "var_model", "cvar_model"};
  if (panel.has_value()) {
    header.push_back("var_hist");
    header.push_back("cvar_hist");
  }
  for (const std::string& h : weight_headers(m.symbols(), n)) header.push_back(h);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < traj.iterations.size(); ++k) {
    const BudgetIteration& it = traj.iterations[k];
    std::vector<std::string> row = {std::to_string(k), fmt(it.var_model), fmt(it.cvar_model)};
    if (panel.has_value()) {
      row.push_back(fmt(it.var_hist));
      row.push_back(fmt(it.cvar_hist));
    }
    append_weight_cells(row, it.w, n);
    rows.push_back(std::move(row));
  }
  csv::write_rows(out_path(o.outdir, "trajectory.csv"), header, rows);

  const char* name = measure == RiskMeasure::VaR ? "VaR" : "CVaR";
  const double first =
      measure == RiskMeasure::VaR ? traj.iterations.front().var_model
                                  : traj.iterations.front().cvar_model;
  const double last = measure == RiskMeasure::VaR ? traj.iterations.back().var_model
                                                  : traj.iterations.back().cvar_model;
  std::cout << "budget: " << o.steps << " steps, model " << name << " " << first << " -> "
            << last << "; wrote trajectory.csv\n";
  return 0;
}

struct BacktestOpts {
  std::string prices, index, weights, outdir = ".", start, end;
  std::string strategy = "asratio";
  bool as_returns = false, equal = false;
  BacktestConfig cfg{};
};

int run_backtest(const BacktestOpts& o) {
  const bool prices = !o.as_returns;
  ReturnPanel panel = load_return_panel(o.prices, prices);
  DatedSeries index = load_dated_series(o.index, prices);
  filter_panel(panel, o.start, o.end);
  filter_series(index, o.start, o.end);
  require_aligned(panel, index);

  BacktestConfig cfg = o.cfg;
  if (o.strategy == "asratio")
    cfg.strategy = Strategy::AsRatioMax;
  else if (o.strategy == "sharpe")
    cfg.strategy = Strategy::SharpeMax;
  else if (o.strategy == "fixed")
    cfg.strategy = Strategy::FixedWeights;
  else
    throw std::invalid_argument("--strategy must be 'asratio', 'sharpe' or 'fixed'");
  if (cfg.strategy == Strategy::FixedWeights)
    cfg.fixed_weights = resolve_weights(o.weights, o.equal, panel.assets, panel.returns.cols());
  else if (!o.weights.empty() || o.equal)
    throw std::invalid_argument("--weights/--equal-weights require --strategy fixed");

  const BacktestResult res = rolling_backtest(panel, index.values, cfg);
  print_warnings(res.warnings);

  std::vector<std::vector<std::string>> rows;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < res.returns.size(); ++i) {
    cumulative += res.returns[i];
    rows.push_back({res.dates[i], fmt(res.returns[i]), fmt(cumulative)});
  }
  csv::write_rows(out_path(o.outdir, "returns.csv"), {"date", "return", "cumulative"}, rows);

  json doc;
  doc["n_days"] = res.returns.size();
  doc["window"] = cfg.window;
  doc["rebalance_every"] = cfg.rebalance_every;
  doc["strategy"] = o.strategy;
  doc["eta"] = cfg.eta;
  doc["r_f"] = cfg.r_f;
  doc["rebalances"] = res.rebalance_dates.size();
  doc["warnings"] = res.warnings;
  try {
    const PerfReport rep = perf_report(res.returns, cfg.eta, cfg.r_f, cfg.estimate);
    doc["mean"] = rep.mean;
    doc["stddev"] = rep.stddev;
    doc["sharpe"] = rep.sharpe;
    doc["hist_var"] = rep.hist_var;
    doc["hist_cvar"] = rep.hist_cvar;
    doc["var_ratio"] = rep.var_ratio;
    doc["cvar_ratio"] = rep.cvar_ratio;
    doc["fit"] = {{"alpha", rep.alpha},
                  {"theta", rep.theta},
                  {"beta", rep.beta},
                  {"as_ratio_of_fit", rep.as_ratio_of_fit}};
  } catch (const std::invalid_argument&) {
    // Horizon too short for the shape fit: report plain moments, leave the
    // fit-dependent fields null.
    doc["fit"] = nullptr;
    if (res.returns.size() >= 2) {
      const StandardizeResult st = standardize(res.returns);
      doc["mean"] = st.mean;
      doc["stddev"] = st.stddev;
      doc["sharpe"] = (st.mean - cfg.r_f) / st.stddev;
    }
    try {
      const auto [hv, hc] = historical_var_cvar(res.returns, cfg.eta);
      doc["hist_var"] = hv;
      doc["hist_cvar"] = hc;
    } catch (const std::invalid_argument&) {
      doc["hist_var"] = nullptr;
      doc["hist_cvar"] = nullptr;
    }
  }
  write_json_file(out_path(o.outdir, "perf.json"), doc);

  std::cout << "backtest: " << res.returns.size() << " days, " << res.rebalance_dates.size()
            << " rebalances, " << res.warnings.size()
            << " warnings; wrote returns.csv and perf.json\n";
  return 0;
}

void add_estimate_flags(CLI::App* cmd, EstimateConfig& cfg) {
  cmd->add_option("--starts", cfg.starts, "Multistart count for the full fit");
  cmd->add_option("--grid-size", cfg.grid_size, "Smoothed-ECDF grid points");
  cmd->add_option("--bandwidth", cfg.bandwidth, "Kernel bandwidth (<=0 selects Silverman)");
  cmd->add_option("--max-evals", cfg.max_evaluations, "Objective evaluations per start");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Normal tempered stable market models: estimation, frontiers, risk budgets"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key=value file ([section] per subcommand)");
  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = hardware)");

  FitOpts fit_opts;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the market model from price/return CSVs");
  fit_cmd->fallthrough();
  fit_cmd->add_option("--prices", fit_opts.prices, "Asset panel CSV (date,SYM1,...)")->required();
  fit_cmd->add_option("--index", fit_opts.index, "Index series CSV (date,value)")->required();
  fit_cmd->add_flag("--returns", fit_opts.as_returns,
                    "Treat input cells as log returns instead of price levels");
  fit_cmd->add_option("--start", fit_opts.start, "Keep dates >= this (ISO-8601)");
  fit_cmd->add_option("--end", fit_opts.end, "Keep dates <= this (ISO-8601)");
  fit_cmd->add_option("--outdir", fit_opts.outdir, "Output directory");
  add_estimate_flags(fit_cmd, fit_opts.estimate);

  FrontierOpts frontier_opts;
  CLI::App* frontier_cmd =
      app.add_subcommand("frontier", "Mean-dispersion-asymmetry frontier surface");
  frontier_cmd->fallthrough();
  frontier_cmd->add_option("--model", frontier_opts.model, "model.json path")->required();
  frontier_cmd->add_option("--b-points", frontier_opts.b_points, "Asymmetry grid points");
  frontier_cmd->add_option("--m-points", frontier_opts.m_points, "Reward grid points");
  frontier_cmd->add_option("--outdir", frontier_opts.outdir, "Output directory");

  AsratioOpts asratio_opts;
  CLI::App* asratio_cmd =
      app.add_subcommand("asratio", "AS-ratio curve and its maximizing portfolio");
  asratio_cmd->fallthrough();
  asratio_cmd->add_option("--model", asratio_opts.model, "model.json path")->required();
  asratio_cmd->add_option("--rf", asratio_opts.r_f, "Daily risk-free rate");
  asratio_cmd->add_option("--points", asratio_opts.points, "Scan points along the skew floor");
  asratio_cmd->add_option("--outdir", asratio_opts.outdir, "Output directory");

  MarginalOpts marginal_opts;
  CLI::App* marginal_cmd =
      app.add_subcommand("marginal", "Marginal VaR/CVaR contributions per asset");
  marginal_cmd->fallthrough();
  marginal_cmd->add_option("--model", marginal_opts.model, "model.json path")->required();
  marginal_cmd->add_option("--weights", marginal_opts.weights, "Weights CSV (symbol,weight)");
  marginal_cmd->add_flag("--equal-weights", marginal_opts.equal, "Use 1/N weights");
  marginal_cmd->add_option("--eta", marginal_opts.eta, "Tail probability");
  marginal_cmd->add_option("--outdir", marginal_opts.outdir, "Output directory");

  BudgetOpts budget_opts;
  CLI::App* budget_cmd =
      app.add_subcommand("budget", "Iterative tail-risk reallocation trajectory");
  budget_cmd->fallthrough();
  budget_cmd->add_option("--model", budget_opts.model, "model.json path")->required();
  budget_cmd->add_option("--weights", budget_opts.weights, "Starting weights CSV");
  budget_cmd->add_flag("--equal-weights", budget_opts.equal, "Start from 1/N weights");
  budget_cmd->add_option("--d", budget_opts.d, "Per-asset box radius per step");
  budget_cmd->add_option("--steps", budget_opts.steps, "Number of reallocation steps");
  budget_cmd->add_option("--eta", budget_opts.eta, "Tail probability");
  budget_cmd->add_option("--measure", budget_opts.measure, "Risk measure: var or cvar");
  budget_cmd->add_option("--driver", budget_opts.driver,
                         "Marginal contributions used for steps: nts or gaussian");
  budget_cmd->add_option("--prices", budget_opts.prices,
                         "Optional panel CSV for historical risk columns");
  budget_cmd->add_flag("--returns", budget_opts.as_returns,
                       "Treat panel cells as log returns instead of price levels");
  budget_cmd->add_option("--start", budget_opts.start, "Keep dates >= this");
  budget_cmd->add_option("--end", budget_opts.end, "Keep dates <= this");
  budget_cmd->add_option("--outdir", budget_opts.outdir, "Output directory");

  BacktestOpts backtest_opts;
  CLI::App* backtest_cmd =
      app.add_subcommand("backtest", "Walk-forward strategy evaluation");
  backtest_cmd->fallthrough();
  backtest_cmd->add_option("--prices", backtest_opts.prices, "Asset panel CSV")->required();
  backtest_cmd->add_option("--index", backtest_opts.index, "Index series CSV")->required();
  backtest_cmd->add_flag("--returns", backtest_opts.as_returns,
                         "Treat input cells as log returns instead of price levels");
  backtest_cmd->add_option("--start", backtest_opts.start, "Keep dates >= this");
  backtest_cmd->add_option("--end", backtest_opts.end, "Keep dates <= this");
  backtest_cmd->add_option("--window", backtest_opts.cfg.window, "Trailing fit window (days)");
  backtest_cmd->add_option("--rebalance", backtest_opts.cfg.rebalance_every,
                           "Days between rebalances");
  backtest_cmd->add_option("--eta", backtest_opts.cfg.eta, "Tail probability for reporting");
  backtest_cmd->add_option("--rf", backtest_opts.cfg.r_f, "Daily risk-free rate");
  backtest_cmd->add_option("--strategy", backtest_opts.strategy,
                           "asratio, sharpe, or fixed");
  backtest_cmd->add_option("--weights", backtest_opts.weights,
                           "Weights CSV for --strategy fixed");
  backtest_cmd->add_flag("--equal-weights", backtest_opts.equal,
                         "Fixed 1/N weights for --strategy fixed");
  backtest_cmd->add_option("--outdir", backtest_opts.outdir, "Output directory");
  add_estimate_flags(backtest_cmd, backtest_opts.cfg.estimate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) return run_fit(fit_opts);
    if (*frontier_cmd) return run_frontier(frontier_opts, threads);
    if (*asratio_cmd) return run_asratio(asratio_opts);
    if (*marginal_cmd) return run_marginal(marginal_opts);
    if (*budget_cmd) return run_budget(budget_opts);
    if (*backtest_cmd) return run_backtest(backtest_opts);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace ntsopt::cli
