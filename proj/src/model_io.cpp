#include "ntsopt/model_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ntsopt/errors.hpp"

namespace ntsopt {

namespace {

using nlohmann::json;

constexpr const char* kSchema = "ntsopt.market.v1";

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json fit_result_to_json(const FitResult& f) {
  return json{{"alpha", f.params.alpha}, {"theta", f.params.theta}, {"beta", f.params.beta},
              {"objective", f.objective}, {"ks", f.ks},             {"p_value", f.p_value}};
}

const json& require(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ParseError(std::string("model json: missing key '") + key + "'");
  return *it;
}

Eigen::VectorXd vector_from_json(const json& arr, const char* key, Eigen::Index want) {
  if (!arr.is_array())
    throw ParseError(std::string("model json: '") + key + "' must be an array");
  if (want >= 0 && static_cast<Eigen::Index>(arr.size()) != want)
    throw ParseError(std::string("model json: '") + key + "' has wrong length");
  Eigen::VectorXd out(static_cast<Eigen::Index>(arr.size()));
  Eigen::Index i = 0;
  for (const auto& cell : arr) {
    if (!cell.is_number())
      throw ParseError(std::string("model json: '") + key + "' holds a non-numeric entry");
    out[i++] = cell.get<double>();
  }
  return out;
}

double number_from_json(const json& doc, const char* key) {
  const json& v = require(doc, key);
  if (!v.is_number()) throw ParseError(std::string("model json: '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

std::string model_to_json(const MarketModel& m, const TwoStepFit* fit) {
  const Eigen::Index n = m.size();
  json doc;
  doc["schema"] = kSchema;
  doc["alpha"] = m.alpha();
  doc["theta"] = m.theta();
  doc["symbols"] = m.symbols();
  doc["mu"] = vector_to_json(m.mu());
  doc["sigma"] = vector_to_json(m.sigma());
  doc["beta"] = vector_to_json(m.beta());
  json cov = json::array();
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) cov.push_back(m.cov()(r, c));
  doc["cov"] = std::move(cov);

  if (fit != nullptr) {
    json fit_block;
    fit_block["index"] = fit_result_to_json(fit->index_fit);
    json assets = json::array();
    for (std::size_t a = 0; a < fit->asset_fits.size(); ++a) {
      json row = fit_result_to_json(fit->asset_fits[a]);
      if (a < fit->model.symbols().size()) row["symbol"] = fit->model.symbols()[a];
      assets.push_back(std::move(row));
    }
    fit_block["assets"] = std::move(assets);
    fit_block["warnings"] = fit->warnings;
    doc["fit"] = std::move(fit_block);
  }
  return doc.dump(2) + "\n";
}

MarketModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model json: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model json: top level must be an object");

  const json& schema = require(doc, "schema");
  if (!schema.is_string() || schema.get<std::string>() != kSchema)
    throw ParseError("model json: unsupported schema tag");

  const double alpha = number_from_json(doc, "alpha");
  const double theta = number_from_json(doc, "theta");
  const Eigen::VectorXd mu = vector_from_json(require(doc, "mu"), "mu", -1);
  const Eigen::Index n = mu.size();
  if (n == 0) throw ParseError("model json: 'mu' must not be empty");
  const Eigen::VectorXd sigma = vector_from_json(require(doc, "sigma"), "sigma", n);
  const Eigen::VectorXd beta = vector_from_json(require(doc, "beta"), "beta", n);

  const json& symbols_json = require(doc, "symbols");
  if (!symbols_json.is_array())
    throw ParseError("model json: 'symbols' must be an array");
  std::vector<std::string> symbols;
  for (const auto& s : symbols_json) {
    if (!s.is_string()) throw ParseError("model json: 'symbols' holds a non-string entry");
    symbols.push_back(s.get<std::string>());
  }
  if (!symbols.empty() && static_cast<Eigen::Index>(symbols.size()) != n)
    throw ParseError("model json: 'symbols' has wrong length");

  const Eigen::VectorXd cov_flat = vector_from_json(require(doc, "cov"), "cov", n * n);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) cov(r, c) = cov_flat[r * n + c];

  return MarketModel(alpha, theta, mu, sigma, beta, cov, std::move(symbols));
}

void save_model(const std::string& path, const MarketModel& m, const TwoStepFit* fit) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << model_to_json(m, fit);
  if (!out) throw ParseError("failed writing '" + path + "'");
}

MarketModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace ntsopt
