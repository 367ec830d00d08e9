#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <doctest.h>
#include <filesystem>
#include <json.hpp>
#include <stdexcept>

#include "ntsopt/errors.hpp"
#include "ntsopt/market.hpp"
#include "ntsopt/model_io.hpp"

using namespace ntsopt;

namespace {

MarketModel reference_model(bool with_symbols = true) {
  Eigen::VectorXd mu(3);
  mu << 0.0004, 0.0006, 0.0002;
  Eigen::VectorXd sigma(3);
  sigma << 0.010, 0.014, 0.018;
  Eigen::VectorXd beta(3);
  beta << -0.25, -0.45, -0.35;
  Eigen::MatrixXd corr(3, 3);
  corr << 1.0, 0.3, 0.2,
          0.3, 1.0, 0.25,
          0.2, 0.25, 1.0;
  Eigen::MatrixXd cov = sigma.asDiagonal() * corr * sigma.asDiagonal();
  std::vector<std::string> symbols;
  if (with_symbols) symbols = {"AAA", "BBB", "CCC"};
  return MarketModel(0.9766, 0.2253, mu, sigma, beta, cov, symbols);
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("json round-trip reproduces the model bit for bit") {
  const MarketModel m = reference_model();
  const MarketModel back = model_from_json(model_to_json(m));
  CHECK(back.alpha() == m.alpha());
  CHECK(back.theta() == m.theta());
  CHECK((back.mu() - m.mu()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((back.sigma() - m.sigma()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((back.beta() - m.beta()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((back.cov() - m.cov()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(back.symbols() == m.symbols());

  // A model with no symbol list round-trips to an empty list.
  const MarketModel plain = model_from_json(model_to_json(reference_model(false)));
  CHECK(plain.symbols().empty());
  CHECK(plain.size() == 3);
}

TEST_CASE("file save and load round-trip") {
  const std::string path = temp_path("ntsopt_model_io_test.json");
  const MarketModel m = reference_model();
  save_model(path, m);
  const MarketModel back = load_model(path);
  CHECK(back.alpha() == m.alpha());
  CHECK((back.cov() - m.cov()).lpNorm<Eigen::Infinity>() == 0.0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_model(path), ParseError);
}

TEST_CASE("fit metadata is embedded when provided") {
  const MarketModel m = reference_model();
  TwoStepFit fit{m,
                 FitResult{StdNtsParams(0.9766, 0.2253, -0.4), 1.2e-5, 0.011, 0.83},
                 {FitResult{StdNtsParams(0.9766, 0.2253, -0.25), 2.0e-5, 0.02, 0.5},
                  FitResult{StdNtsParams(0.9766, 0.2253, -0.45), 3.0e-5, 0.03, 0.4},
                  FitResult{StdNtsParams(0.9766, 0.2253, -0.35), 4.0e-5, 0.04, 0.3}},
                 {"sample warning"}};
  const nlohmann::json doc = nlohmann::json::parse(model_to_json(m, &fit));
  REQUIRE(doc.contains("fit"));
  CHECK(doc["fit"]["index"]["beta"].get<double>() == -0.4);
  CHECK(doc["fit"]["index"]["p_value"].get<double>() == 0.83);
  REQUIRE(doc["fit"]["assets"].size() == 3);
  CHECK(doc["fit"]["assets"][1]["symbol"].get<std::string>() == "BBB");
  CHECK(doc["fit"]["assets"][2]["ks"].get<double>() == 0.04);
  CHECK(doc["fit"]["warnings"].size() == 1);

  // The fit block is advisory: loading ignores it and still yields the model.
  const MarketModel back = model_from_json(doc.dump());
  CHECK(back.theta() == m.theta());
}

TEST_CASE("structural defects raise parse errors") {
  const nlohmann::json good = nlohmann::json::parse(model_to_json(reference_model()));

  CHECK_THROWS_AS(model_from_json("{]"), ParseError);
  CHECK_THROWS_AS(model_from_json("[1,2,3]"), ParseError);

  nlohmann::json bad = good;
  bad.erase("theta");
  CHECK_THROWS_AS(model_from_json(bad.dump()), ParseError);

  bad = good;
  bad["schema"] = "ntsopt.market.v999";
  CHECK_THROWS_AS(model_from_json(bad.dump()), ParseError);

  bad = good;
  bad["sigma"].erase(2);
  CHECK_THROWS_AS(model_from_json(bad.dump()), ParseError);

  bad = good;
  bad["mu"][0] = "not a number";
  CHECK_THROWS_AS(model_from_json(bad.dump()), ParseError);

  bad = good;
  bad["cov"].erase(8);
  CHECK_THROWS_AS(model_from_json(bad.dump()), ParseError);

  bad = good;
  bad["symbols"] = {"only", "two"};
  CHECK_THROWS_AS(model_from_json(bad.dump()), ParseError);

  bad = good;
  bad["mu"] = nlohmann::json::array();
  CHECK_THROWS_AS(model_from_json(bad.dump()), ParseError);

  bad = good;
  bad["alpha"] = nullptr;
  CHECK_THROWS_AS(model_from_json(bad.dump()), ParseError);
}

TEST_CASE("model invariant violations surface as model errors") {
  nlohmann::json doc = nlohmann::json::parse(model_to_json(reference_model()));
  doc["beta"][0] = 5.0;  // far outside the admissible band for (0.9766, 0.2253)
  CHECK_THROWS_AS(model_from_json(doc.dump()), InvalidModelError);

  doc = nlohmann::json::parse(model_to_json(reference_model()));
  doc["alpha"] = 2.5;  // stability index must stay below 2
  CHECK_THROWS_AS(model_from_json(doc.dump()), std::domain_error);
}
