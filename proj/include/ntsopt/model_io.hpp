#pragma once

#include <string>

#include "ntsopt/estimate.hpp"
#include "ntsopt/market.hpp"

namespace ntsopt {

// JSON persistence for fitted market models. The document is a flat object
// tagged "ntsopt.market.v1" holding alpha/theta, the per-asset mu/sigma/beta
// arrays, symbols, and the covariance in row-major order, plus an optional
// "fit" block with the estimation diagnostics. Doubles are emitted in their
// shortest round-trip form, so save/load reproduces the model bit for bit.
std::string model_to_json(const MarketModel& m, const TwoStepFit* fit = nullptr);

// Throws ParseError for anything structurally wrong with the document and
// lets InvalidModelError from the model constructor pass through.
MarketModel model_from_json(const std::string& text);

void save_model(const std::string& path, const MarketModel& m, const TwoStepFit* fit = nullptr);
MarketModel load_model(const std::string& path);

}  // namespace ntsopt
