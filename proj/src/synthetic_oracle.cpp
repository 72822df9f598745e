#include "devalign/synthetic_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "devalign/core_model.hpp"
#include "devalign/error.hpp"
#include "devalign/rng.hpp"

namespace devalign::oracle {

void validate(const OracleParams& params) {
  if (!(params.sigma > 0.0) || !(params.sigma * std::log(9.0) < std::numbers::pi)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must satisfy 0 < sigma * ln 9 < pi");
  }
  if (params.dim < 2) throw Error(ErrorCode::InvalidArgument, "dim must be >= 2");
  if (params.replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
  if (params.stimulus_set < 1 || params.stimulus_set > 6) {
    throw Error(ErrorCode::InvalidArgument, "stimulus_set must be in 1..6");
  }
  if (params.epochs.empty()) throw Error(ErrorCode::InvalidArgument, "empty epoch schedule");
  for (std::size_t i = 0; i < params.epochs.size(); ++i) {
    const auto& e = params.epochs[i];
    if (e.epoch < 0 || !(e.noise_level >= 0.0) || !std::isfinite(e.noise_level)) {
      throw Error(ErrorCode::InvalidArgument, "epoch >= 0 and finite noise >= 0 required");
    }
    if (i > 0 && e.epoch <= params.epochs[i - 1].epoch) {
      throw Error(ErrorCode::InvalidArgument, "schedule epochs must be strictly increasing");
    }
    if (i > 0 && e.noise_level > params.epochs[i - 1].noise_level) {
      throw Error(ErrorCode::InvalidArgument, "noise schedule must be non-increasing");
    }
  }
}

double base_angle(const OracleParams& params, int numerosity) {
  return params.sigma * std::log(static_cast<double>(numerosity));
}

EmbeddingStore gen_oracle_store(const OracleParams& params, int epoch) {
  validate(params);
  const auto it = std::find_if(params.epochs.begin(), params.epochs.end(),
                               [&](const EpochNoise& e) { return e.epoch == epoch; });
  if (it == params.epochs.end()) {
    throw Error(ErrorCode::InvalidEpoch, "epoch " + std::to_string(epoch) + " not in the schedule");
  }
  const double noise = it->noise_level * params.sigma;
  const auto dim = static_cast<std::size_t>(params.dim);

  Rng rng(derive_seed(params.seed, "oracle-epoch-" + std::to_string(epoch)));
  std::vector<std::string> ids;
  std::vector<float> values;
  values.reserve(9 * static_cast<std::size_t>(params.replicates) * dim);
  for (int n = 1; n <= 9; ++n) {
    const double theta = base_angle(params, n);
    for (int r = 0; r < params.replicates; ++r) {
      ids.push_back(to_string(StimulusId{params.stimulus_set, n, std::nullopt, r}));
      for (std::size_t k = 0; k < dim; ++k) {
        double v = k == 0 ? std::cos(theta) : k == 1 ? std::sin(theta) : 0.0;
        v += noise * rng.normal();
        values.push_back(static_cast<float>(v));
      }
    }
  }

  StoreManifest manifest;
  manifest.model_id = params.model_id;
  manifest.epoch = epoch;
  manifest.layer = "synthetic";
  return EmbeddingStore(std::move(manifest), std::move(ids), std::move(values), dim);
}

std::vector<EpochNoise> parse_schedule(const std::string& text) {
  std::vector<EpochNoise> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "schedule entry '" + item + "' is not epoch:noise");
    }
    try {
      std::size_t used = 0;
      const std::string e = item.substr(0, colon);
      const std::string nz = item.substr(colon + 1);
      const int epoch = std::stoi(e, &used);
      if (used != e.size()) throw std::invalid_argument(e);
      const double noise = std::stod(nz, &used);
      if (used != nz.size()) throw std::invalid_argument(nz);
      out.push_back({epoch, noise});
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "schedule entry '" + item + "' is not epoch:noise");
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty schedule");
  return out;
}

}  // namespace devalign::oracle
