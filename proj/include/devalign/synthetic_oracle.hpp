#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "devalign/embedding_store.hpp"

namespace devalign::oracle {

struct EpochNoise {
  int epoch = 1;
  double noise_level = 0.0;  // per-coordinate sd in units of sigma
};

// Stores with a planted log-compressed number line. Numerosity n sits at the
// unit vector cos(t) e0 + sin(t) e1 with t = sigma * ln n, and every replicate
// adds isotropic Gaussian noise of sd noise_level * sigma per coordinate.
struct OracleParams {
  double sigma = 0.5;
  int dim = 64;
  std::vector<EpochNoise> epochs = {{1, 1.0}, {2, 0.5}, {10, 0.1}, {90, 0.0}};
  std::uint64_t seed = 0;
  int replicates = 16;
  int stimulus_set = 1;
  std::string model_id = "synthetic-oracle";
};

// Throws InvalidArgument: sigma <= 0 or sigma * ln 9 >= pi (the arc would
// wrap), dim < 2, replicates < 1, epochs not strictly increasing or noise
// schedule increasing / negative.
void validate(const OracleParams& params);

// Angle of numerosity n on the planted arc.
double base_angle(const OracleParams& params, int numerosity);

EmbeddingStore gen_oracle_store(const OracleParams& params, int epoch);

// "1:1.0,2:0.5,10:0.1,90:0.0"
std::vector<EpochNoise> parse_schedule(const std::string& text);

}  // namespace devalign::oracle
