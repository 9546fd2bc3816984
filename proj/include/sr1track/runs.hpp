#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sr1track/tracker.hpp"
#include "sr1track/uli.hpp"

namespace sr1 {

/// Single seeded run against a randomly perturbed convergent sequence with
/// cyclic directions; reproduces trial 0 of the sequence table for the same
/// seed.
struct TrackRunConfig {
  int dim = 10;
  double lambda = 0.5;
  int steps = 20;
  uint64_t seed = 42;
  SkipPolicy policy{};
  int window = -1;
  bool check_bounds = true;
};

TrackReport run_track(const TrackRunConfig& config);

/// Single seeded inverse-tracking run: canonical probes by default, Gaussian
/// probes with random_directions.
struct InvertRunConfig {
  int dim = 10;
  double lambda = 0.5;
  int steps = 50;
  uint64_t seed = 42;
  bool random_directions = false;
  SkipPolicy policy{};
  int window = -1;
  bool check_bounds = true;
};

TrackReport run_invert(const InvertRunConfig& config);

/// Secant run on the quadratic with Hessian diag(1..d) and coordinate-step
/// iterates; the approximation must reach the Hessian after d applied steps.
struct QnDemoConfig {
  int dim = 6;
  int steps = 12;
  SkipPolicy policy{};
  int window = -1;
};

TrackReport run_qn_demo(const QnDemoConfig& config);

struct UliCheckResult {
  SequenceUliProfile profile;
  int dim = 0;
  int window = 0;

  std::string to_csv() const;  // k,alpha,beta,gamma,exhaustive
  std::string to_json_string() const;
};

UliCheckResult run_uli_check(std::vector<Vector> vectors, int window, int dim);

/// One vector per line, comma-separated decimals, no header.
std::vector<Vector> read_vectors_csv(const std::string& path);

}  // namespace sr1
