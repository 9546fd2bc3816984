#include "sr1track/runs.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "sr1track/experiments.hpp"
#include "sr1track/format.hpp"

namespace sr1 {

namespace {

// Seeded runs consume the perturbed sequence from index 1, like the tables.
std::shared_ptr<const MatrixProvider> seeded_provider(int dim, double lambda, uint64_t seed) {
  SeededRng trial_rng = SeededRng::derived(seed, 0);
  SymMatrix a_star = random_symmetric_gaussian(dim, trial_rng);
  const uint64_t provider_seed = trial_rng.next_u64();
  return shifted_provider(
      std::make_shared<PerturbedProvider>(std::move(a_star), lambda, provider_seed), 1);
}

}  // namespace

TrackReport run_track(const TrackRunConfig& config) {
  auto oracle = cyclic_oracle(seeded_provider(config.dim, config.lambda, config.seed));
  TrackOptions options;
  options.steps = config.steps;
  options.policy = config.policy;
  options.window = config.window;
  options.check_bounds = config.check_bounds;
  return track(*oracle, options);
}

TrackReport run_invert(const InvertRunConfig& config) {
  // same trial-stream discipline as the inverse table: matrix draw, then
  // provider seed, then probe seed
  SeededRng trial_rng = SeededRng::derived(config.seed, 0);
  SymMatrix a_star = random_symmetric_gaussian(config.dim, trial_rng);
  const uint64_t provider_seed = trial_rng.next_u64();
  const uint64_t probe_seed = trial_rng.next_u64();
  auto provider = shifted_provider(
      std::make_shared<PerturbedProvider>(std::move(a_star), config.lambda, provider_seed),
      1);

  auto oracle = config.random_directions ? random_direction_oracle(provider, probe_seed)
                                         : inverse_oracle(provider);
  TrackOptions options;
  options.steps = config.steps;
  options.policy = config.policy;
  options.window = config.window;
  options.check_bounds = config.check_bounds;
  return track(*oracle, options);
}

TrackReport run_qn_demo(const QnDemoConfig& config) {
  if (config.dim < 1) fail(errc::invalid_argument, "qn demo: dimension must be >= 1");
  if (config.steps < 1) fail(errc::invalid_argument, "qn demo: steps must be >= 1");
  SymMatrix q(config.dim);
  for (int i = 0; i < config.dim; ++i) q.set(i, i, static_cast<double>(i + 1));

  std::vector<Vector> iterates;
  Vector x(config.dim, 0.0);
  iterates.push_back(x);
  for (int k = 0; k < config.steps; ++k) {
    x[k % config.dim] += 1.0;
    iterates.push_back(x);
  }

  auto oracle = quadratic_secant_oracle(std::move(q), std::move(iterates));
  TrackOptions options;
  options.steps = config.steps;
  options.policy = config.policy;
  options.window = config.window;
  return track(*oracle, options);
}

UliCheckResult run_uli_check(std::vector<Vector> vectors, int window, int dim) {
  if (vectors.empty()) fail(errc::invalid_argument, "uli check: no vectors");
  if (dim < 1) fail(errc::invalid_argument, "uli check: dimension must be >= 1");
  for (const Vector& v : vectors)
    if (static_cast<int>(v.size()) != dim)
      fail(errc::dimension_mismatch, "uli check: vector of wrong dimension");
  UliCheckResult result;
  result.dim = dim;
  result.window = window;
  result.profile = sequence_uli_profile(vectors, window, dim);
  return result;
}

std::string UliCheckResult::to_csv() const {
  std::string out = "k,alpha,beta,gamma,exhaustive\n";
  for (const UliReport& r : profile.windows) {
    out += std::to_string(r.start_index);
    out += ',';
    out += format_double(r.alpha_det);
    out += ',';
    out += format_double(r.beta_eig);
    out += ',';
    out += format_double(r.gamma_bound);
    out += ',';
    out += r.exhaustive ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string UliCheckResult::to_json_string() const {
  nlohmann::ordered_json j;
  j["dim"] = dim;
  j["window"] = window;
  j["beta_hat"] = profile.beta_hat;
  j["alpha_hat"] = profile.alpha_hat;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const UliReport& r : profile.windows) {
    nlohmann::ordered_json row;
    row["k"] = r.start_index;
    row["alpha"] = r.alpha_det;
    row["beta"] = r.beta_eig;
    row["gamma"] = std::isfinite(r.gamma_bound) ? nlohmann::ordered_json(r.gamma_bound)
                                                : nlohmann::ordered_json("inf");
    row["exhaustive"] = r.exhaustive;
    rows.push_back(std::move(row));
  }
  j["windows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::vector<Vector> read_vectors_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open '" + path + "' for reading");
  std::vector<Vector> vectors;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Vector row;
    const char* cursor = line.data();
    const char* end = line.data() + line.size();
    while (cursor < end) {
      while (cursor < end && *cursor == ' ') ++cursor;
      double value = 0.0;
      const auto parsed = std::from_chars(cursor, end, value);
      if (parsed.ec != std::errc{})
        fail(errc::io, path + ":" + std::to_string(line_no) + ": malformed number");
      row.push_back(value);
      cursor = parsed.ptr;
      while (cursor < end && *cursor == ' ') ++cursor;
      if (cursor < end) {
        if (*cursor != ',')
          fail(errc::io, path + ":" + std::to_string(line_no) + ": expected comma");
        ++cursor;
      }
    }
    if (row.empty())
      fail(errc::io, path + ":" + std::to_string(line_no) + ": empty row");
    if (!vectors.empty() && row.size() != vectors.front().size())
      fail(errc::io, path + ":" + std::to_string(line_no) + ": inconsistent row length");
    vectors.push_back(std::move(row));
  }
  if (vectors.empty()) fail(errc::io, path + ": no vectors found");
  return vectors;
}

}  // namespace sr1
