#include "sr1track/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "sr1track/tracker.hpp"

namespace sr1 {

namespace {

// Trials are independent; results land in pre-sized slots so the output
// order never depends on scheduling. The first failure wins and is
// rethrown on the calling thread once the pool drains.
void run_trials(int trials, int threads, const std::function<void(int)>& body) {
  if (threads <= 1) {
    for (int t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const int workers = std::min(threads, trials);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int t = next.fetch_add(1); t < trials && !failed.load(); t = next.fetch_add(1)) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void finalize_cell(TableCell& cell) {
  double sum = 0.0;
  double mx = 0.0;
  for (double v : cell.trial_values) {
    sum += v;
    mx = std::max(mx, v);
  }
  cell.mean = cell.trial_values.empty() ? 0.0 : sum / cell.trial_values.size();
  cell.max = mx;
}

double condition_number(const SymMatrix& m) {
  const std::vector<double> ev = sym_eigenvalues(m);
  double lo = std::abs(ev.front());
  double hi = std::abs(ev.front());
  for (double v : ev) {
    lo = std::min(lo, std::abs(v));
    hi = std::max(hi, std::abs(v));
  }
  if (lo == 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// Distances ||B_n - reference|| at the requested checkpoints for one run.
std::vector<double> distances_at(SequenceOracle& oracle, const SymMatrix& reference,
                                 const std::vector<int>& checkpoints) {
  const int max_steps = *std::max_element(checkpoints.begin(), checkpoints.end());
  Sr1State state(oracle.dim());
  std::vector<double> out(checkpoints.size(), 0.0);
  for (int k = 0; k < max_steps; ++k) {
    const Sample sample = oracle.sample(k);
    state.update(sample.s, sample.y);
    for (std::size_t c = 0; c < checkpoints.size(); ++c)
      if (checkpoints[c] == k + 1) out[c] = frobenius_distance(state.matrix(), reference);
  }
  return out;
}

}  // namespace

SymMatrix random_symmetric_gaussian(int dim, SeededRng& rng) {
  if (dim < 1) fail(errc::invalid_argument, "random_symmetric_gaussian: dimension >= 1");
  std::vector<double> m(static_cast<std::size_t>(dim) * dim);
  for (double& x : m) x = rng.next_gaussian();
  SymMatrix a(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j)
      a.set(i, j, 0.5 * (m[static_cast<std::size_t>(i) * dim + j] +
                         m[static_cast<std::size_t>(j) * dim + i]));
  return a;
}

PerturbedProvider::PerturbedProvider(SymMatrix a_star, double lambda, uint64_t seed)
    : a_star_(std::move(a_star)), lambda_(lambda), seed_(seed) {
  if (!(lambda > 0.0 && lambda < 1.0))
    fail(errc::invalid_argument, "PerturbedProvider: lambda must lie in (0,1)");
}

SymMatrix PerturbedProvider::matrix(int k) const {
  if (k < 0) fail(errc::invalid_argument, "PerturbedProvider: negative step index");
  const int d = dim();
  SeededRng rng = SeededRng::derived(seed_, static_cast<uint64_t>(k));
  std::vector<double> m(static_cast<std::size_t>(d) * d);
  for (double& x : m) x = rng.next_uniform01();
  const double scale = 0.5 * std::pow(lambda_, k);
  SymMatrix a = a_star_;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      a.set(i, j, a(i, j) + scale * (m[static_cast<std::size_t>(i) * d + j] +
                                     m[static_cast<std::size_t>(j) * d + i]));
  return a;
}

double PerturbedProvider::tail_bound(int k) const {
  // ||A_i - A*|| <= lambda^i * d, so the tail past any horizon is covered by
  // 2 d lambda^k / (1 - lambda).
  return 2.0 * dim() * std::pow(lambda_, k) / (1.0 - lambda_);
}

const TableCell& TableResult::cell(const std::string& param, int steps) const {
  for (const TableCell& c : cells)
    if (c.param == param && c.steps == steps) return c;
  fail(errc::invalid_argument, "TableResult: no cell (" + param + ", " +
                                   std::to_string(steps) + ")");
}

double TableResult::median(const std::string& param, int steps) const {
  std::vector<double> v = cell(param, steps).trial_values;
  if (v.empty()) fail(errc::invalid_argument, "TableResult::median: empty cell");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TableResult table1(const Table1Config& config) {
  if (config.trials < 1) fail(errc::invalid_argument, "table1: trials must be >= 1");
  if (config.steps.empty() || config.lambdas.empty())
    fail(errc::invalid_argument, "table1: empty grid");

  TableResult result;
  result.trials = config.trials;
  result.base_seed = config.base_seed;
  for (int t = 0; t < config.trials; ++t)
    result.trial_seeds.push_back(
        SeededRng::derived(config.base_seed, static_cast<uint64_t>(t)).next_u64());

  for (double lambda : config.lambdas)
    for (int n : config.steps)
      result.cells.push_back(
          {format_double(lambda), n, 0.0, 0.0, std::vector<double>(config.trials, 0.0)});

  run_trials(config.trials, config.threads, [&](int t) {
    SeededRng trial_rng = SeededRng::derived(config.base_seed, static_cast<uint64_t>(t));
    const SymMatrix a_star = random_symmetric_gaussian(config.dim, trial_rng);
    const uint64_t provider_seed = trial_rng.next_u64();
    for (std::size_t li = 0; li < config.lambdas.size(); ++li) {
      // consumed from index 1: the first observed perturbation is lambda/2-scaled
      auto provider = shifted_provider(
          std::make_shared<PerturbedProvider>(a_star, config.lambdas[li], provider_seed), 1);
      auto oracle = cyclic_oracle(provider);
      const std::vector<double> dists = distances_at(*oracle, a_star, config.steps);
      for (std::size_t c = 0; c < config.steps.size(); ++c)
        result.cells[li * config.steps.size() + c].trial_values[t] = dists[c];
    }
  });

  for (TableCell& cell : result.cells) finalize_cell(cell);
  return result;
}

TableResult table2(const Table2Config& config) {
  if (config.trials < 1) fail(errc::invalid_argument, "table2: trials must be >= 1");
  if (config.steps.empty()) fail(errc::invalid_argument, "table2: empty grid");

  TableResult result;
  result.trials = config.trials;
  result.base_seed = config.base_seed;
  for (int t = 0; t < config.trials; ++t)
    result.trial_seeds.push_back(
        SeededRng::derived(config.base_seed, static_cast<uint64_t>(t)).next_u64());

  const std::vector<std::string> rows = {"canonical", "random"};
  for (const std::string& row : rows)
    for (int n : config.steps)
      result.cells.push_back({row, n, 0.0, 0.0, std::vector<double>(config.trials, 0.0)});

  std::atomic<int> resamples{0};
  run_trials(config.trials, config.threads, [&](int t) {
    SeededRng trial_rng = SeededRng::derived(config.base_seed, static_cast<uint64_t>(t));
    SymMatrix a_star = random_symmetric_gaussian(config.dim, trial_rng);
    if (config.resample_ill_conditioned) {
      int redraws = 0;
      while (condition_number(a_star) > config.condition_cap) {
        if (++redraws > 100)
          fail(errc::singular_matrix, "table2: no well-conditioned draw after 100 redraws");
        a_star = random_symmetric_gaussian(config.dim, trial_rng);
      }
      resamples += redraws;
    }
    const uint64_t provider_seed = trial_rng.next_u64();
    const uint64_t probe_seed = trial_rng.next_u64();
    auto provider = shifted_provider(
        std::make_shared<PerturbedProvider>(a_star, config.lambda, provider_seed), 1);
    const SymMatrix target = sym_inverse(a_star);

    auto canonical = inverse_oracle(provider);
    const std::vector<double> canon_d = distances_at(*canonical, target, config.steps);
    auto random_probe = random_direction_oracle(provider, probe_seed);
    const std::vector<double> rand_d = distances_at(*random_probe, target, config.steps);

    for (std::size_t c = 0; c < config.steps.size(); ++c) {
      result.cells[c].trial_values[t] = canon_d[c];
      result.cells[config.steps.size() + c].trial_values[t] = rand_d[c];
    }
  });

  result.resamples = resamples.load();
  for (TableCell& cell : result.cells) finalize_cell(cell);
  return result;
}

std::string table_to_csv(const TableResult& table) {
  std::string out = "param,steps,mean,max,trials\n";
  for (const TableCell& cell : table.cells) {
    out += cell.param;
    out += ',';
    out += std::to_string(cell.steps);
    out += ',';
    out += format_double(cell.mean);
    out += ',';
    out += format_double(cell.max);
    out += ',';
    out += std::to_string(table.trials);
    out += '\n';
  }
  return out;
}

std::string table_to_json_string(const TableResult& table) {
  nlohmann::ordered_json j;
  j["trials"] = table.trials;
  j["base_seed"] = table.base_seed;
  j["seeds"] = table.trial_seeds;
  j["resamples"] = table.resamples;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const TableCell& cell : table.cells) {
    nlohmann::ordered_json c;
    c["param"] = cell.param;
    c["steps"] = cell.steps;
    c["mean"] = cell.mean;
    c["max"] = cell.max;
    c["trials"] = table.trials;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

void emit_table(const TableResult& table, Format format, std::ostream& out) {
  out << (format == Format::csv ? table_to_csv(table) : table_to_json_string(table));
}

void emit_table_file(const TableResult& table, Format format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io, "cannot open '" + path + "' for writing");
  emit_table(table, format, out);
  out.flush();
  if (!out) fail(errc::io, "write failed for '" + path + "'");
}

std::string default_table_filename(const std::string& stem, uint64_t seed, Format format) {
  return stem + "_" + std::to_string(seed) + (format == Format::csv ? ".csv" : ".json");
}

}  // namespace sr1
