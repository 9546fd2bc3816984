#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sr1track/format.hpp"
#include "sr1track/oracles.hpp"
#include "sr1track/rng.hpp"

namespace sr1 {

/// 0.5 (M + M^T) with M filled row-major from i.i.d. standard normals.
SymMatrix random_symmetric_gaussian(int dim, SeededRng& rng);

/// A_k = A* + (lambda^k / 2)(M_k + M_k^T), M_k entries uniform in [0,1]
/// drawn from a per-k derived stream so random access matches sequential
/// access. Supplies the analytic drift tail 2 d lambda^k / (1 - lambda).
class PerturbedProvider : public MatrixProvider {
public:
  PerturbedProvider(SymMatrix a_star, double lambda, uint64_t seed);

  int dim() const override { return a_star_.dim(); }
  SymMatrix matrix(int k) const override;
  SymMatrix limit() const override { return a_star_; }
  bool has_tail_bound() const override { return true; }
  double tail_bound(int k) const override;

private:
  SymMatrix a_star_;
  double lambda_;
  uint64_t seed_;
};

struct TableCell {
  std::string param;
  int steps = 0;
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> trial_values;  // per trial, in trial order
};

struct TableResult {
  std::vector<TableCell> cells;  // ordered by (param, steps)
  int trials = 0;
  uint64_t base_seed = 0;
  std::vector<uint64_t> trial_seeds;
  int resamples = 0;  // condition-policy redraws (inverse table only)

  const TableCell& cell(const std::string& param, int steps) const;
  double median(const std::string& param, int steps) const;
};

struct Table1Config {
  int dim = 10;
  std::vector<double> lambdas = {0.9, 0.5, 0.1};
  std::vector<int> steps = {10, 20, 50, 100};
  int trials = 20;
  uint64_t base_seed = 42;
  int threads = 0;  // <= 1 runs sequentially
};

/// Frobenius distance of B_n to the limit for the cyclic-direction run,
/// aggregated over seeded trials; one row per lambda.
TableResult table1(const Table1Config& config);

struct Table2Config {
  int dim = 10;
  double lambda = 0.5;
  std::vector<int> steps = {10, 20, 50, 100};
  int trials = 20;
  uint64_t base_seed = 42;
  bool resample_ill_conditioned = true;
  double condition_cap = 1e6;
  int threads = 0;
};

/// Frobenius distance of B_n to the inverse of the limit, rows "canonical"
/// and "random" for the two probe-direction choices.
TableResult table2(const Table2Config& config);

std::string table_to_csv(const TableResult& table);
std::string table_to_json_string(const TableResult& table);

/// Writes the rendered table to the stream; file variant adds path context
/// to I/O failures.
void emit_table(const TableResult& table, Format format, std::ostream& out);
void emit_table_file(const TableResult& table, Format format, const std::string& path);

/// Default output file name: table<index>_<seed>.<ext>.
std::string default_table_filename(const std::string& stem, uint64_t seed, Format format);

}  // namespace sr1
