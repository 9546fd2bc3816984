// Command-line front end for the sr1track shared library. Everything here
// goes through the C API; all randomness flows from --seed, so identical
// invocations print identical bytes.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sr1track.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitBoundViolation = 3;

int exit_code_for(sr1t_status status) {
  switch (status) {
    case SR1T_OK:
      return kExitOk;
    case SR1T_ERR_INVALID_ARGUMENT:
    case SR1T_ERR_DIMENSION_MISMATCH:
    case SR1T_ERR_IO:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

struct OutputOptions {
  std::string format = "csv";
  std::string out_path;
};

void add_output_flags(CLI::App* cmd, OutputOptions& output) {
  cmd->add_option("--output", output.format, "Output format (csv or json)")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", output.out_path,
                  "Write to this path instead of standard output; an existing "
                  "directory takes the default file name");
}

sr1t_format format_enum(const std::string& name) {
  return name == "json" ? SR1T_FORMAT_JSON : SR1T_FORMAT_CSV;
}

// Render and deliver a report; frees it.
int deliver(sr1t_report* report, const OutputOptions& output, const std::string& default_stem,
            uint64_t seed) {
  const char* text = sr1t_report_render(report, format_enum(output.format));
  if (!text) {
    std::cerr << "error: " << sr1t_last_error() << "\n";
    sr1t_report_destroy(report);
    return kExitConfig;
  }
  int code = kExitOk;
  if (output.out_path.empty()) {
    std::cout << text;
  } else {
    std::filesystem::path path(output.out_path);
    std::error_code ec;
    if (std::filesystem::is_directory(path, ec))
      path /= default_stem + "_" + std::to_string(seed) +
              (output.format == "json" ? ".json" : ".csv");
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot open '" << path.string() << "' for writing\n";
      code = kExitConfig;
    } else {
      file << text;
      if (!file) {
        std::cerr << "error: write failed for '" << path.string() << "'\n";
        code = kExitConfig;
      }
    }
  }
  sr1t_report_destroy(report);
  return code;
}

int report_failure(sr1t_status status) {
  std::cerr << "error: " << sr1t_last_error() << "\n";
  return exit_code_for(status);
}

double stat_or(const sr1t_report* report, const char* key, double fallback) {
  double value = fallback;
  if (sr1t_report_stat(report, key, &value) != SR1T_OK) return fallback;
  return value;
}

// Exit 3 only fires when a check with satisfied hypotheses failed: the
// violation counters stay zero on runs with skips, without a usable
// independence score, or without a sound drift tail.
int bound_exit_code(const sr1t_report* report) {
  const double violations =
      stat_or(report, "limit_violations", 0.0) + stat_or(report, "drift_violations", 0.0);
  return violations > 0.0 ? kExitBoundViolation : kExitOk;
}

int env_threads() {
  const char* raw = std::getenv("SR1_THREADS");
  if (!raw) return 0;
  try {
    return std::max(0, std::stoi(raw));
  } catch (...) {
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sr1track: rank-one secant tracking of symmetric matrix sequences"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sr1t_version());

  // track
  sr1t_track_config track_cfg{10, 0.5, 20, 42, 0.0, -1.0, -1, 1};
  bool track_assert_bounds = false;
  OutputOptions track_out;
  auto* track = app.add_subcommand("track", "Track a seeded perturbed matrix sequence");
  track->add_option("--dim", track_cfg.dim, "Dimension d")->check(CLI::PositiveNumber);
  track->add_option("--lambda", track_cfg.lambda, "Perturbation decay rate in (0,1)")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));
  track->add_option("--steps", track_cfg.steps, "Number of updates")->check(CLI::PositiveNumber);
  track->add_option("--seed", track_cfg.seed, "Base seed");
  track->add_option("--c-min", track_cfg.c_min, "Skip threshold on the curvature cosine");
  track->add_option("--window", track_cfg.window, "Window size m (default d)");
  track->add_flag("--assert-bounds", track_assert_bounds,
                  "Exit 3 when an in-scope bound check fails");
  add_output_flags(track, track_out);

  // invert
  sr1t_invert_config invert_cfg{10, 0.5, 50, 42, 0, 0.0, -1.0, -1, 1};
  bool invert_assert_bounds = false;
  OutputOptions invert_out;
  auto* invert = app.add_subcommand("invert", "Track the inverse of a sequence limit");
  invert->add_option("--dim", invert_cfg.dim, "Dimension d")->check(CLI::PositiveNumber);
  invert->add_option("--lambda", invert_cfg.lambda, "Perturbation decay rate in (0,1)")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));
  invert->add_option("--steps", invert_cfg.steps, "Number of updates")
      ->check(CLI::PositiveNumber);
  invert->add_option("--seed", invert_cfg.seed, "Base seed");
  invert->add_option("--c-min", invert_cfg.c_min, "Skip threshold on the curvature cosine");
  invert->add_option("--window", invert_cfg.window, "Window size m (default d)");
  invert->add_flag("--random-directions", invert_cfg.random_directions,
                   "Gaussian probe vectors instead of the canonical cycle");
  invert->add_flag("--assert-bounds", invert_assert_bounds,
                   "Exit 3 when an in-scope bound check fails");
  add_output_flags(invert, invert_out);

  // uli-check
  std::string uli_file;
  int uli_window = 0;
  int uli_dim = 0;
  OutputOptions uli_out;
  auto* uli = app.add_subcommand("uli-check",
                                 "Per-window independence scores for vectors from a CSV file");
  uli->add_option("--file", uli_file, "CSV file, one vector per line")->required();
  uli->add_option("--window", uli_window, "Window size m")->required()
      ->check(CLI::NonNegativeNumber);
  uli->add_option("--dim", uli_dim, "Space dimension d")->required()
      ->check(CLI::PositiveNumber);
  add_output_flags(uli, uli_out);

  // table1 / table2
  sr1t_table_config table1_cfg{10, 0.5, 20, 42, 0};
  OutputOptions table1_out;
  auto* table1 = app.add_subcommand("table1", "Sequence-tracking benchmark table");
  table1->add_option("--dim", table1_cfg.dim, "Dimension d")->check(CLI::PositiveNumber);
  table1->add_option("--trials", table1_cfg.trials, "Seeded trials per cell")
      ->check(CLI::PositiveNumber);
  table1->add_option("--seed", table1_cfg.seed, "Base seed");
  add_output_flags(table1, table1_out);

  sr1t_table_config table2_cfg{10, 0.5, 20, 42, 0};
  OutputOptions table2_out;
  auto* table2 = app.add_subcommand("table2", "Inverse-tracking benchmark table");
  table2->add_option("--dim", table2_cfg.dim, "Dimension d")->check(CLI::PositiveNumber);
  table2->add_option("--lambda", table2_cfg.lambda, "Perturbation decay rate in (0,1)")
      ->check(CLI::Range(1e-12, 1.0 - 1e-12));
  table2->add_option("--trials", table2_cfg.trials, "Seeded trials per cell")
      ->check(CLI::PositiveNumber);
  table2->add_option("--seed", table2_cfg.seed, "Base seed");
  add_output_flags(table2, table2_out);

  // qn-demo
  sr1t_qn_demo_config qn_cfg{6, 12};
  bool qn_assert_bounds = false;
  OutputOptions qn_out;
  auto* qn = app.add_subcommand("qn-demo", "Secant oracle on a diagonal quadratic");
  qn->add_option("--dim", qn_cfg.dim, "Dimension d")->check(CLI::PositiveNumber);
  qn->add_option("--steps", qn_cfg.steps, "Number of updates")->check(CLI::PositiveNumber);
  qn->add_flag("--assert-bounds", qn_assert_bounds, "Exit 3 when an in-scope check fails");
  add_output_flags(qn, qn_out);

  // geodesic
  std::string geo_config_path;
  OutputOptions geo_out;
  auto* geo = app.add_subcommand("geodesic",
                                 "Constrained geodesic shooting on the landmark problem");
  geo->add_option("--config", geo_config_path, "JSON problem configuration file")->required();
  add_output_flags(geo, geo_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  sr1t_report* report = nullptr;

  if (*track) {
    const sr1t_status status = sr1t_run_track(&track_cfg, &report);
    if (status != SR1T_OK) return report_failure(status);
    const int bound_code = track_assert_bounds ? bound_exit_code(report) : kExitOk;
    const int code = deliver(report, track_out, "track", track_cfg.seed);
    return code != kExitOk ? code : bound_code;
  }
  if (*invert) {
    const sr1t_status status = sr1t_run_invert(&invert_cfg, &report);
    if (status != SR1T_OK) return report_failure(status);
    const int bound_code = invert_assert_bounds ? bound_exit_code(report) : kExitOk;
    const int code = deliver(report, invert_out, "invert", invert_cfg.seed);
    return code != kExitOk ? code : bound_code;
  }
  if (*uli) {
    const sr1t_status status =
        sr1t_run_uli_check_file(uli_file.c_str(), uli_dim, uli_window, &report);
    if (status != SR1T_OK) return report_failure(status);
    return deliver(report, uli_out, "uli_check", 0);
  }
  if (*table1) {
    table1_cfg.threads = env_threads();
    const sr1t_status status = sr1t_run_table1(&table1_cfg, &report);
    if (status != SR1T_OK) return report_failure(status);
    return deliver(report, table1_out, "table1", table1_cfg.seed);
  }
  if (*table2) {
    table2_cfg.threads = env_threads();
    const sr1t_status status = sr1t_run_table2(&table2_cfg, &report);
    if (status != SR1T_OK) return report_failure(status);
    return deliver(report, table2_out, "table2", table2_cfg.seed);
  }
  if (*qn) {
    const sr1t_status status = sr1t_run_qn_demo(&qn_cfg, &report);
    if (status != SR1T_OK) return report_failure(status);
    const int bound_code = qn_assert_bounds ? bound_exit_code(report) : kExitOk;
    const int code = deliver(report, qn_out, "qn_demo", 0);
    return code != kExitOk ? code : bound_code;
  }
  if (*geo) {
    std::ifstream file(geo_config_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot read '" << geo_config_path << "'\n";
      return kExitConfig;
    }
    std::ostringstream text;
    text << file.rdbuf();
    const std::string config_json = text.str();
    const sr1t_status status = sr1t_run_geodesic(config_json.c_str(), &report);
    if (status != SR1T_OK) return report_failure(status);
    return deliver(report, geo_out, "geodesic", 0);
  }

  return kExitConfig;
}
