#include "sr1track.h"

#include <map>
#include <string>

#include "sr1track/experiments.hpp"
#include "sr1track/geodesic.hpp"
#include "sr1track/runs.hpp"

namespace {

thread_local std::string g_last_error;

sr1t_status status_from(sr1::errc kind) {
  switch (kind) {
    case sr1::errc::invalid_argument: return SR1T_ERR_INVALID_ARGUMENT;
    case sr1::errc::dimension_mismatch: return SR1T_ERR_DIMENSION_MISMATCH;
    case sr1::errc::singular_matrix: return SR1T_ERR_SINGULAR_MATRIX;
    case sr1::errc::no_convergence: return SR1T_ERR_NO_CONVERGENCE;
    case sr1::errc::degenerate_direction: return SR1T_ERR_DEGENERATE_DIRECTION;
    case sr1::errc::not_in_span: return SR1T_ERR_NOT_IN_SPAN;
    case sr1::errc::infeasible: return SR1T_ERR_INFEASIBLE;
    case sr1::errc::io: return SR1T_ERR_IO;
  }
  return SR1T_ERR_INTERNAL;
}

template <typename Fn>
sr1t_status guarded(Fn&& fn) {
  try {
    fn();
    return SR1T_OK;
  } catch (const sr1::error& e) {
    g_last_error = e.what();
    return status_from(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SR1T_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SR1T_ERR_INTERNAL;
  }
}

sr1t_status require(bool ok, const char* message) {
  if (ok) return SR1T_OK;
  g_last_error = message;
  return SR1T_ERR_INVALID_ARGUMENT;
}

sr1::SkipPolicy policy_from(double c_min, double r_floor) {
  sr1::SkipPolicy policy;
  if (c_min > 0.0) policy.c_min = c_min;
  if (r_floor >= 0.0) policy.r_floor = r_floor;
  return policy;
}

}  // namespace

struct sr1t_state {
  sr1::Sr1State impl;
};

struct sr1t_report {
  std::string csv;
  std::string json;
  std::map<std::string, double> stats;
};

extern "C" {

const char* sr1t_version(void) { return "1.0.0"; }

const char* sr1t_last_error(void) { return g_last_error.c_str(); }

sr1t_status sr1t_state_create(int dim, sr1t_state** out) {
  if (sr1t_status s = require(out != nullptr, "out must not be null")) return s;
  *out = nullptr;
  return guarded([&] { *out = new sr1t_state{sr1::Sr1State(dim)}; });
}

void sr1t_state_destroy(sr1t_state* state) { delete state; }

int sr1t_state_dim(const sr1t_state* state) { return state ? state->impl.dim() : 0; }

sr1t_status sr1t_state_update(sr1t_state* state, const double* s, const double* y,
                              double c_min, double r_floor, sr1t_update_outcome* outcome) {
  if (sr1t_status st = require(state && s && y, "state, s and y must not be null")) return st;
  return guarded([&] {
    const int d = state->impl.dim();
    const sr1::Vector sv(s, s + d);
    const sr1::Vector yv(y, y + d);
    const sr1::UpdateOutcome result = state->impl.update(sv, yv, policy_from(c_min, r_floor));
    if (outcome) {
      outcome->status = static_cast<int>(result.status);
      outcome->cosine = result.cosine;
      outcome->residual_norm = result.residual_norm;
    }
  });
}

sr1t_status sr1t_state_matrix(const sr1t_state* state, double* out) {
  if (sr1t_status st = require(state && out, "state and out must not be null")) return st;
  const int d = state->impl.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out[static_cast<size_t>(i) * d + j] = state->impl.matrix()(i, j);
  return SR1T_OK;
}

long sr1t_state_updates_applied(const sr1t_state* state) {
  return state ? state->impl.updates_applied() : 0;
}

long sr1t_state_updates_skipped(const sr1t_state* state) {
  return state ? state->impl.updates_skipped() : 0;
}

double sr1t_state_min_cosine(const sr1t_state* state) {
  return state ? state->impl.min_cosine_observed() : 0.0;
}

sr1t_status sr1t_error_constant(double c, int m, double* out) {
  if (sr1t_status st = require(out != nullptr, "out must not be null")) return st;
  return guarded([&] { *out = sr1::error_constant(c, m); });
}

sr1t_status sr1t_direction_drift_bound(double c, long k, long l, double eta, double s_norm,
                                       double* out) {
  if (sr1t_status st = require(out != nullptr, "out must not be null")) return st;
  return guarded([&] { *out = sr1::direction_drift_bound(c, k, l, eta, s_norm); });
}

sr1t_status sr1t_span_error_bound(double c, int m, double eta_star, double coeff_abs_sum,
                                  double* out) {
  if (sr1t_status st = require(out != nullptr, "out must not be null")) return st;
  return guarded([&] { *out = sr1::span_error_bound(c, m, eta_star, coeff_abs_sum); });
}

sr1t_status sr1t_limit_error_bound(double c, int m, int dim, double beta, double eta_star,
                                   double* out) {
  if (sr1t_status st = require(out != nullptr, "out must not be null")) return st;
  return guarded([&] { *out = sr1::limit_error_bound(c, m, dim, beta, eta_star); });
}

sr1t_status sr1t_beta_to_alpha(double beta, int dim, double* out) {
  if (sr1t_status st = require(out != nullptr, "out must not be null")) return st;
  return guarded([&] { *out = sr1::beta_to_alpha(beta, dim); });
}

sr1t_status sr1t_alpha_to_beta(double alpha, int dim, double* out) {
  if (sr1t_status st = require(out != nullptr, "out must not be null")) return st;
  return guarded([&] { *out = sr1::alpha_to_beta(alpha, dim); });
}

sr1t_status sr1t_gamma_bound(double beta, int dim, double* out) {
  if (sr1t_status st = require(out != nullptr, "out must not be null")) return st;
  return guarded([&] { *out = sr1::gamma_bound(beta, dim); });
}

const char* sr1t_report_render(const sr1t_report* report, sr1t_format format) {
  if (!report) {
    g_last_error = "report must not be null";
    return nullptr;
  }
  if (format == SR1T_FORMAT_CSV) return report->csv.c_str();
  if (format == SR1T_FORMAT_JSON) return report->json.c_str();
  g_last_error = "unknown format";
  return nullptr;
}

sr1t_status sr1t_report_stat(const sr1t_report* report, const char* key, double* out) {
  if (sr1t_status st = require(report && key && out, "report, key and out must not be null"))
    return st;
  const auto it = report->stats.find(key);
  if (it == report->stats.end()) {
    g_last_error = std::string("unknown stat '") + key + "'";
    return SR1T_ERR_INVALID_ARGUMENT;
  }
  *out = it->second;
  return SR1T_OK;
}

void sr1t_report_destroy(sr1t_report* report) { delete report; }

}  // extern "C"

namespace {

sr1t_report* report_from_track(const sr1::TrackReport& report) {
  auto* out = new sr1t_report;
  out->csv = report.to_csv();
  out->json = report.to_json_string();
  out->stats = {
      {"steps", static_cast<double>(report.steps)},
      {"applied", static_cast<double>(report.applied)},
      {"skipped", static_cast<double>(report.skipped)},
      {"noops", static_cast<double>(report.noops)},
      {"min_cosine", report.min_cosine},
      {"beta_hat", report.beta_hat},
      {"final_dist_op", report.final_dist_op},
      {"final_dist_fro", report.final_dist_fro},
      {"limit_checks", static_cast<double>(report.limit_checks.size())},
      {"limit_violations", static_cast<double>(report.limit_violations)},
      {"drift_checks", static_cast<double>(report.drift_checks)},
      {"drift_violations", static_cast<double>(report.drift_violations)},
      {"bounds_in_scope", report.bounds_in_scope ? 1.0 : 0.0},
      {"eta_tail_sound", report.eta_tail_sound ? 1.0 : 0.0},
      {"aborted", report.aborted ? 1.0 : 0.0},
  };
  return out;
}

sr1t_report* report_from_table(const sr1::TableResult& table) {
  auto* out = new sr1t_report;
  out->csv = sr1::table_to_csv(table);
  out->json = sr1::table_to_json_string(table);
  out->stats = {
      {"cells", static_cast<double>(table.cells.size())},
      {"trials", static_cast<double>(table.trials)},
      {"resamples", static_cast<double>(table.resamples)},
  };
  return out;
}

}  // namespace

extern "C" {

sr1t_status sr1t_run_track(const sr1t_track_config* config, sr1t_report** out) {
  if (sr1t_status st = require(config && out, "config and out must not be null")) return st;
  *out = nullptr;
  return guarded([&] {
    sr1::TrackRunConfig cfg;
    cfg.dim = config->dim;
    cfg.lambda = config->lambda;
    cfg.steps = config->steps;
    cfg.seed = config->seed;
    cfg.policy = policy_from(config->c_min, config->r_floor);
    cfg.window = config->window;
    cfg.check_bounds = config->check_bounds != 0;
    *out = report_from_track(sr1::run_track(cfg));
  });
}

sr1t_status sr1t_run_invert(const sr1t_invert_config* config, sr1t_report** out) {
  if (sr1t_status st = require(config && out, "config and out must not be null")) return st;
  *out = nullptr;
  return guarded([&] {
    sr1::InvertRunConfig cfg;
    cfg.dim = config->dim;
    cfg.lambda = config->lambda;
    cfg.steps = config->steps;
    cfg.seed = config->seed;
    cfg.random_directions = config->random_directions != 0;
    cfg.policy = policy_from(config->c_min, config->r_floor);
    cfg.window = config->window;
    cfg.check_bounds = config->check_bounds != 0;
    *out = report_from_track(sr1::run_invert(cfg));
  });
}

sr1t_status sr1t_run_qn_demo(const sr1t_qn_demo_config* config, sr1t_report** out) {
  if (sr1t_status st = require(config && out, "config and out must not be null")) return st;
  *out = nullptr;
  return guarded([&] {
    sr1::QnDemoConfig cfg;
    cfg.dim = config->dim;
    cfg.steps = config->steps;
    *out = report_from_track(sr1::run_qn_demo(cfg));
  });
}

sr1t_status sr1t_run_table1(const sr1t_table_config* config, sr1t_report** out) {
  if (sr1t_status st = require(config && out, "config and out must not be null")) return st;
  *out = nullptr;
  return guarded([&] {
    sr1::Table1Config cfg;
    cfg.dim = config->dim;
    cfg.trials = config->trials;
    cfg.base_seed = config->seed;
    cfg.threads = config->threads;
    *out = report_from_table(sr1::table1(cfg));
  });
}

sr1t_status sr1t_run_table2(const sr1t_table_config* config, sr1t_report** out) {
  if (sr1t_status st = require(config && out, "config and out must not be null")) return st;
  *out = nullptr;
  return guarded([&] {
    sr1::Table2Config cfg;
    cfg.dim = config->dim;
    cfg.lambda = config->lambda;
    cfg.trials = config->trials;
    cfg.base_seed = config->seed;
    cfg.threads = config->threads;
    *out = report_from_table(sr1::table2(cfg));
  });
}

sr1t_status sr1t_run_uli_check(const double* vectors, int count, int dim, int window,
                               sr1t_report** out) {
  if (sr1t_status st = require(vectors && out, "vectors and out must not be null")) return st;
  if (sr1t_status st = require(count > 0 && dim > 0, "count and dim must be positive"))
    return st;
  *out = nullptr;
  return guarded([&] {
    std::vector<sr1::Vector> vs(count);
    for (int i = 0; i < count; ++i)
      vs[i].assign(vectors + static_cast<size_t>(i) * dim,
                   vectors + static_cast<size_t>(i + 1) * dim);
    const sr1::UliCheckResult result = sr1::run_uli_check(std::move(vs), window, dim);
    auto* report = new sr1t_report;
    report->csv = result.to_csv();
    report->json = result.to_json_string();
    report->stats = {
        {"windows", static_cast<double>(result.profile.windows.size())},
        {"beta_hat", result.profile.beta_hat},
        {"alpha_hat", result.profile.alpha_hat},
    };
    *out = report;
  });
}

sr1t_status sr1t_run_uli_check_file(const char* path, int dim, int window,
                                    sr1t_report** out) {
  if (sr1t_status st = require(path && out, "path and out must not be null")) return st;
  *out = nullptr;
  return guarded([&] {
    std::vector<sr1::Vector> vs = sr1::read_vectors_csv(path);
    const sr1::UliCheckResult result = sr1::run_uli_check(std::move(vs), window, dim);
    auto* report = new sr1t_report;
    report->csv = result.to_csv();
    report->json = result.to_json_string();
    report->stats = {
        {"windows", static_cast<double>(result.profile.windows.size())},
        {"beta_hat", result.profile.beta_hat},
        {"alpha_hat", result.profile.alpha_hat},
    };
    *out = report;
  });
}

sr1t_status sr1t_run_geodesic(const char* config_json, sr1t_report** out) {
  if (sr1t_status st = require(config_json && out, "config and out must not be null"))
    return st;
  *out = nullptr;
  return guarded([&] {
    const sr1::GeodesicRunConfig cfg = sr1::GeodesicRunConfig::from_json(config_json);
    const sr1::GeodesicRunResult result = sr1::run_geodesic(cfg);
    auto* report = new sr1t_report;
    report->csv = result.to_csv();
    report->json = result.to_json_string();
    report->stats = {
        {"iterations", static_cast<double>(result.outer.history.size())},
        {"initial_cost", result.outer.initial_cost},
        {"final_cost", result.final_cost},
        {"final_grad_norm", result.final_grad_norm},
        {"final_max_binv_residual", result.final_max_binv_residual},
        {"stalls", static_cast<double>(result.outer.stalls)},
    };
    *out = report;
  });
}

}  // extern "C"
