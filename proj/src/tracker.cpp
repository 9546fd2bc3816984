#include "sr1track/tracker.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sr1track/format.hpp"
#include "sr1track/uli.hpp"

namespace sr1 {

namespace {

// Absolute round-off allowance for bound comparisons; the quantitative
// bounds are exact zeros for constant sequences, which finite arithmetic
// cannot reproduce.
double roundoff_allowance(double matrix_scale) { return 1e-13 * (1.0 + matrix_scale); }

}  // namespace

EtaProfile::EtaProfile(const std::function<SymMatrix(int)>& matrix_at, int horizon)
    : horizon_(horizon) {
  if (horizon < 0) fail(errc::invalid_argument, "EtaProfile: horizon must be >= 0");
  std::vector<SymMatrix> mats;
  mats.reserve(horizon + 1);
  for (int k = 0; k <= horizon; ++k) mats.push_back(matrix_at(k));

  row_start_.resize(horizon + 2);
  row_start_[0] = 0;
  for (int k = 0; k <= horizon; ++k)
    row_start_[k + 1] = row_start_[k] + static_cast<std::size_t>(horizon - k + 1);
  table_.assign(row_start_[horizon + 1], 0.0);

  for (int k = 0; k <= horizon; ++k) {
    double running = 0.0;
    table_[row_start_[k]] = 0.0;  // eta(k,k)
    for (int l = k + 1; l <= horizon; ++l) {
      running = std::max(running, operator_norm(mats[l] - mats[k]));
      table_[row_start_[k] + (l - k)] = running;
    }
  }
}

EtaProfile::EtaProfile(const MatrixProvider& provider, int horizon)
    : EtaProfile([&provider](int k) { return provider.matrix(k); }, horizon) {}

double EtaProfile::eta(int k, int l) const {
  if (k < 0 || l < k || l > horizon_) fail(errc::invalid_argument, "EtaProfile::eta: bad indices");
  return table_[row_start_[k] + (l - k)];
}

TrackReport track(SequenceOracle& oracle, const TrackOptions& options) {
  if (options.steps < 1) fail(errc::invalid_argument, "track: steps must be >= 1");
  const int d = oracle.dim();
  const int m = options.window >= 0 ? options.window : d;

  TrackReport report;
  report.dim = d;
  report.steps = options.steps;
  report.window = m;
  report.has_reference = oracle.has_reference();
  report.eta_tail_sound = oracle.has_tail_bound();

  Sr1State state(d);
  std::vector<Vector> directions;
  std::vector<SymMatrix> b_history;  // B_0 .. B_steps
  std::vector<double> prefix_cosine;  // smallest applied cosine among updates 0..k-1
  b_history.push_back(state.matrix());
  prefix_cosine.push_back(1.0);

  SymMatrix limit(1);
  if (report.has_reference) limit = oracle.reference_limit();

  int completed = 0;
  for (int k = 0; k < options.steps; ++k) {
    StepRecord rec;
    rec.k = k;
    try {
      Sample sample = oracle.sample(k);
      rec.outcome = state.update(sample.s, sample.y, options.policy);
      directions.push_back(std::move(sample.s));
    } catch (const error& e) {
      report.aborted = true;
      report.abort_reason = e.what();
      break;
    }
    if (report.has_reference) {
      rec.dist_op = operator_norm(state.matrix() - limit);
      rec.dist_fro = frobenius_distance(state.matrix(), limit);
    }
    b_history.push_back(state.matrix());
    prefix_cosine.push_back(state.min_cosine_observed());
    report.step_records.push_back(rec);
    ++completed;
  }

  report.applied = state.updates_applied();
  report.skipped = state.updates_skipped();
  report.noops = state.updates_noop();
  report.min_cosine = state.min_cosine_observed();
  report.final_matrix = state.matrix();
  if (!report.step_records.empty() && report.has_reference) {
    report.final_dist_op = report.step_records.back().dist_op;
    report.final_dist_fro = report.step_records.back().dist_fro;
  }

  const bool diagnostics = options.check_bounds && report.has_reference && !report.aborted &&
                           completed == options.steps;
  if (!diagnostics) {
    report.bounds_in_scope = false;
    return report;
  }

  if (completed >= m + 1) {
    const SequenceUliProfile profile = sequence_uli_profile(directions, m, d);
    report.beta_hat = profile.beta_hat;
  }
  report.bounds_in_scope = report.skipped == 0 && report.beta_hat > 0.0;

  const int horizon = completed - 1;  // matrices A_0 .. A_horizon were sampled
  const EtaProfile eta([&oracle](int k) { return oracle.reference_matrix(k); }, horizon);
  std::vector<double> a_norms(horizon + 1);
  for (int k = 0; k <= horizon; ++k) a_norms[k] = operator_norm(oracle.reference_matrix(k));
  const double limit_norm = operator_norm(limit);

  // Per-direction drift checks, asserted only on skip-free runs.
  if (report.skipped == 0) {
    for (int k = 0; k < completed; ++k) {
      const double s_norm = norm(directions[k]);
      const SymMatrix a_k = oracle.reference_matrix(k);
      for (int l = k + 1; l <= completed; ++l) {
        const Vector drift = (a_k - b_history[l]).apply(directions[k]);
        const double lhs = norm(drift);
        const double bound =
            direction_drift_bound(prefix_cosine[l], k, l, eta.eta(k, l - 1), s_norm);
        const double allowance =
            bound * (1.0 + 1e-9) + roundoff_allowance(a_norms[k]) * s_norm;
        ++report.drift_checks;
        if (lhs > allowance) ++report.drift_violations;
        if (allowance > 0.0)
          report.drift_worst_ratio = std::max(report.drift_worst_ratio, lhs / allowance);
      }
    }
  }

  // Window-level limit checks; eta_star over the infinite tail is the
  // finite-horizon supremum plus the provider's analytic tail when it has
  // one. Without a tail the comparison is reported but not counted as a
  // violation (the surrogate underestimates the true modulus).
  if (report.bounds_in_scope) {
    const double c_obs = report.min_cosine;
    for (int k = 0; k + m <= completed && k <= horizon; ++k) {
      WindowCheck check;
      check.k = k;
      check.eta_star = eta.eta_star_finite(k);
      if (report.eta_tail_sound) check.eta_star += oracle.tail_bound(k);
      check.lhs = operator_norm(b_history[k + m] - limit);
      check.bound = limit_error_bound(c_obs, m, d, report.beta_hat, check.eta_star);
      check.ok =
          check.lhs <= check.bound * (1.0 + 1e-9) + roundoff_allowance(limit_norm);
      if (!check.ok && report.eta_tail_sound) ++report.limit_violations;
      report.limit_checks.push_back(check);
    }
  }

  return report;
}

std::string TrackReport::to_csv() const {
  std::string out = "k,status,cosine,residual_norm,dist_op,dist_fro,eta_star,limit_bound,"
                    "limit_lhs,limit_ok\n";
  std::vector<const WindowCheck*> by_k(steps + 1, nullptr);
  for (const WindowCheck& c : limit_checks)
    if (c.k <= steps) by_k[c.k] = &c;
  for (const StepRecord& rec : step_records) {
    out += std::to_string(rec.k);
    out += ',';
    out += to_string(rec.outcome.status);
    out += ',';
    out += format_double(rec.outcome.cosine);
    out += ',';
    out += format_double(rec.outcome.residual_norm);
    out += ',';
    if (std::isfinite(rec.dist_op)) out += format_double(rec.dist_op);
    out += ',';
    if (std::isfinite(rec.dist_fro)) out += format_double(rec.dist_fro);
    const WindowCheck* c = rec.k <= steps ? by_k[rec.k] : nullptr;
    if (c) {
      out += ',';
      out += format_double(c->eta_star);
      out += ',';
      out += format_double(c->bound);
      out += ',';
      out += format_double(c->lhs);
      out += ',';
      out += c->ok ? '1' : '0';
    } else {
      out += ",,,,";
    }
    out += '\n';
  }
  return out;
}

std::string TrackReport::to_json_string() const {
  nlohmann::ordered_json j;
  j["dim"] = dim;
  j["steps"] = steps;
  j["window"] = window;
  j["applied"] = applied;
  j["skipped"] = skipped;
  j["noops"] = noops;
  j["min_cosine"] = min_cosine;
  if (std::isfinite(beta_hat)) j["beta_hat"] = beta_hat;
  j["bounds_in_scope"] = bounds_in_scope;
  j["eta_mode"] = eta_tail_sound ? "tail_augmented" : "finite_horizon";
  j["aborted"] = aborted;
  if (aborted) j["abort_reason"] = abort_reason;
  if (std::isfinite(final_dist_op)) {
    j["final"]["dist_op"] = final_dist_op;
    j["final"]["dist_fro"] = final_dist_fro;
  }
  j["drift_checks"] = drift_checks;
  j["drift_violations"] = drift_violations;
  j["limit_checks"] = static_cast<long>(limit_checks.size());
  j["limit_violations"] = limit_violations;

  nlohmann::ordered_json steps_json = nlohmann::ordered_json::array();
  for (const StepRecord& rec : step_records) {
    nlohmann::ordered_json s;
    s["k"] = rec.k;
    s["status"] = to_string(rec.outcome.status);
    s["cosine"] = rec.outcome.cosine;
    s["residual_norm"] = rec.outcome.residual_norm;
    if (std::isfinite(rec.dist_op)) {
      s["dist_op"] = rec.dist_op;
      s["dist_fro"] = rec.dist_fro;
    }
    steps_json.push_back(std::move(s));
  }
  j["step_records"] = std::move(steps_json);

  nlohmann::ordered_json checks_json = nlohmann::ordered_json::array();
  for (const WindowCheck& c : limit_checks) {
    nlohmann::ordered_json s;
    s["k"] = c.k;
    s["eta_star"] = c.eta_star;
    s["bound"] = c.bound;
    s["lhs"] = c.lhs;
    s["ok"] = c.ok;
    checks_json.push_back(std::move(s));
  }
  j["limit_check_records"] = std::move(checks_json);
  return j.dump(2) + "\n";
}

}  // namespace sr1
