#include "sr1track/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sr1track/format.hpp"
#include "sr1track/rng.hpp"

namespace sr1 {

namespace {

Vector apply_constraint(const ControlProblem& prob, const Vector& v) {
  Vector out(prob.n_constraints, 0.0);
  for (int i = 0; i < prob.n_constraints; ++i) out[i] = dot(prob.constraint_rows[i], v);
  return out;
}

Vector apply_constraint_transpose(const ControlProblem& prob, const Vector& w) {
  Vector out(prob.dim, 0.0);
  for (int i = 0; i < prob.n_constraints; ++i)
    for (int j = 0; j < prob.dim; ++j) out[j] += prob.constraint_rows[i][j] * w[i];
  return out;
}

// q = p - C^T A^{-1} C K p, the momentum component that moves inside ker(C).
Vector projected_momentum(const ControlProblem& prob, const Vector& x, const Vector& p,
                          const SymMatrix& k_x, const AinvApply& ainv) {
  if (prob.n_constraints == 0) return p;
  const Vector kp = k_x.apply(p);
  const Vector w = apply_constraint(prob, kp);
  const Vector mult = ainv(x, w);
  const Vector correction = apply_constraint_transpose(prob, mult);
  Vector q = p;
  for (int i = 0; i < prob.dim; ++i) q[i] -= correction[i];
  return q;
}

double quadratic_form(const SymMatrix& k, const Vector& q) { return dot(q, k.apply(q)); }

void check_node_feasible(const ControlProblem& prob, const Vector& x, int node) {
  if (!all_finite(x))
    fail(errc::infeasible, "integration produced a non-finite state at node " +
                               std::to_string(node));
  if (prob.n_constraints == 0) return;
  const SymMatrix a = constraint_operator(prob, x);
  const double min_eig = sym_eigenvalues(a).front();
  if (!(min_eig > 1e-12 * (1.0 + frobenius_norm(a))))
    fail(errc::infeasible,
         "constraint operator lost positive definiteness at node " + std::to_string(node));
}

struct GradientResult {
  Vector gradient;
  double norm_value = 0.0;
};

GradientResult cost_gradient_fd(const ControlProblem& prob, const TimeGrid& grid,
                                const BFamily* family, const Vector& p0) {
  const int d = prob.dim;
  const double h = 1e-5 * (1.0 + norm(p0));
  GradientResult out{Vector(d, 0.0), 0.0};
  for (int i = 0; i < d; ++i) {
    Vector plus = p0;
    Vector minus = p0;
    plus[i] += h;
    minus[i] -= h;
    const double cp = shoot(prob, plus, grid, family).cost;
    const double cm = shoot(prob, minus, grid, family).cost;
    out.gradient[i] = (cp - cm) / (2.0 * h);
  }
  out.norm_value = norm(out.gradient);
  return out;
}

}  // namespace

void validate_problem(const ControlProblem& prob) {
  if (prob.dim < 1) fail(errc::invalid_argument, "control problem: dimension must be >= 1");
  if (prob.n_constraints < 0 ||
      static_cast<int>(prob.constraint_rows.size()) != prob.n_constraints)
    fail(errc::invalid_argument, "control problem: constraint row count mismatch");
  for (const Vector& row : prob.constraint_rows)
    if (static_cast<int>(row.size()) != prob.dim)
      fail(errc::dimension_mismatch, "control problem: constraint row of wrong dimension");
  if (static_cast<int>(prob.x0.size()) != prob.dim)
    fail(errc::dimension_mismatch, "control problem: x0 of wrong dimension");
  if (!prob.cometric || !prob.cost)
    fail(errc::invalid_argument, "control problem: missing co-metric or cost");
  if (prob.n_constraints > 0) {
    const Vector cx0 = apply_constraint(prob, prob.x0);
    if (norm(cx0) > 1e-10 * (1.0 + norm(prob.x0)))
      fail(errc::invalid_argument, "control problem: x0 does not satisfy C x0 = 0");
  }
}

TimeGrid::TimeGrid(int n) : n_steps(n) {
  if (n < 2) fail(errc::invalid_argument, "time grid needs at least 2 steps");
}

BFamily initial_b_family(const TimeGrid& grid, int n_constraints) {
  BFamily family;
  if (n_constraints == 0) return family;
  family.reserve(grid.n_steps + 1);
  for (int i = 0; i <= grid.n_steps; ++i) family.emplace_back(n_constraints);
  return family;
}

SymMatrix constraint_operator(const ControlProblem& prob, const Vector& x) {
  if (prob.n_constraints == 0)
    fail(errc::invalid_argument, "constraint_operator: problem has no constraints");
  const SymMatrix k = prob.cometric(x);
  std::vector<Vector> k_rows(prob.n_constraints);
  for (int i = 0; i < prob.n_constraints; ++i) k_rows[i] = k.apply(prob.constraint_rows[i]);
  SymMatrix a(prob.n_constraints);
  for (int i = 0; i < prob.n_constraints; ++i)
    for (int j = i; j < prob.n_constraints; ++j)
      a.set(i, j, dot(prob.constraint_rows[i], k_rows[j]));
  return a;
}

AinvApply exact_ainv(const ControlProblem& prob) {
  return [&prob](const Vector& x, const Vector& rhs) {
    const SymMatrix a = constraint_operator(prob, x);
    return lu_solve(SquareMatrix::from_sym(a), rhs);
  };
}

AinvApply family_ainv(const Sr1State& node_state) {
  return [&node_state](const Vector&, const Vector& rhs) {
    return node_state.matrix().apply(rhs);
  };
}

StateDerivative projected_rhs(const ControlProblem& prob, const Vector& x, const Vector& p,
                              const AinvApply& ainv) {
  const SymMatrix k = prob.cometric(x);
  const Vector q = projected_momentum(prob, x, p, k, ainv);

  StateDerivative d;
  d.x_dot = k.apply(q);
  d.p_dot.assign(prob.dim, 0.0);
  const double h = 1e-5 * (1.0 + norm(x));
  for (int i = 0; i < prob.dim; ++i) {
    Vector plus = x;
    Vector minus = x;
    plus[i] += h;
    minus[i] -= h;
    const double vp = quadratic_form(prob.cometric(plus), q);
    const double vm = quadratic_form(prob.cometric(minus), q);
    d.p_dot[i] = -0.5 * (vp - vm) / (2.0 * h);
  }
  return d;
}

ShootResult shoot(const ControlProblem& prob, const Vector& p0, const TimeGrid& grid,
                  const BFamily* family) {
  validate_problem(prob);
  if (static_cast<int>(p0.size()) != prob.dim)
    fail(errc::dimension_mismatch, "shoot: p0 of wrong dimension");
  if (family && static_cast<int>(family->size()) != grid.n_steps + 1)
    fail(errc::invalid_argument, "shoot: family length must match the grid");

  const double h = grid.dt();
  ShootResult result;
  Vector x = prob.x0;
  Vector p = p0;

  double kinetic = 0.0;
  for (int i = 0; i <= grid.n_steps; ++i) {
    check_node_feasible(prob, x, i);
    result.trajectory.x.push_back(x);
    result.trajectory.p.push_back(p);

    const AinvApply ainv =
        family && prob.n_constraints > 0 ? family_ainv((*family)[i]) : exact_ainv(prob);
    if (i == 0) {
      const SymMatrix k0 = prob.cometric(x);
      const Vector q0 = projected_momentum(prob, x, p, k0, ainv);
      kinetic = 0.5 * quadratic_form(k0, q0);
    }
    if (i == grid.n_steps) break;

    const auto rhs = [&](const Vector& xs, const Vector& ps) {
      return projected_rhs(prob, xs, ps, ainv);
    };
    const StateDerivative k1 = rhs(x, p);
    Vector x2(prob.dim), p2(prob.dim);
    for (int c = 0; c < prob.dim; ++c) {
      x2[c] = x[c] + 0.5 * h * k1.x_dot[c];
      p2[c] = p[c] + 0.5 * h * k1.p_dot[c];
    }
    const StateDerivative k2 = rhs(x2, p2);
    Vector x3(prob.dim), p3(prob.dim);
    for (int c = 0; c < prob.dim; ++c) {
      x3[c] = x[c] + 0.5 * h * k2.x_dot[c];
      p3[c] = p[c] + 0.5 * h * k2.p_dot[c];
    }
    const StateDerivative k3 = rhs(x3, p3);
    Vector x4(prob.dim), p4(prob.dim);
    for (int c = 0; c < prob.dim; ++c) {
      x4[c] = x[c] + h * k3.x_dot[c];
      p4[c] = p[c] + h * k3.p_dot[c];
    }
    const StateDerivative k4 = rhs(x4, p4);
    for (int c = 0; c < prob.dim; ++c) {
      x[c] += h / 6.0 * (k1.x_dot[c] + 2.0 * k2.x_dot[c] + 2.0 * k3.x_dot[c] + k4.x_dot[c]);
      p[c] += h / 6.0 * (k1.p_dot[c] + 2.0 * k2.p_dot[c] + 2.0 * k3.p_dot[c] + k4.p_dot[c]);
    }
  }

  result.cost = kinetic + prob.cost(result.trajectory.x.back());
  return result;
}

void update_b_family(BFamily& family, const ControlProblem& prob, const Trajectory& trajectory,
                     int outer_index, const SkipPolicy& policy) {
  const int l = prob.n_constraints;
  if (l == 0) return;
  if (family.size() != trajectory.x.size())
    fail(errc::invalid_argument, "update_b_family: family/trajectory length mismatch");
  const Vector y = unit_vector(l, outer_index % l);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const SymMatrix a = constraint_operator(prob, trajectory.x[i]);
    const Vector s = a.apply(y);
    family[i].update(s, y, policy);
  }
}

double family_inverse_residual(const BFamily& family, const ControlProblem& prob,
                               const Trajectory& trajectory) {
  const int l = prob.n_constraints;
  if (l == 0) return 0.0;
  double worst = 0.0;
  for (std::size_t node = 0; node < family.size(); ++node) {
    const SymMatrix a = constraint_operator(prob, trajectory.x[node]);
    const SymMatrix& b = family[node].matrix();
    double fro2 = 0.0;
    for (int i = 0; i < l; ++i) {
      for (int j = 0; j < l; ++j) {
        double v = 0.0;
        for (int k = 0; k < l; ++k) v += b(i, k) * a(k, j);
        if (i == j) v -= 1.0;
        fro2 += v * v;
      }
    }
    worst = std::max(worst, std::sqrt(fro2));
  }
  return worst;
}

OuterResult outer_minimize(const ControlProblem& prob, const TimeGrid& grid,
                           const OuterOptions& options) {
  validate_problem(prob);
  if (options.iterations < 1)
    fail(errc::invalid_argument, "outer_minimize: iterations must be >= 1");

  OuterResult result;
  result.family = initial_b_family(grid, prob.n_constraints);
  const BFamily* family_ptr =
      (options.exact_mode || prob.n_constraints == 0) ? nullptr : &result.family;

  result.p0.assign(prob.dim, 0.0);
  ShootResult current = shoot(prob, result.p0, grid, family_ptr);
  result.initial_cost = current.cost;

  for (int iter = 0; iter < options.iterations; ++iter) {
    const GradientResult grad = cost_gradient_fd(prob, grid, family_ptr, result.p0);

    double alpha = options.step0;
    bool accepted = false;
    for (int halving = 0; halving < options.max_halvings; ++halving) {
      Vector candidate = result.p0;
      for (int i = 0; i < prob.dim; ++i) candidate[i] -= alpha * grad.gradient[i];
      ShootResult probe = shoot(prob, candidate, grid, family_ptr);
      if (probe.cost <=
          current.cost - options.armijo_c * alpha * grad.norm_value * grad.norm_value) {
        result.p0 = std::move(candidate);
        current = std::move(probe);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      ++result.stalls;
      alpha = 0.0;
    }

    // The family keeps converging along the settled trajectory even when the
    // momentum no longer moves.
    update_b_family(result.family, prob, current.trajectory, iter, options.policy);
    const double residual =
        family_inverse_residual(result.family, prob, current.trajectory);

    result.history.push_back({iter, current.cost, grad.norm_value, residual, alpha});
  }

  result.final_trajectory = current.trajectory;
  return result;
}

ControlProblem landmark_problem(const std::vector<std::array<double, 2>>& positions,
                                double sigma, std::vector<Vector> constraint_rows,
                                const Vector& target) {
  const int n = static_cast<int>(positions.size());
  if (n < 2) fail(errc::invalid_argument, "landmark_problem: need at least two landmarks");
  if (!(sigma > 0.0)) fail(errc::invalid_argument, "landmark_problem: sigma must be > 0");
  const int d = 2 * n;

  double scale = 0.0;
  for (const auto& q : positions) scale = std::max({scale, std::abs(q[0]), std::abs(q[1])});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = positions[i][0] - positions[j][0];
      const double dy = positions[i][1] - positions[j][1];
      if (std::sqrt(dx * dx + dy * dy) < 1e-8 * (1.0 + scale))
        fail(errc::invalid_argument, "landmark_problem: coincident landmarks rejected");
    }

  ControlProblem prob;
  prob.dim = d;
  prob.n_constraints = static_cast<int>(constraint_rows.size());
  prob.constraint_rows = std::move(constraint_rows);
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  prob.cometric = [n, inv_sigma2](const Vector& x) {
    SymMatrix k(2 * n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double dx = x[2 * i] - x[2 * j];
        const double dy = x[2 * i + 1] - x[2 * j + 1];
        const double w = std::exp(-(dx * dx + dy * dy) * inv_sigma2);
        k.set(2 * i, 2 * j, w);
        k.set(2 * i + 1, 2 * j + 1, w);
        if (i != j) k.set(2 * i, 2 * j + 1, 0.0);
      }
    }
    return k;
  };
  prob.x0.resize(d);
  for (int i = 0; i < n; ++i) {
    prob.x0[2 * i] = positions[i][0];
    prob.x0[2 * i + 1] = positions[i][1];
  }
  prob.cost = [target](const Vector& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = x[i] - target[i];
      s += 0.5 * u * u;
    }
    return s;
  };
  prob.cost_gradient = [target](const Vector& x) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] - target[i];
    return g;
  };
  return prob;
}

ControlProblem builtin_landmark_problem(int n_landmarks, double sigma, int n_constraints,
                                        uint64_t seed) {
  if (n_landmarks < 2)
    fail(errc::invalid_argument, "builtin_landmark_problem: need at least two landmarks");
  const int d = 2 * n_landmarks;
  if (n_constraints < 1 || n_constraints > d)
    fail(errc::invalid_argument, "builtin_landmark_problem: constraints must lie in [1, 2n]");

  SeededRng rng(seed);
  Vector raw(d);
  for (double& v : raw) v = rng.next_gaussian();

  // full-row-rank C, reseeded a few times before giving up
  std::vector<Vector> rows;
  bool rank_ok = false;
  for (int attempt = 0; attempt < 10 && !rank_ok; ++attempt) {
    rows.assign(n_constraints, Vector(d, 0.0));
    for (Vector& row : rows) {
      for (double& v : row) v = rng.next_gaussian();
      const double rn = norm(row);
      for (double& v : row) v /= rn;
    }
    SymMatrix gram(n_constraints);
    for (int i = 0; i < n_constraints; ++i)
      for (int j = i; j < n_constraints; ++j) gram.set(i, j, dot(rows[i], rows[j]));
    rank_ok = sym_eigenvalues(gram).front() > 1e-10;
  }
  if (!rank_ok)
    fail(errc::singular_matrix, "builtin_landmark_problem: could not seed full-rank C");

  // project into ker(C): v - C^T (C C^T)^{-1} C v
  SquareMatrix gram(n_constraints);
  for (int i = 0; i < n_constraints; ++i)
    for (int j = 0; j < n_constraints; ++j) gram.at(i, j) = dot(rows[i], rows[j]);
  const auto project = [&](const Vector& v) {
    Vector cv(n_constraints);
    for (int i = 0; i < n_constraints; ++i) cv[i] = dot(rows[i], v);
    const Vector mult = lu_solve(gram, cv);
    Vector out = v;
    for (int i = 0; i < n_constraints; ++i)
      for (int j = 0; j < d; ++j) out[j] -= rows[i][j] * mult[i];
    return out;
  };

  const Vector x0 = project(raw);
  Vector offset(d);
  for (double& v : offset) v = rng.next_gaussian();
  offset = project(offset);
  Vector target(d);
  for (int i = 0; i < d; ++i) target[i] = x0[i] + 0.5 * offset[i];

  std::vector<std::array<double, 2>> positions(n_landmarks);
  for (int i = 0; i < n_landmarks; ++i) positions[i] = {x0[2 * i], x0[2 * i + 1]};

  ControlProblem prob = landmark_problem(positions, sigma, rows, target);
  validate_problem(prob);

  const SymMatrix a0 = constraint_operator(prob, prob.x0);
  if (!(sym_eigenvalues(a0).front() > 0.0))
    fail(errc::infeasible, "builtin_landmark_problem: constraint operator not SPD at x0");
  return prob;
}

GeodesicRunConfig GeodesicRunConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(errc::io, std::string("geodesic config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(errc::invalid_argument, "geodesic config: expected a JSON object");

  GeodesicRunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_landmarks")
        cfg.n_landmarks = value.get<int>();
      else if (key == "sigma")
        cfg.sigma = value.get<double>();
      else if (key == "constraints")
        cfg.n_constraints = value.get<int>();
      else if (key == "seed")
        cfg.seed = value.get<uint64_t>();
      else if (key == "grid")
        cfg.grid = value.get<int>();
      else if (key == "iterations")
        cfg.iterations = value.get<int>();
      else if (key == "step0")
        cfg.step0 = value.get<double>();
      else if (key == "c_min")
        cfg.policy.c_min = value.get<double>();
      else if (key == "r_floor")
        cfg.policy.r_floor = value.get<double>();
      else if (key == "mode") {
        const std::string mode = value.get<std::string>();
        if (mode == "exact")
          cfg.exact_mode = true;
        else if (mode == "sr1")
          cfg.exact_mode = false;
        else
          fail(errc::invalid_argument, "geodesic config: mode must be 'sr1' or 'exact'");
      } else {
        fail(errc::invalid_argument, "geodesic config: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      fail(errc::invalid_argument, "geodesic config: bad value for '" + key + "': " + e.what());
    }
  }
  if (cfg.iterations < 1)
    fail(errc::invalid_argument, "geodesic config: iterations must be >= 1");
  return cfg;
}

GeodesicRunResult run_geodesic(const GeodesicRunConfig& config) {
  const ControlProblem prob = builtin_landmark_problem(config.n_landmarks, config.sigma,
                                                       config.n_constraints, config.seed);
  const TimeGrid grid(config.grid);
  OuterOptions options;
  options.iterations = config.iterations;
  options.step0 = config.step0;
  options.policy = config.policy;
  options.exact_mode = config.exact_mode;

  GeodesicRunResult result;
  result.config = config;
  result.outer = outer_minimize(prob, grid, options);
  const OuterHistoryRow& last = result.outer.history.back();
  result.final_cost = last.cost;
  result.final_grad_norm = last.grad_norm;
  result.final_max_binv_residual = last.max_binv_residual;
  return result;
}

std::string GeodesicRunResult::to_csv() const {
  std::string out = "iter,cost,grad_norm,max_binv_residual,step\n";
  for (const OuterHistoryRow& row : outer.history) {
    out += std::to_string(row.iter);
    out += ',';
    out += format_double(row.cost);
    out += ',';
    out += format_double(row.grad_norm);
    out += ',';
    out += format_double(row.max_binv_residual);
    out += ',';
    out += format_double(row.step);
    out += '\n';
  }
  return out;
}

std::string GeodesicRunResult::to_json_string() const {
  nlohmann::ordered_json j;
  j["config"]["n_landmarks"] = config.n_landmarks;
  j["config"]["sigma"] = config.sigma;
  j["config"]["constraints"] = config.n_constraints;
  j["config"]["seed"] = config.seed;
  j["config"]["grid"] = config.grid;
  j["config"]["iterations"] = config.iterations;
  j["config"]["step0"] = config.step0;
  j["config"]["mode"] = config.exact_mode ? "exact" : "sr1";
  j["initial_cost"] = outer.initial_cost;
  j["final_cost"] = final_cost;
  j["final_grad_norm"] = final_grad_norm;
  j["final_max_binv_residual"] = final_max_binv_residual;
  j["stalls"] = outer.stalls;
  j["p0"] = outer.p0;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const OuterHistoryRow& row : outer.history) {
    nlohmann::ordered_json r;
    r["iter"] = row.iter;
    r["cost"] = row.cost;
    r["grad_norm"] = row.grad_norm;
    r["max_binv_residual"] = row.max_binv_residual;
    r["step"] = row.step;
    rows.push_back(std::move(r));
  }
  j["history"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace sr1
