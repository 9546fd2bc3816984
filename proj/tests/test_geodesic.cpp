#include <doctest.h>

#include <cmath>

#include "sr1track/geodesic.hpp"
#include "test_support.hpp"

using namespace sr1;

namespace {

ControlProblem unconstrained_euclidean(int d) {
  ControlProblem prob;
  prob.dim = d;
  prob.n_constraints = 0;
  prob.cometric = [d](const Vector&) { return SymMatrix::identity(d); };
  prob.cost = [](const Vector&) { return 0.0; };
  prob.cost_gradient = [d](const Vector&) { return Vector(d, 0.0); };
  prob.x0.assign(d, 0.0);
  return prob;
}

ControlProblem constant_metric_problem() {
  // fixed co-metric, one constraint row; trajectories live in the plane
  // orthogonal to e0 + e1
  ControlProblem prob;
  prob.dim = 3;
  prob.n_constraints = 1;
  prob.cometric = [](const Vector&) {
    SymMatrix k = SymMatrix::identity(3);
    k.set(0, 0, 2.0);
    k.set(0, 1, 0.5);
    return k;
  };
  prob.constraint_rows = {{1.0, 1.0, 0.0}};
  prob.cost = [](const Vector&) { return 0.0; };
  prob.cost_gradient = [](const Vector&) { return Vector(3, 0.0); };
  prob.x0 = {0.0, 0.0, 0.0};
  return prob;
}

double max_constraint_drift(const ControlProblem& prob, const Trajectory& traj) {
  double worst = 0.0;
  for (const Vector& x : traj.x)
    for (int i = 0; i < prob.n_constraints; ++i)
      worst = std::max(worst, std::abs(dot(prob.constraint_rows[i], x)));
  return worst;
}

}  // namespace

TEST_CASE("constraint_operator") {
  SUBCASE("orthonormal rows against the identity co-metric") {
    ControlProblem prob;
    prob.dim = 3;
    prob.n_constraints = 2;
    prob.cometric = [](const Vector&) { return SymMatrix::identity(3); };
    prob.constraint_rows = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
    prob.x0 = {0.0, 0.0, 0.0};
    const SymMatrix a = constraint_operator(prob, prob.x0);
    CHECK(frobenius_distance(a, SymMatrix::identity(2)) <= 1e-14);
  }
  SUBCASE("scalar case") {
    ControlProblem prob;
    prob.dim = 2;
    prob.n_constraints = 1;
    prob.cometric = [](const Vector&) {
      SymMatrix k = SymMatrix::identity(2);
      k.set(0, 0, 2.0);
      k.set(1, 1, 2.0);
      return k;
    };
    prob.constraint_rows = {{1.0, 0.0}};
    prob.x0 = {0.0, 0.0};
    const SymMatrix a = constraint_operator(prob, prob.x0);
    CHECK(a(0, 0) == doctest::Approx(2.0));
  }
}

TEST_CASE("projected_rhs") {
  SUBCASE("unconstrained flow follows the co-metric") {
    const ControlProblem prob = unconstrained_euclidean(3);
    const Vector p{1.0, -2.0, 0.5};
    const StateDerivative d = projected_rhs(prob, prob.x0, p, exact_ainv(prob));
    for (int i = 0; i < 3; ++i) {
      CHECK(d.x_dot[i] == doctest::Approx(p[i]));
      CHECK(d.p_dot[i] == doctest::Approx(0.0));
    }
  }
  SUBCASE("constant co-metric freezes the momentum and the constraint") {
    const ControlProblem prob = constant_metric_problem();
    const Vector p{1.0, 0.0, 1.0};
    const StateDerivative d = projected_rhs(prob, prob.x0, p, exact_ainv(prob));
    for (int i = 0; i < 3; ++i) CHECK(d.p_dot[i] == doctest::Approx(0.0));
    // C x_dot = 0 by construction of the projection
    CHECK(std::abs(dot(prob.constraint_rows[0], d.x_dot)) <= 1e-8);
  }
}

TEST_CASE("shoot") {
  SUBCASE("zero momentum keeps the state put") {
    const ControlProblem prob = builtin_landmark_problem(2, 1.0, 1, 3);
    const TimeGrid grid(50);
    const ShootResult result = shoot(prob, Vector(prob.dim, 0.0), grid, nullptr);
    double moved = 0.0;
    for (int i = 0; i < prob.dim; ++i)
      moved = std::max(moved, std::abs(result.trajectory.x.back()[i] - prob.x0[i]));
    CHECK(moved <= 1e-12);
    CHECK(result.cost == doctest::Approx(prob.cost(prob.x0)));
  }
  SUBCASE("unconstrained Euclidean geodesics are straight lines") {
    const ControlProblem prob = unconstrained_euclidean(2);
    const TimeGrid grid(100);
    const Vector p0{0.3, -0.7};
    const ShootResult result = shoot(prob, p0, grid, nullptr);
    CHECK(result.cost == doctest::Approx(0.5 * (p0[0] * p0[0] + p0[1] * p0[1])));
    for (int i = 0; i < 2; ++i)
      CHECK(result.trajectory.x.back()[i] == doctest::Approx(p0[i]).epsilon(1e-9));
  }
  SUBCASE("constraint is conserved along an exact-mode trajectory") {
    const ControlProblem prob = builtin_landmark_problem(3, 1.0, 2, 5);
    const TimeGrid grid(100);
    Vector p0(prob.dim, 0.0);
    SeededRng rng(17);
    for (double& v : p0) v = 0.4 * rng.next_gaussian();
    const ShootResult result = shoot(prob, p0, grid, nullptr);
    CHECK(max_constraint_drift(prob, result.trajectory) <= 1e-6 * (1.0 + norm(prob.x0)));
  }
  SUBCASE("grid refinement converges") {
    const ControlProblem prob = builtin_landmark_problem(3, 1.0, 2, 5);
    Vector p0(prob.dim, 0.0);
    SeededRng rng(17);
    for (double& v : p0) v = 0.4 * rng.next_gaussian();
    const double c50 = shoot(prob, p0, TimeGrid(50), nullptr).cost;
    const double c100 = shoot(prob, p0, TimeGrid(100), nullptr).cost;
    const double c200 = shoot(prob, p0, TimeGrid(200), nullptr).cost;
    CHECK(std::abs(c200 - c100) <= std::abs(c100 - c50) + 1e-12);
    CHECK(std::abs(c200 - c100) <= 1e-8 * (1.0 + std::abs(c200)));
  }
}

TEST_CASE("update_b_family") {
  SUBCASE("a frozen trajectory lets every node invert exactly") {
    const ControlProblem prob = constant_metric_problem();
    const TimeGrid grid(10);
    const ShootResult rest = shoot(prob, Vector(3, 0.0), grid, nullptr);
    BFamily family = initial_b_family(grid, prob.n_constraints);
    for (int outer = 0; outer < prob.n_constraints; ++outer)
      update_b_family(family, prob, rest.trajectory, outer);
    CHECK(family_inverse_residual(family, prob, rest.trajectory) <= 1e-12);
  }
  SUBCASE("already-converged nodes record no-ops") {
    const ControlProblem prob = constant_metric_problem();
    const TimeGrid grid(5);
    const ShootResult rest = shoot(prob, Vector(3, 0.0), grid, nullptr);
    BFamily family = initial_b_family(grid, prob.n_constraints);
    update_b_family(family, prob, rest.trajectory, 0);
    const long applied_before = family.front().updates_applied();
    update_b_family(family, prob, rest.trajectory, 0);  // same direction again
    CHECK(family.front().updates_applied() == applied_before);
    CHECK(family.front().updates_noop() > 0);
  }
}

TEST_CASE("outer_minimize") {
  SUBCASE("a flat cost keeps the zero momentum optimal") {
    ControlProblem prob = builtin_landmark_problem(2, 1.0, 1, 21);
    prob.cost = [](const Vector&) { return 0.0; };
    prob.cost_gradient = [&prob](const Vector&) { return Vector(prob.dim, 0.0); };
    const TimeGrid grid(40);
    OuterOptions options;
    options.iterations = 2;
    const OuterResult result = outer_minimize(prob, grid, options);
    CHECK(norm(result.p0) == 0.0);
    for (const OuterHistoryRow& row : result.history) CHECK(row.grad_norm <= 1e-8);
  }
  SUBCASE("landmark problem: cost decreases and the family converges") {
    const ControlProblem prob = builtin_landmark_problem(3, 1.0, 2, 5);
    const TimeGrid grid(60);
    OuterOptions options;
    options.iterations = 25;
    const OuterResult result = outer_minimize(prob, grid, options);
    double previous = result.initial_cost;
    for (const OuterHistoryRow& row : result.history) {
      if (row.step > 0.0) CHECK(row.cost < previous);
      previous = row.cost;
    }
    CHECK(result.history.back().cost < result.initial_cost);
    CHECK(result.history.back().max_binv_residual <= 1e-4);

    // once the momentum settles the family polishes monotonically over the
    // last 2l iterations
    const std::size_t tail = 2 * static_cast<std::size_t>(prob.n_constraints);
    for (std::size_t i = result.history.size() - tail; i < result.history.size(); ++i)
      CHECK(result.history[i].max_binv_residual <=
            result.history[i - 1].max_binv_residual * (1.0 + 1e-9) + 1e-14);
  }
  SUBCASE("converged family reproduces the exact-mode cost") {
    const ControlProblem prob = builtin_landmark_problem(3, 1.0, 2, 5);
    const TimeGrid grid(60);
    OuterOptions options;
    options.iterations = 25;
    const OuterResult result = outer_minimize(prob, grid, options);
    const double sr1_cost = shoot(prob, result.p0, grid, &result.family).cost;
    const double exact_cost = shoot(prob, result.p0, grid, nullptr).cost;
    CHECK(std::abs(sr1_cost - exact_cost) <= 1e-6 * (1.0 + std::abs(exact_cost)));
  }
  SUBCASE("exact mode matches a hand-written loop over exact shoots") {
    const ControlProblem prob = builtin_landmark_problem(3, 1.0, 2, 9);
    const TimeGrid grid(40);
    OuterOptions options;
    options.iterations = 6;
    options.exact_mode = true;
    const OuterResult result = outer_minimize(prob, grid, options);

    // independent re-implementation of the same schedule
    Vector p0(prob.dim, 0.0);
    BFamily family = initial_b_family(grid, prob.n_constraints);
    ShootResult current = shoot(prob, p0, grid, nullptr);
    for (int iter = 0; iter < options.iterations; ++iter) {
      const double h = 1e-5 * (1.0 + norm(p0));
      Vector gradient(prob.dim, 0.0);
      for (int i = 0; i < prob.dim; ++i) {
        Vector plus = p0, minus = p0;
        plus[i] += h;
        minus[i] -= h;
        gradient[i] = (shoot(prob, plus, grid, nullptr).cost -
                       shoot(prob, minus, grid, nullptr).cost) /
                      (2.0 * h);
      }
      const double gnorm = norm(gradient);
      double alpha = options.step0;
      bool accepted = false;
      for (int halving = 0; halving < options.max_halvings; ++halving) {
        Vector candidate = p0;
        for (int i = 0; i < prob.dim; ++i) candidate[i] -= alpha * gradient[i];
        const ShootResult probe = shoot(prob, candidate, grid, nullptr);
        if (probe.cost <= current.cost - options.armijo_c * alpha * gnorm * gnorm) {
          p0 = candidate;
          current = probe;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) alpha = 0.0;
      update_b_family(family, prob, current.trajectory, iter, options.policy);

      const OuterHistoryRow& row = result.history[iter];
      CHECK(row.cost == current.cost);
      CHECK(row.grad_norm == gnorm);
      CHECK(row.step == alpha);
      CHECK(row.max_binv_residual ==
            family_inverse_residual(family, prob, current.trajectory));
    }
    for (int i = 0; i < prob.dim; ++i) CHECK(result.p0[i] == p0[i]);
  }
  SUBCASE("finite-difference gradient passes a step-halving check") {
    const ControlProblem prob = builtin_landmark_problem(3, 1.0, 2, 5);
    const TimeGrid grid(50);
    Vector p0(prob.dim, 0.0);
    SeededRng rng(23);
    for (double& v : p0) v = 0.3 * rng.next_gaussian();

    const auto fd_gradient = [&](double h) {
      Vector g(prob.dim, 0.0);
      for (int i = 0; i < prob.dim; ++i) {
        Vector plus = p0, minus = p0;
        plus[i] += h;
        minus[i] -= h;
        g[i] = (shoot(prob, plus, grid, nullptr).cost -
                shoot(prob, minus, grid, nullptr).cost) /
               (2.0 * h);
      }
      return g;
    };
    const double h = 1e-5 * (1.0 + norm(p0));
    const Vector coarse = fd_gradient(h);
    const Vector fine = fd_gradient(0.5 * h);
    double diff = 0.0;
    for (int i = 0; i < prob.dim; ++i) diff += (coarse[i] - fine[i]) * (coarse[i] - fine[i]);
    CHECK(std::sqrt(diff) <= 5e-4 * (norm(fine) + 1e-12));
  }
}

TEST_CASE("landmark problems") {
  SUBCASE("coincident landmarks are rejected") {
    const std::vector<std::array<double, 2>> coincident{{0.0, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(
        landmark_problem(coincident, 1.0, {Vector{1.0, 0.0, 0.0, 0.0}}, Vector(4, 0.0)),
        error);
  }
  SUBCASE("seeded instances have a positive definite kernel and operator") {
    const ControlProblem prob = builtin_landmark_problem(3, 1.0, 2, 7);
    const SymMatrix k = prob.cometric(prob.x0);
    CHECK(sym_eigenvalues(k).front() > 0.0);
    const SymMatrix a = constraint_operator(prob, prob.x0);
    CHECK(sym_eigenvalues(a).front() > 0.0);
  }
  SUBCASE("kernel is translation invariant") {
    const ControlProblem prob = builtin_landmark_problem(3, 1.0, 2, 7);
    const SymMatrix at_x0 = prob.cometric(prob.x0);
    Vector shifted = prob.x0;
    for (int i = 0; i < prob.dim; i += 2) shifted[i] += 0.75;
    for (int i = 1; i < prob.dim; i += 2) shifted[i] -= 1.25;
    const SymMatrix at_shifted = prob.cometric(shifted);
    CHECK(frobenius_distance(at_x0, at_shifted) <= 1e-14);
  }
}

TEST_CASE("geodesic run configuration") {
  SUBCASE("parses a full document") {
    const GeodesicRunConfig cfg = GeodesicRunConfig::from_json(
        R"({"n_landmarks":4,"sigma":0.8,"constraints":3,"seed":11,"grid":80,
            "iterations":5,"step0":0.5,"mode":"exact"})");
    CHECK(cfg.n_landmarks == 4);
    CHECK(cfg.sigma == doctest::Approx(0.8));
    CHECK(cfg.n_constraints == 3);
    CHECK(cfg.seed == 11);
    CHECK(cfg.grid == 80);
    CHECK(cfg.iterations == 5);
    CHECK(cfg.step0 == doctest::Approx(0.5));
    CHECK(cfg.exact_mode);
  }
  SUBCASE("rejects unknown keys and bad modes") {
    CHECK_THROWS_AS(GeodesicRunConfig::from_json(R"({"landmarks":4})"), error);
    CHECK_THROWS_AS(GeodesicRunConfig::from_json(R"({"mode":"fast"})"), error);
    CHECK_THROWS_AS(GeodesicRunConfig::from_json("not json"), error);
  }
  SUBCASE("runs end to end and serializes deterministically") {
    GeodesicRunConfig cfg;
    cfg.n_landmarks = 2;
    cfg.n_constraints = 1;
    cfg.seed = 3;
    cfg.grid = 30;
    cfg.iterations = 3;
    const GeodesicRunResult a = run_geodesic(cfg);
    const GeodesicRunResult b = run_geodesic(cfg);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_json_string() == b.to_json_string());
    CHECK(a.outer.history.size() == 3);
  }
}
