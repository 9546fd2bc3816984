#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sr1track/sr1.hpp"

namespace sr1 {

/// Constrained control problem: velocities are K_x u, trajectories must stay
/// in ker(C), and the terminal cost g is minimized over the initial momentum.
struct ControlProblem {
  int dim = 0;            // state dimension d
  int n_constraints = 0;  // l (0 means unconstrained)
  std::function<SymMatrix(const Vector&)> cometric;       // K_x, PSD
  std::vector<Vector> constraint_rows;                    // C, l rows of length d
  std::function<double(const Vector&)> cost;              // g
  std::function<Vector(const Vector&)> cost_gradient;     // grad g
  Vector x0;
};

/// Validates dimensions and C x0 = 0 (within 1e-10 * (1+|x0|)).
void validate_problem(const ControlProblem& prob);

struct TimeGrid {
  explicit TimeGrid(int n_steps);
  int n_steps;  // N >= 2; nodes t_i = i/N for i = 0..N
  double dt() const { return 1.0 / n_steps; }
};

/// One rank-one inverse approximation per grid node.
using BFamily = std::vector<Sr1State>;

BFamily initial_b_family(const TimeGrid& grid, int n_constraints);

/// A_x = C K_x C^T, assembled directly into symmetric storage.
SymMatrix constraint_operator(const ControlProblem& prob, const Vector& x);

/// Applies an approximation of A_x^{-1} to an l-vector; exact mode solves
/// with the operator at the current state, family mode applies B(t_node).
using AinvApply = std::function<Vector(const Vector& x, const Vector& rhs)>;

AinvApply exact_ainv(const ControlProblem& prob);
AinvApply family_ainv(const Sr1State& node_state);

struct StateDerivative {
  Vector x_dot;
  Vector p_dot;
};

/// Hamiltonian right-hand side. The projected momentum
/// q = p - C^T A^{-1} C K_x p is computed once; p_dot is the negative half
/// x-gradient of q^T K_x q with q frozen, by central differences with step
/// 1e-5 * (1 + |x|).
StateDerivative projected_rhs(const ControlProblem& prob, const Vector& x, const Vector& p,
                              const AinvApply& ainv);

struct Trajectory {
  std::vector<Vector> x;  // N+1 nodes
  std::vector<Vector> p;
};

struct ShootResult {
  Trajectory trajectory;
  double cost = 0.0;
};

/// RK4 integration over the grid; family == nullptr selects exact solves.
/// In family mode each step freezes the node's approximation across its
/// stage evaluations. Throws errc::infeasible when A_x stops being positive
/// definite at a node.
ShootResult shoot(const ControlProblem& prob, const Vector& p0, const TimeGrid& grid,
                  const BFamily* family);

/// One rank-one update per node toward A_{x(t)}^{-1}, all nodes probing the
/// same canonical direction e_{outer_index mod l}.
void update_b_family(BFamily& family, const ControlProblem& prob, const Trajectory& trajectory,
                     int outer_index, const SkipPolicy& policy = {});

/// max over nodes of ||B(t) A_{x(t)} - I||_F.
double family_inverse_residual(const BFamily& family, const ControlProblem& prob,
                               const Trajectory& trajectory);

struct OuterHistoryRow {
  int iter = 0;
  double cost = 0.0;       // after this iteration's step
  double grad_norm = 0.0;  // at the iteration start
  double max_binv_residual = 0.0;
  double step = 0.0;  // 0 marks a stalled line search
};

struct OuterOptions {
  int iterations = 20;
  double step0 = 1.0;
  SkipPolicy policy{};
  bool exact_mode = false;  // solve exactly instead of applying the family
  double armijo_c = 1e-4;
  int max_halvings = 40;
};

struct OuterResult {
  Vector p0;
  std::vector<OuterHistoryRow> history;
  double initial_cost = 0.0;
  int stalls = 0;
  BFamily family;
  Trajectory final_trajectory;
};

/// Gradient descent over the initial momentum: finite-difference gradient of
/// the shooting cost (probes reuse the frozen family), Armijo backtracking,
/// then a family update along the accepted trajectory. A stalled line search
/// is recorded with step 0 and the family still updates, so the inverse
/// approximations keep converging once the momentum settles.
OuterResult outer_minimize(const ControlProblem& prob, const TimeGrid& grid,
                           const OuterOptions& options);

/// Planar landmark problem: Gaussian-kernel co-metric blocks
/// exp(-|q_i - q_j|^2 / sigma^2) I_2, explicit positions and constraint rows.
/// Rejects coincident landmarks (kernel would lose definiteness headroom).
ControlProblem landmark_problem(const std::vector<std::array<double, 2>>& positions,
                                double sigma, std::vector<Vector> constraint_rows,
                                const Vector& target);

/// Seeded instance: random positions, random full-row-rank C (reseeded up to
/// 10 times), x0 and target projected into ker(C), g(x) = 0.5 |x - target|^2.
ControlProblem builtin_landmark_problem(int n_landmarks, double sigma, int n_constraints,
                                        uint64_t seed);

struct GeodesicRunConfig {
  int n_landmarks = 3;
  double sigma = 1.0;
  int n_constraints = 2;
  uint64_t seed = 1;
  int grid = 100;
  int iterations = 20;
  double step0 = 1.0;
  bool exact_mode = false;
  SkipPolicy policy{};

  static GeodesicRunConfig from_json(const std::string& text);
};

struct GeodesicRunResult {
  GeodesicRunConfig config;
  OuterResult outer;
  double final_cost = 0.0;
  double final_grad_norm = 0.0;
  double final_max_binv_residual = 0.0;

  std::string to_csv() const;  // iter,cost,grad_norm,max_binv_residual,step
  std::string to_json_string() const;
};

GeodesicRunResult run_geodesic(const GeodesicRunConfig& config);

}  // namespace sr1
