#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>

#include "sr1track/experiments.hpp"
#include "sr1track/runs.hpp"
#include "sr1track/tracker.hpp"
#include "test_support.hpp"

using namespace sr1;
using testutil::sym_from;

namespace {

std::shared_ptr<PerturbedProvider> sample_provider(int d, double lambda, uint64_t seed) {
  SeededRng rng = SeededRng::derived(seed, 0);
  SymMatrix a_star = random_symmetric_gaussian(d, rng);
  return std::make_shared<PerturbedProvider>(std::move(a_star), lambda, rng.next_u64());
}

}  // namespace

TEST_CASE("eta profile") {
  SUBCASE("constant sequences have zero drift") {
    const SymMatrix a = sym_from({{2, 1}, {1, 3}});
    const EtaProfile eta(ConstantProvider(a), 6);
    for (int k = 0; k <= 6; ++k)
      for (int l = k; l <= 6; ++l) CHECK(eta.eta(k, l) == 0.0);
  }
  SUBCASE("scalar geometric sequence") {
    const auto provider = [](int k) {
      SymMatrix m(1);
      m.set(0, 0, 1.0 - std::pow(2.0, -k));
      return m;
    };
    const EtaProfile eta(provider, 10);
    for (int l = 1; l <= 10; ++l)
      CHECK(eta.eta(0, l) == doctest::Approx(1.0 - std::pow(2.0, -l)));
    CHECK(eta.eta_star_finite(0) == doctest::Approx(1.0 - std::pow(2.0, -10)));
  }
  SUBCASE("two-step jump") {
    const auto provider = [](int k) {
      return k == 0 ? SymMatrix(2) : SymMatrix::identity(2);
    };
    const EtaProfile eta(provider, 1);
    CHECK(eta.eta(0, 1) == doctest::Approx(1.0));
    CHECK(eta.eta(0, 0) == 0.0);
  }
}

TEST_CASE("cyclic_direction") {
  CHECK(cyclic_direction(0, 3) == unit_vector(3, 0));
  CHECK(cyclic_direction(3, 3) == unit_vector(3, 0));
  CHECK(cyclic_direction(5, 3) == unit_vector(3, 2));
}

TEST_CASE("tracking a constant sequence terminates in d steps") {
  SeededRng rng(50);
  const int d = 7;
  const SymMatrix a = random_symmetric_gaussian(d, rng);
  auto oracle = cyclic_oracle(std::make_shared<ConstantProvider>(a));
  TrackOptions options;
  options.steps = d;
  const TrackReport report = track(*oracle, options);
  CHECK(report.skipped == 0);
  CHECK(report.final_dist_fro <= 1e-10 * (1.0 + frobenius_norm(a)));
}

TEST_CASE("scalar secant in one step") {
  SymMatrix a(1);
  a.set(0, 0, 2.0);
  auto oracle = cyclic_oracle(std::make_shared<ConstantProvider>(a));
  TrackOptions options;
  options.steps = 1;
  const TrackReport report = track(*oracle, options);
  CHECK(report.final_matrix(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("perturbed sequence run lands at the expected order of magnitude") {
  auto oracle = cyclic_oracle(sample_provider(10, 0.5, 42));
  TrackOptions options;
  options.steps = 20;
  const TrackReport report = track(*oracle, options);
  CHECK(report.final_dist_fro > 1e-6);
  CHECK(report.final_dist_fro < 1e-1);
}

TEST_CASE("inverse oracle") {
  SUBCASE("diagonal limit inverts in d steps") {
    auto oracle = inverse_oracle(
        std::make_shared<ConstantProvider>(sym_from({{2, 0}, {0, 4}})));
    Sr1State state(2);
    for (int k = 0; k < 2; ++k) {
      const Sample sample = oracle->sample(k);
      state.update(sample.s, sample.y);
    }
    CHECK(state.matrix()(0, 0) == doctest::Approx(0.5));
    CHECK(state.matrix()(1, 1) == doctest::Approx(0.25));
    CHECK(state.matrix()(0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("identity limit never needs an update") {
    auto oracle = inverse_oracle(
        std::make_shared<ConstantProvider>(SymMatrix::identity(3)));
    TrackOptions options;
    options.steps = 6;
    const TrackReport report = track(*oracle, options);
    CHECK(report.applied == 0);
    CHECK(report.noops == 6);
    CHECK(report.final_dist_fro <= 1e-14);
  }
  SUBCASE("singular matrices are reported when forming the reference") {
    auto oracle = inverse_oracle(std::make_shared<ConstantProvider>(SymMatrix(2)));
    CHECK_THROWS_AS(oracle->reference_limit(), error);
  }
  SUBCASE("seeded inverse run converges") {
    auto oracle = inverse_oracle(sample_provider(10, 0.5, 4242));
    TrackOptions options;
    options.steps = 50;
    const TrackReport report = track(*oracle, options);
    CHECK(report.final_dist_fro < 1e-3);
  }
}

TEST_CASE("random-direction oracle") {
  SUBCASE("identity limit stays put") {
    auto oracle = random_direction_oracle(
        std::make_shared<ConstantProvider>(SymMatrix::identity(2)), 9);
    TrackOptions options;
    options.steps = 5;
    const TrackReport report = track(*oracle, options);
    CHECK(report.applied == 0);
    CHECK(report.final_dist_fro <= 1e-14);
  }
  SUBCASE("identical seeds give byte-identical reports") {
    TrackOptions options;
    options.steps = 30;
    auto first = random_direction_oracle(sample_provider(6, 0.5, 77), 123);
    auto second = random_direction_oracle(sample_provider(6, 0.5, 77), 123);
    const TrackReport a = track(*first, options);
    const TrackReport b = track(*second, options);
    CHECK(a.to_json_string() == b.to_json_string());
    CHECK(a.to_csv() == b.to_csv());
  }
}

TEST_CASE("secant oracle") {
  SUBCASE("quadratic with cycling coordinate steps recovers the Hessian") {
    const SymMatrix q = sym_from({{1, 0}, {0, 3}});
    std::vector<Vector> iterates{{0, 0}, {1, 0}, {1, 1}};
    auto oracle = quadratic_secant_oracle(q, iterates);
    Sr1State state(2);
    for (int k = 0; k < 2; ++k) {
      const Sample sample = oracle->sample(k);
      state.update(sample.s, sample.y);
    }
    CHECK(frobenius_distance(state.matrix(), q) <= 1e-12);
  }
  SUBCASE("linear objective drives B to the zero map on visited directions") {
    auto grad = [](const Vector&) { return Vector{1.0, -2.0}; };
    std::vector<Vector> iterates{{0, 0}, {1, 0}, {1, 1}};
    auto oracle = secant_oracle(grad, iterates);
    Sr1State state(2);
    for (int k = 0; k < 2; ++k) {
      const Sample sample = oracle->sample(k);
      state.update(sample.s, sample.y);
      const Vector image = state.matrix().apply(sample.s);
      CHECK(norm(image) <= 1e-12);
    }
  }
  SUBCASE("coincident iterates are rejected") {
    auto grad = [](const Vector& x) { return x; };
    std::vector<Vector> iterates{{1.0, 1.0}, {1.0, 1.0}};
    auto oracle = secant_oracle(grad, iterates);
    CHECK_THROWS_AS(oracle->sample(0), error);
  }
  SUBCASE("descent on a curved valley keeps the secant condition") {
    auto grad = [](const Vector& x) {
      // Rosenbrock gradient at desk scale
      return Vector{-2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]),
                    200.0 * (x[1] - x[0] * x[0])};
    };
    std::vector<Vector> iterates;
    Vector x{-0.5, 0.5};
    iterates.push_back(x);
    for (int k = 0; k < 15; ++k) {
      const Vector g = grad(x);
      for (int i = 0; i < 2; ++i) x[i] -= 1e-3 * g[i];
      iterates.push_back(x);
    }
    auto oracle = secant_oracle(grad, iterates);
    Sr1State state(2);
    for (int k = 0; k < 15; ++k) {
      const Sample sample = oracle->sample(k);
      const UpdateOutcome outcome = state.update(sample.s, sample.y);
      if (outcome.status != UpdateStatus::applied) continue;
      const Vector bs = state.matrix().apply(sample.s);
      double resid = 0.0;
      for (int i = 0; i < 2; ++i) resid += (bs[i] - sample.y[i]) * (bs[i] - sample.y[i]);
      CHECK(std::sqrt(resid) <= 1e-10 * (1.0 + norm(sample.y)));
    }
  }
}

TEST_CASE("oracle samples are consistent with their reference matrices") {
  auto direct = cyclic_oracle(sample_provider(7, 0.5, 12));
  auto inv = inverse_oracle(sample_provider(7, 0.5, 12));
  for (SequenceOracle* oracle : {direct.get(), inv.get()}) {
    for (int k : {0, 3, 11}) {
      const Sample sample = oracle->sample(k);
      const SymMatrix ref = oracle->reference_matrix(k);
      const Vector expected = ref.apply(sample.s);
      double err = 0.0;
      for (std::size_t i = 0; i < expected.size(); ++i)
        err += (expected[i] - sample.y[i]) * (expected[i] - sample.y[i]);
      CHECK(std::sqrt(err) <= 1e-10 * (1.0 + operator_norm(ref)) * norm(sample.s));
    }
  }
}

TEST_CASE("non-finite inputs are rejected") {
  Sr1State state(2);
  CHECK_THROWS_AS(
      state.update({std::numeric_limits<double>::infinity(), 0.0}, {1.0, 0.0}), error);
  CHECK_THROWS_AS(
      state.update({1.0, 0.0}, {std::numeric_limits<double>::quiet_NaN(), 0.0}), error);
}

TEST_CASE("bound monitoring on seeded runs") {
  for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    auto oracle = cyclic_oracle(sample_provider(10, 0.5, seed));
    TrackOptions options;
    options.steps = 40;
    const TrackReport report = track(*oracle, options);
    REQUIRE(!report.aborted);
    CHECK(report.skipped == 0);
    CHECK(report.bounds_in_scope);
    CHECK(report.eta_tail_sound);
    CHECK(report.beta_hat == doctest::Approx(1.0));
    CHECK(report.drift_checks == 40 * 41 / 2);
    CHECK(report.drift_violations == 0);
    CHECK(report.limit_checks.size() > 0);
    CHECK(report.limit_violations == 0);
  }
}

TEST_CASE("qn demo run satisfies the finite-termination contract") {
  QnDemoConfig config;
  config.dim = 6;
  config.steps = 6;
  const TrackReport report = run_qn_demo(config);
  // the first coordinate already satisfies the secant (Q(0,0) = 1), so it
  // records a no-op; interpolation still covers every direction
  CHECK(report.applied == 5);
  CHECK(report.noops == 1);
  CHECK(report.final_dist_fro <= 1e-9);
  CHECK(report.drift_violations == 0);
}

TEST_CASE("aborted oracle leaves a partial report") {
  auto grad = [](const Vector& x) { return x; };
  std::vector<Vector> iterates{{0.0, 0.0}, {1.0, 0.0}};  // only one usable step
  auto oracle = secant_oracle(grad, iterates);
  TrackOptions options;
  options.steps = 5;
  const TrackReport report = track(*oracle, options);
  CHECK(report.aborted);
  CHECK(report.step_records.size() == 1);
  CHECK(!report.abort_reason.empty());
}

TEST_CASE("run_track matches trial zero of the table stream") {
  TrackRunConfig config;
  config.dim = 8;
  config.lambda = 0.5;
  config.steps = 25;
  config.seed = 99;
  const TrackReport a = run_track(config);
  const TrackReport b = run_track(config);
  CHECK(a.to_json_string() == b.to_json_string());
  CHECK(a.final_dist_fro < 1e-2);

  Table1Config table_config;
  table_config.dim = 8;
  table_config.lambdas = {0.5};
  table_config.steps = {25};
  table_config.trials = 1;
  table_config.base_seed = 99;
  const TableResult table = table1(table_config);
  CHECK(a.final_dist_fro == table.cell("0.5", 25).trial_values[0]);
}
