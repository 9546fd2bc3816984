#include "sr1track/oracles.hpp"

#include <utility>

#include "sr1track/rng.hpp"

namespace sr1 {

Vector cyclic_direction(int k, int dim) {
  if (dim < 1) fail(errc::invalid_argument, "cyclic_direction: dimension must be >= 1");
  if (k < 0) fail(errc::invalid_argument, "cyclic_direction: negative index");
  return unit_vector(dim, k % dim);
}

namespace {

class ShiftedProvider : public MatrixProvider {
public:
  ShiftedProvider(std::shared_ptr<const MatrixProvider> inner, int offset)
      : inner_(std::move(inner)), offset_(offset) {
    if (offset < 0) fail(errc::invalid_argument, "shifted_provider: negative offset");
  }
  int dim() const override { return inner_->dim(); }
  SymMatrix matrix(int k) const override { return inner_->matrix(k + offset_); }
  SymMatrix limit() const override { return inner_->limit(); }
  bool has_tail_bound() const override { return inner_->has_tail_bound(); }
  double tail_bound(int k) const override { return inner_->tail_bound(k + offset_); }

private:
  std::shared_ptr<const MatrixProvider> inner_;
  int offset_;
};

class DirectOracle : public SequenceOracle {
public:
  DirectOracle(std::shared_ptr<const MatrixProvider> provider,
               std::function<Vector(int)> direction_fn)
      : provider_(std::move(provider)), direction_fn_(std::move(direction_fn)) {}

  int dim() const override { return provider_->dim(); }

  Sample sample(int k) override {
    Vector s = direction_fn_(k);
    Vector y = provider_->matrix(k).apply(s);
    return {std::move(s), std::move(y)};
  }

  bool has_reference() const override { return true; }
  SymMatrix reference_matrix(int k) const override { return provider_->matrix(k); }
  SymMatrix reference_limit() const override { return provider_->limit(); }
  bool has_tail_bound() const override { return provider_->has_tail_bound(); }
  double tail_bound(int k) const override { return provider_->tail_bound(k); }

private:
  std::shared_ptr<const MatrixProvider> provider_;
  std::function<Vector(int)> direction_fn_;
};

// Tracks the inverse of the provider's limit: y is the chosen probe vector,
// s = A_k y, so y = A_k^{-1} s.
class InverseOracle : public SequenceOracle {
public:
  InverseOracle(std::shared_ptr<const MatrixProvider> provider,
                std::function<Vector(int)> probe_fn)
      : provider_(std::move(provider)), probe_fn_(std::move(probe_fn)) {}

  int dim() const override { return provider_->dim(); }

  Sample sample(int k) override {
    Vector y = probe_fn_(k);
    Vector s = provider_->matrix(k).apply(y);
    return {std::move(s), std::move(y)};
  }

  bool has_reference() const override { return true; }
  SymMatrix reference_matrix(int k) const override {
    return sym_inverse(provider_->matrix(k));
  }
  SymMatrix reference_limit() const override { return sym_inverse(provider_->limit()); }

private:
  std::shared_ptr<const MatrixProvider> provider_;
  std::function<Vector(int)> probe_fn_;
};

class SecantOracle : public SequenceOracle {
public:
  SecantOracle(std::function<Vector(const Vector&)> grad, std::vector<Vector> iterates)
      : grad_(std::move(grad)), iterates_(std::move(iterates)) {
    if (iterates_.size() < 2)
      fail(errc::invalid_argument, "secant_oracle: need at least two iterates");
  }

  int dim() const override { return static_cast<int>(iterates_.front().size()); }

  Sample sample(int k) override {
    if (k + 1 >= static_cast<int>(iterates_.size()))
      fail(errc::invalid_argument, "secant_oracle: iterate stream exhausted");
    const Vector& a = iterates_[k];
    const Vector& b = iterates_[k + 1];
    Vector s(dim());
    for (int i = 0; i < dim(); ++i) s[i] = b[i] - a[i];
    if (!(norm(s) > 1e-300))
      fail(errc::degenerate_direction, "secant_oracle: coincident iterates");
    const Vector ga = grad_(a);
    const Vector gb = grad_(b);
    Vector y(dim());
    for (int i = 0; i < dim(); ++i) y[i] = gb[i] - ga[i];
    return {std::move(s), std::move(y)};
  }

private:
  std::function<Vector(const Vector&)> grad_;
  std::vector<Vector> iterates_;
};

class QuadraticSecantOracle : public SecantOracle {
public:
  QuadraticSecantOracle(SymMatrix q, std::vector<Vector> iterates)
      : SecantOracle([q](const Vector& x) { return q.apply(x); }, std::move(iterates)),
        q_(std::move(q)) {}

  bool has_reference() const override { return true; }
  SymMatrix reference_matrix(int) const override { return q_; }
  SymMatrix reference_limit() const override { return q_; }
  bool has_tail_bound() const override { return true; }
  double tail_bound(int) const override { return 0.0; }  // constant sequence

private:
  SymMatrix q_;
};

}  // namespace

std::shared_ptr<const MatrixProvider> shifted_provider(
    std::shared_ptr<const MatrixProvider> inner, int offset) {
  return std::make_shared<ShiftedProvider>(std::move(inner), offset);
}

std::unique_ptr<SequenceOracle> direct_oracle(std::shared_ptr<const MatrixProvider> provider,
                                              std::function<Vector(int)> direction_fn) {
  return std::make_unique<DirectOracle>(std::move(provider), std::move(direction_fn));
}

std::unique_ptr<SequenceOracle> cyclic_oracle(std::shared_ptr<const MatrixProvider> provider) {
  const int d = provider->dim();
  return direct_oracle(std::move(provider), [d](int k) { return cyclic_direction(k, d); });
}

std::unique_ptr<SequenceOracle> inverse_oracle(std::shared_ptr<const MatrixProvider> provider) {
  const int d = provider->dim();
  return std::make_unique<InverseOracle>(std::move(provider),
                                         [d](int k) { return cyclic_direction(k, d); });
}

std::unique_ptr<SequenceOracle> random_direction_oracle(
    std::shared_ptr<const MatrixProvider> provider, uint64_t seed) {
  const int d = provider->dim();
  auto probe = [d, seed](int k) {
    SeededRng rng = SeededRng::derived(seed, static_cast<uint64_t>(k));
    Vector y(d);
    for (int i = 0; i < d; ++i) y[i] = rng.next_gaussian();
    return y;
  };
  return std::make_unique<InverseOracle>(std::move(provider), std::move(probe));
}

std::unique_ptr<SequenceOracle> secant_oracle(std::function<Vector(const Vector&)> grad,
                                              std::vector<Vector> iterates) {
  return std::make_unique<SecantOracle>(std::move(grad), std::move(iterates));
}

std::unique_ptr<SequenceOracle> quadratic_secant_oracle(SymMatrix q,
                                                        std::vector<Vector> iterates) {
  return std::make_unique<QuadraticSecantOracle>(std::move(q), std::move(iterates));
}

}  // namespace sr1
