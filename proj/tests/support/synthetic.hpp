#ifndef ABDUCT_TESTS_SYNTHETIC_HPP
#define ABDUCT_TESTS_SYNTHETIC_HPP

// Synthetic embedding stores for tests. Observations cluster around a shared
// direction (real encoders are anisotropic); the correct hypothesis sits at a
// chosen angle from its observation, the wrong one is isotropic noise.

#include "abduct/dataset.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace abduct::testing {

inline Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = g(rng);
  return v;
}

inline Eigen::VectorXd unit_vector(std::mt19937_64& rng, int d) { return gaussian_vector(rng, d).normalized(); }

struct AngleStoreSpec {
  std::string model_id = "synthetic";
  int n = 200;
  int dim = 32;
  double theta = 1.0;          // radians between observation and correct hypothesis
  double noise = 0.1;          // isotropic noise added to each hypothesis (per-vector norm)
  double obs_spread = 0.6;     // spread of observations around the shared direction
  std::uint64_t seed = 1;
  std::uint64_t direction_seed = 7;  // shared by the train and dev splits of one model
};

struct LabeledStore {
  EmbeddingStore store;
  std::vector<GoldLabel> labels;
};

/// Store with all five roles for instances 0..n-1.
inline LabeledStore make_angle_store(const AngleStoreSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution coin(0.5);
  const int d = spec.dim;
  std::mt19937_64 dir_rng(spec.direction_seed);
  const Eigen::VectorXd mu = unit_vector(dir_rng, d);

  LabeledStore out{EmbeddingStore(spec.model_id, d, StoreKind::Pooled), {}};
  for (int i = 0; i < spec.n; ++i) {
    const Eigen::VectorXd o = (mu + spec.obs_spread * unit_vector(rng, d)).normalized();
    Eigen::VectorXd u = unit_vector(rng, d);
    u = (u - u.dot(o) * o).normalized();
    const Eigen::VectorXd correct =
        std::cos(spec.theta) * o + std::sin(spec.theta) * u + spec.noise * unit_vector(rng, d);
    const Eigen::VectorXd wrong = unit_vector(rng, d) + spec.noise * unit_vector(rng, d);

    const GoldLabel gold = coin(rng) ? GoldLabel::H1 : GoldLabel::H2;
    const Eigen::VectorXd& h1 = gold == GoldLabel::H1 ? correct : wrong;
    const Eigen::VectorXd& h2 = gold == GoldLabel::H1 ? wrong : correct;
    const auto idx = static_cast<std::uint32_t>(i);
    out.store.add_vector(idx, EmbeddingRole::ObsPair, o);
    out.store.add_vector(idx, EmbeddingRole::H1, h1);
    out.store.add_vector(idx, EmbeddingRole::H2, h2);
    out.store.add_vector(idx, EmbeddingRole::ObsH1, Eigen::VectorXd(0.5 * (o + h1)));
    out.store.add_vector(idx, EmbeddingRole::ObsH2, Eigen::VectorXd(0.5 * (o + h2)));
    out.labels.push_back(gold);
  }
  return out;
}

/// Plausible inputs drawn from N(+shift*e, I), implausible from N(-shift*e, I); e is a fixed unit
/// direction. Each instance holds one of each, in a random slot given by its label.
struct SeparableStore {
  LabeledStore data;
  Eigen::VectorXd direction;
};

inline SeparableStore make_separable_store(int n, int d, double shift, std::uint64_t seed,
                                           std::uint64_t direction_seed = 99) {
  std::mt19937_64 dir_rng(direction_seed);
  const Eigen::VectorXd e = unit_vector(dir_rng, d);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  SeparableStore out{{EmbeddingStore("separable", d, StoreKind::Pooled), {}}, e};
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd plausible = shift * e + gaussian_vector(rng, d);
    const Eigen::VectorXd implausible = -shift * e + gaussian_vector(rng, d);
    const GoldLabel gold = coin(rng) ? GoldLabel::H1 : GoldLabel::H2;
    const auto idx = static_cast<std::uint32_t>(i);
    out.data.store.add_vector(idx, EmbeddingRole::ObsH1, gold == GoldLabel::H1 ? plausible : implausible);
    out.data.store.add_vector(idx, EmbeddingRole::ObsH2, gold == GoldLabel::H1 ? implausible : plausible);
    out.data.labels.push_back(gold);
  }
  return out;
}

}  // namespace abduct::testing

#endif  // ABDUCT_TESTS_SYNTHETIC_HPP
