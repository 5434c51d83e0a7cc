#include "abduct/classifier.hpp"

#include "abduct/errors.hpp"
#include "abduct/random.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <numeric>

namespace abduct {

namespace {

// Separates the shuffling stream from the initialization stream for the same seed.
constexpr std::uint64_t kShuffleStream = 0x9e3779b97f4a7c15ULL;

void require_roles(const EmbeddingStore& store, std::span<const GoldLabel> labels) {
  if (store.kind() != StoreKind::Pooled) throw DataError("classification track requires a POOLED store");
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    for (auto role : {EmbeddingRole::ObsH1, EmbeddingRole::ObsH2}) {
      if (!store.has(i, role)) {
        throw DataError("instance " + std::to_string(i) + " is missing role " + std::string(role_name(role)));
      }
    }
  }
}

}  // namespace

HeadParams HeadParams::zeros(int d) {
  HeadParams h;
  h.weights = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, d);
  h.bias.setZero();
  return h;
}

void TrainConfig::validate() const {
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw DataError("learning rate must be a finite non-negative number");
  }
  if (!unrestricted_learning_rate && (learning_rate < kMinLearningRate || learning_rate > kMaxLearningRate)) {
    throw DataError("learning rate " + std::to_string(learning_rate) +
                    " is outside the validated range [1e-05, 9e-05]");
  }
  if (batch_size < 1) throw DataError("batch size must be >= 1");
  if (epochs < 1) throw DataError("epochs must be >= 1");
  if (!std::isfinite(weight_decay) || weight_decay < 0.0) throw DataError("weight decay must be >= 0");
}

HeadParams init_head(int d, std::uint64_t seed) {
  if (d < 1) throw std::domain_error("init_head: dimension must be >= 1");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  HeadParams h = HeadParams::zeros(d);
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < d; ++j) h.weights(k, j) = rng.uniform(-bound, bound);
  }
  return h;
}

LossAndGrad loss_and_grad(const HeadParams& head, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                          std::span<const Plausibility> labels) {
  const auto n = inputs.rows();
  if (n == 0) throw std::domain_error("loss_and_grad: empty batch");
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw std::domain_error("loss_and_grad: inputs and labels differ in length");
  }
  if (inputs.cols() != head.dim()) {
    throw std::domain_error("loss_and_grad: input dimension " + std::to_string(inputs.cols()) +
                            " does not match head dimension " + std::to_string(head.dim()));
  }

  const Eigen::MatrixXd logits = (inputs * head.weights.transpose()).rowwise() + head.bias.transpose();
  Eigen::MatrixXd delta(n, 2);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = static_cast<int>(labels[i]);
    total += log_sum_exp(logits.row(i).transpose()) - logits(i, y);
    delta.row(i) = softmax(logits.row(i).transpose()).transpose();
    delta(i, y) -= 1.0;
  }

  LossAndGrad out;
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss = total * inv_n;
  out.grad.weights = (delta.transpose() * inputs) * inv_n;
  out.grad.bias = delta.colwise().sum().transpose() * inv_n;
  return out;
}

void apply_step(HeadParams& head, const HeadParams& grad, double learning_rate, double weight_decay) {
  head.weights = head.weights * (1.0 - learning_rate * weight_decay) - learning_rate * grad.weights;
  head.bias -= learning_rate * grad.bias;
}

TrainedHead train_head(const EmbeddingStore& store, std::span<const GoldLabel> labels, const TrainConfig& cfg) {
  return train_head(store, labels, cfg, init_head(store.dim(), cfg.seed));
}

TrainedHead train_head(const EmbeddingStore& store, std::span<const GoldLabel> labels, const TrainConfig& cfg,
                       HeadParams initial) {
  cfg.validate();
  if (labels.empty()) throw DataError("no training labels");
  if (initial.dim() != store.dim()) {
    throw DataError("head dimension " + std::to_string(initial.dim()) + " does not match store dimension " +
                    std::to_string(store.dim()));
  }
  require_roles(store, labels);

  const auto start = std::chrono::steady_clock::now();

  const Eigen::Index n_examples = 2 * static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd inputs(n_examples, store.dim());
  std::vector<Plausibility> targets(n_examples);
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    inputs.row(2 * i) = store.vector(i, EmbeddingRole::ObsH1).cast<double>().transpose();
    inputs.row(2 * i + 1) = store.vector(i, EmbeddingRole::ObsH2).cast<double>().transpose();
    const bool first = labels[i] == GoldLabel::H1;
    targets[2 * i] = first ? Plausibility::Plausible : Plausibility::Implausible;
    targets[2 * i + 1] = first ? Plausibility::Implausible : Plausibility::Plausible;
  }

  TrainedHead out{std::move(initial), {}};
  Rng rng(cfg.seed ^ kShuffleStream);
  std::vector<Eigen::Index> order(n_examples);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  Eigen::MatrixXd batch;
  std::vector<Plausibility> batch_labels;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    double epoch_loss = 0.0;
    for (Eigen::Index begin = 0; begin < n_examples; begin += cfg.batch_size) {
      const Eigen::Index size = std::min<Eigen::Index>(cfg.batch_size, n_examples - begin);
      batch.resize(size, store.dim());
      batch_labels.resize(size);
      for (Eigen::Index r = 0; r < size; ++r) {
        batch.row(r) = inputs.row(order[begin + r]);
        batch_labels[r] = targets[order[begin + r]];
      }
      const LossAndGrad lg = loss_and_grad(out.head, batch, batch_labels);
      epoch_loss += lg.loss * static_cast<double>(size);
      apply_step(out.head, lg.grad, cfg.learning_rate, cfg.weight_decay);
    }
    out.history.epoch_losses.push_back(epoch_loss / static_cast<double>(n_examples));
  }
  out.history.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

TrackResult evaluate_clf(const HeadParams& head, const EmbeddingStore& store, std::span<const GoldLabel> labels,
                         bool keep_predictions) {
  if (head.dim() != store.dim()) {
    throw DataError("head dimension " + std::to_string(head.dim()) + " does not match store dimension " +
                    std::to_string(store.dim()));
  }
  require_roles(store, labels);

  TrackResult result;
  result.n = labels.size();
  if (keep_predictions) result.per_instance.reserve(labels.size());
  const auto start = std::chrono::steady_clock::now();
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    const Choice c =
        predict_clf(head, store.vector(i, EmbeddingRole::ObsH1), store.vector(i, EmbeddingRole::ObsH2));
    if (c == labels[i]) ++result.correct;
    if (keep_predictions) result.per_instance.push_back(c);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.accuracy = result.n == 0 ? 0.0 : static_cast<double>(result.correct) / static_cast<double>(result.n);
  return result;
}

std::string head_to_json(const HeadFile& file) {
  nlohmann::ordered_json j;
  j["model_id"] = file.model_id;
  j["d"] = file.head.dim();
  std::vector<double> w;
  w.reserve(2 * file.head.dim());
  for (int k = 0; k < 2; ++k) {
    for (int c = 0; c < file.head.dim(); ++c) w.push_back(file.head.weights(k, c));
  }
  j["W"] = w;
  j["b"] = {file.head.bias(0), file.head.bias(1)};
  nlohmann::ordered_json cfg;
  cfg["learning_rate"] = file.config.learning_rate;
  cfg["batch_size"] = file.config.batch_size;
  cfg["epochs"] = file.config.epochs;
  cfg["weight_decay"] = file.config.weight_decay;
  cfg["seed"] = file.config.seed;
  j["train_config"] = cfg;
  j["epoch_losses"] = file.epoch_losses;
  return j.dump(2) + "\n";
}

HeadFile head_from_json(const std::string& text) {
  HeadFile f;
  try {
    const auto j = nlohmann::json::parse(text);
    f.model_id = j.at("model_id").get<std::string>();
    const int d = j.at("d").get<int>();
    if (d < 1) throw DataError("head file: d must be >= 1");
    const auto w = j.at("W").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<double>>();
    if (w.size() != 2 * static_cast<std::size_t>(d) || b.size() != 2) {
      throw DataError("head file: W must hold 2*d values and b 2 values");
    }
    f.head = HeadParams::zeros(d);
    for (int k = 0; k < 2; ++k) {
      for (int c = 0; c < d; ++c) f.head.weights(k, c) = w[static_cast<std::size_t>(k) * d + c];
    }
    f.head.bias << b[0], b[1];
    if (!f.head.weights.allFinite() || !f.head.bias.allFinite()) throw DataError("head file: non-finite value");
    const auto& cfg = j.at("train_config");
    f.config.learning_rate = cfg.at("learning_rate").get<double>();
    f.config.batch_size = cfg.at("batch_size").get<int>();
    f.config.epochs = cfg.at("epochs").get<int>();
    f.config.weight_decay = cfg.at("weight_decay").get<double>();
    f.config.seed = cfg.at("seed").get<std::uint64_t>();
    f.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed head file: ") + e.what());
  }
  return f;
}

}  // namespace abduct
