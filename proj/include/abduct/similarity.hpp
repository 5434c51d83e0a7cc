#ifndef ABDUCT_SIMILARITY_HPP
#define ABDUCT_SIMILARITY_HPP

#include "abduct/dataset.hpp"
#include "abduct/tensor.hpp"

#include <span>
#include <string>
#include <vector>

namespace abduct {

struct SimPrediction {
  Choice choice = Choice::H1;
  double score_h1 = 0.0;
  double score_h2 = 0.0;
};

/// Accuracy of one track on one split.
struct TrackResult {
  double accuracy = 0.0;  // fraction in [0, 1]
  std::size_t n = 0;
  std::size_t correct = 0;
  double wall_seconds = 0.0;
  std::vector<Choice> per_instance;  // filled only on request
};

/// Picks the hypothesis with the larger cosine to the observations; ties go to H1.
template <typename DO, typename D1, typename D2>
SimPrediction predict_sim(const Eigen::MatrixBase<DO>& obs, const Eigen::MatrixBase<D1>& h1,
                          const Eigen::MatrixBase<D2>& h2) {
  SimPrediction p;
  p.score_h1 = cosine(obs, h1);
  p.score_h2 = cosine(obs, h2);
  p.choice = p.score_h1 >= p.score_h2 ? Choice::H1 : Choice::H2;
  return p;
}

/// Scores instances 0..labels.size()-1 of a POOLED store. Timing covers the scoring loop only.
TrackResult evaluate_sim(const EmbeddingStore& store, std::span<const GoldLabel> labels,
                         bool keep_predictions = false);

/// {model_id, track, accuracy, n, wall_seconds} as a single JSON object.
std::string track_result_json(const std::string& model_id, const std::string& track, const TrackResult& result);

}  // namespace abduct

#endif  // ABDUCT_SIMILARITY_HPP
