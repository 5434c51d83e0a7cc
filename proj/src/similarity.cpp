#include "abduct/similarity.hpp"

#include "abduct/errors.hpp"

#include <json.hpp>

#include <chrono>

namespace abduct {

TrackResult evaluate_sim(const EmbeddingStore& store, std::span<const GoldLabel> labels, bool keep_predictions) {
  if (store.kind() != StoreKind::Pooled) throw DataError("similarity track requires a POOLED store");
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    for (auto role : {EmbeddingRole::ObsPair, EmbeddingRole::H1, EmbeddingRole::H2}) {
      if (!store.has(i, role)) {
        throw DataError("instance " + std::to_string(i) + " is missing role " + std::string(role_name(role)));
      }
    }
  }

  TrackResult result;
  result.n = labels.size();
  if (keep_predictions) result.per_instance.reserve(labels.size());

  const auto start = std::chrono::steady_clock::now();
  for (std::uint32_t i = 0; i < labels.size(); ++i) {
    const SimPrediction p = predict_sim(store.vector(i, EmbeddingRole::ObsPair), store.vector(i, EmbeddingRole::H1),
                                        store.vector(i, EmbeddingRole::H2));
    if (p.choice == labels[i]) ++result.correct;
    if (keep_predictions) result.per_instance.push_back(p.choice);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.accuracy = result.n == 0 ? 0.0 : static_cast<double>(result.correct) / static_cast<double>(result.n);
  return result;
}

std::string track_result_json(const std::string& model_id, const std::string& track, const TrackResult& result) {
  nlohmann::ordered_json j;
  j["model_id"] = model_id;
  j["track"] = track;
  j["accuracy"] = result.accuracy;
  j["n"] = result.n;
  j["wall_seconds"] = result.wall_seconds;
  return j.dump(2) + "\n";
}

}  // namespace abduct
