#ifndef ABDUCT_DATASET_HPP
#define ABDUCT_DATASET_HPP

#include "abduct/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace abduct {

struct AnliInstance {
  std::string instance_id;
  std::string o1;
  std::string o2;
  std::string h1;
  std::string h2;
};

/// Which hypothesis is the answer. Also used for predictions.
enum class Choice : std::uint8_t { H1 = 0, H2 = 1 };
using GoldLabel = Choice;

inline Choice other(Choice c) { return c == Choice::H1 ? Choice::H2 : Choice::H1; }

/// Role tags are the on-disk byte values.
enum class EmbeddingRole : std::uint8_t { ObsPair = 0, H1 = 1, H2 = 2, ObsH1 = 3, ObsH2 = 4 };
inline constexpr int kRoleCount = 5;

std::string_view role_name(EmbeddingRole role);

enum class StoreKind { Pooled, Token };

std::string_view kind_name(StoreKind kind);

/// JSON field names used when reading instance files.
struct FieldMap {
  std::string instance_id = "story_id";
  std::string obs1 = "obs1";
  std::string obs2 = "obs2";
  std::string hyp1 = "hyp1";
  std::string hyp2 = "hyp2";
};

struct LoadOptions {
  FieldMap fields;
  // The ART training split repeats story ids across hypothesis pairs.
  bool allow_duplicate_ids = false;
};

std::vector<AnliInstance> load_instances(const std::filesystem::path& path, const LoadOptions& options = {});

/// One label per line, "1" or "2". Throws DataError when the count differs from n_expected.
std::vector<GoldLabel> load_labels(const std::filesystem::path& path, std::size_t n_expected);

/// Text an encoder sees for a role: sentences joined by `separator`.
std::string role_text(const AnliInstance& instance, EmbeddingRole role, std::string_view separator = " ");

/// Immutable-after-construction collection of embeddings for one encoder.
/// POOLED records are stored as 1 x dim matrices.
class EmbeddingStore {
 public:
  using Key = std::pair<std::uint32_t, EmbeddingRole>;

  EmbeddingStore(std::string model_id, int dim, StoreKind kind, std::string separator = " ",
                 std::string created_by = "abduct");

  const std::string& model_id() const { return model_id_; }
  int dim() const { return dim_; }
  StoreKind kind() const { return kind_; }
  const std::string& separator() const { return separator_; }
  const std::string& created_by() const { return created_by_; }
  std::optional<std::uint64_t> truncated() const { return truncated_; }
  void set_truncated(std::optional<std::uint64_t> n) { truncated_ = n; }

  /// Inserts a record; validates dimension, finiteness, and kind. Duplicate keys are rejected.
  void add(std::uint32_t index, EmbeddingRole role, TokenMatrix rows);
  template <typename Derived>
  void add_vector(std::uint32_t index, EmbeddingRole role, const Eigen::MatrixBase<Derived>& v) {
    add(index, role, TokenMatrix(v.template cast<float>().transpose()));
  }

  bool has(std::uint32_t index, EmbeddingRole role) const;
  const TokenMatrix& tokens(std::uint32_t index, EmbeddingRole role) const;
  /// Pooled record as a column vector. Throws DataError naming instance and role when absent.
  Eigen::Map<const Vector> vector(std::uint32_t index, EmbeddingRole role) const;

  std::size_t record_count() const { return records_.size(); }
  /// Number of distinct instance indices present.
  std::size_t instance_count() const;
  const std::map<Key, TokenMatrix>& records() const { return records_; }

 private:
  std::string model_id_;
  int dim_;
  StoreKind kind_;
  std::string separator_;
  std::string created_by_;
  std::optional<std::uint64_t> truncated_;
  std::map<Key, TokenMatrix> records_;
};

/// Bit-exact comparison of header fields and every float.
bool identical(const EmbeddingStore& a, const EmbeddingStore& b);

// Binary layout: "EMB1", u16 version, u32 header length, JSON header, then records
// (u32 instance index, u8 role, [u32 token count for TOKEN], dim x f32). Little-endian.
inline constexpr std::uint16_t kStoreVersion = 1;

void write_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore read_embedding_store(const std::filesystem::path& path);

/// Replaces each token matrix by its mean-pooled vector.
EmbeddingStore pool_store(const EmbeddingStore& token_store);

}  // namespace abduct

#endif  // ABDUCT_DATASET_HPP
