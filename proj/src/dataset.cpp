#include "abduct/dataset.hpp"

#include "abduct/errors.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace abduct {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'M', 'B', '1'};

static_assert(std::endian::native == std::endian::little, "store I/O assumes a little-endian host");

std::string role_label(std::uint32_t index, EmbeddingRole role) {
  return "instance " + std::to_string(index) + " role " + std::string(role_name(role));
}

template <typename T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  bool can_read(std::size_t n) const { return data_.size() - pos_ >= n; }
  std::size_t remaining() const { return data_.size() - pos_; }

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_bytes(std::size_t n) {
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void get_floats(float* dst, std::size_t n) {
    std::memcpy(dst, data_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
  }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string require_text(const nlohmann::json& obj, const std::string& field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw DataError("missing field " + field + " at line " + std::to_string(line));
  }
  if (it->is_string()) {
    std::string s = it->get<std::string>();
    if (s.empty()) throw DataError("empty field " + field + " at line " + std::to_string(line));
    return s;
  }
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw DataError("field " + field + " is not a string at line " + std::to_string(line));
}

}  // namespace

std::string_view role_name(EmbeddingRole role) {
  switch (role) {
    case EmbeddingRole::ObsPair: return "OBS_PAIR";
    case EmbeddingRole::H1: return "H1";
    case EmbeddingRole::H2: return "H2";
    case EmbeddingRole::ObsH1: return "OBS_H1";
    case EmbeddingRole::ObsH2: return "OBS_H2";
  }
  return "UNKNOWN";
}

std::string_view kind_name(StoreKind kind) { return kind == StoreKind::Pooled ? "POOLED" : "TOKEN"; }

std::vector<AnliInstance> load_instances(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  const FieldMap& f = options.fields;
  std::vector<AnliInstance> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("malformed JSON at line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) throw DataError("expected a JSON object at line " + std::to_string(line_no));

    AnliInstance inst;
    inst.instance_id = require_text(obj, f.instance_id, line_no);
    inst.o1 = require_text(obj, f.obs1, line_no);
    inst.o2 = require_text(obj, f.obs2, line_no);
    inst.h1 = require_text(obj, f.hyp1, line_no);
    inst.h2 = require_text(obj, f.hyp2, line_no);
    if (!options.allow_duplicate_ids && !seen.insert(inst.instance_id).second) {
      throw DataError("duplicate instance id " + inst.instance_id + " at line " + std::to_string(line_no));
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<GoldLabel> load_labels(const std::filesystem::path& path, std::size_t n_expected) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<GoldLabel> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string token = line.substr(first, last - first + 1);
    if (token == "1") {
      labels.push_back(GoldLabel::H1);
    } else if (token == "2") {
      labels.push_back(GoldLabel::H2);
    } else {
      throw DataError("invalid label '" + token + "' at line " + std::to_string(line_no));
    }
  }
  if (labels.size() != n_expected) {
    throw DataError("label count mismatch: " + std::to_string(labels.size()) + " labels, expected " +
                    std::to_string(n_expected));
  }
  return labels;
}

std::string role_text(const AnliInstance& instance, EmbeddingRole role, std::string_view separator) {
  const std::string sep(separator);
  switch (role) {
    case EmbeddingRole::ObsPair: return instance.o1 + sep + instance.o2;
    case EmbeddingRole::H1: return instance.h1;
    case EmbeddingRole::H2: return instance.h2;
    case EmbeddingRole::ObsH1: return instance.o1 + sep + instance.o2 + sep + instance.h1;
    case EmbeddingRole::ObsH2: return instance.o1 + sep + instance.o2 + sep + instance.h2;
  }
  return {};
}

EmbeddingStore::EmbeddingStore(std::string model_id, int dim, StoreKind kind, std::string separator,
                               std::string created_by)
    : model_id_(std::move(model_id)),
      dim_(dim),
      kind_(kind),
      separator_(std::move(separator)),
      created_by_(std::move(created_by)) {
  if (dim_ < 1) throw DataError("embedding dimension must be >= 1, got " + std::to_string(dim_));
}

void EmbeddingStore::add(std::uint32_t index, EmbeddingRole role, TokenMatrix rows) {
  if (static_cast<std::uint8_t>(role) >= kRoleCount) throw DataError("invalid role tag");
  if (rows.cols() != dim_) {
    throw DataError(role_label(index, role) + ": dimension " + std::to_string(rows.cols()) +
                    " does not match store dimension " + std::to_string(dim_));
  }
  if (rows.rows() < 1) throw DataError(role_label(index, role) + ": empty token matrix");
  if (kind_ == StoreKind::Pooled && rows.rows() != 1) {
    throw DataError(role_label(index, role) + ": pooled store record must be a single vector");
  }
  if (!rows.allFinite()) throw DataError(role_label(index, role) + ": non-finite value");
  if (!records_.emplace(Key{index, role}, std::move(rows)).second) {
    throw DataError("duplicate record for " + role_label(index, role));
  }
}

bool EmbeddingStore::has(std::uint32_t index, EmbeddingRole role) const {
  return records_.count(Key{index, role}) != 0;
}

const TokenMatrix& EmbeddingStore::tokens(std::uint32_t index, EmbeddingRole role) const {
  auto it = records_.find(Key{index, role});
  if (it == records_.end()) throw DataError("missing " + role_label(index, role));
  return it->second;
}

Eigen::Map<const Vector> EmbeddingStore::vector(std::uint32_t index, EmbeddingRole role) const {
  if (kind_ != StoreKind::Pooled) throw DataError("vector access requires a POOLED store");
  const TokenMatrix& m = tokens(index, role);
  return Eigen::Map<const Vector>(m.data(), m.cols());
}

std::size_t EmbeddingStore::instance_count() const {
  std::size_t n = 0;
  std::optional<std::uint32_t> last;
  for (const auto& [key, _] : records_) {
    if (!last || *last != key.first) {
      ++n;
      last = key.first;
    }
  }
  return n;
}

bool identical(const EmbeddingStore& a, const EmbeddingStore& b) {
  if (a.model_id() != b.model_id() || a.dim() != b.dim() || a.kind() != b.kind() ||
      a.separator() != b.separator() || a.created_by() != b.created_by() || a.truncated() != b.truncated() ||
      a.record_count() != b.record_count()) {
    return false;
  }
  auto ia = a.records().begin();
  auto ib = b.records().begin();
  for (; ia != a.records().end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (ia->second.rows() != ib->second.rows() || ia->second.cols() != ib->second.cols()) return false;
    if (std::memcmp(ia->second.data(), ib->second.data(), sizeof(float) * ia->second.size()) != 0) return false;
  }
  return true;
}

void write_embedding_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  nlohmann::ordered_json header;
  header["model_id"] = store.model_id();
  header["dim"] = store.dim();
  header["kind"] = kind_name(store.kind());
  header["count"] = store.record_count();
  header["separator"] = store.separator();
  header["created_by"] = store.created_by();
  if (store.truncated()) header["truncated"] = *store.truncated();
  const std::string header_text = header.dump();

  std::string out;
  out.append(kMagic.data(), kMagic.size());
  put<std::uint16_t>(out, kStoreVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (const auto& [key, rows] : store.records()) {
    put<std::uint32_t>(out, key.first);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(key.second));
    if (store.kind() == StoreKind::Token) put<std::uint32_t>(out, static_cast<std::uint32_t>(rows.rows()));
    out.append(reinterpret_cast<const char*>(rows.data()), sizeof(float) * rows.size());
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed for " + path.string());
}

EmbeddingStore read_embedding_store(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  Reader r(data);

  if (!r.can_read(4) || r.get_bytes(4) != std::string(kMagic.data(), kMagic.size())) {
    throw StoreFormatError(StoreErrorKind::BadMagic, "bad magic in " + path.string());
  }
  if (!r.can_read(2)) throw StoreFormatError(StoreErrorKind::Truncated, "truncated header");
  const auto version = r.get<std::uint16_t>();
  if (version != kStoreVersion) {
    throw StoreFormatError(StoreErrorKind::UnsupportedVersion,
                           "unsupported store version " + std::to_string(version));
  }
  if (!r.can_read(4)) throw StoreFormatError(StoreErrorKind::Truncated, "truncated header");
  const auto header_len = r.get<std::uint32_t>();
  if (!r.can_read(header_len)) throw StoreFormatError(StoreErrorKind::Truncated, "truncated header");

  nlohmann::json header;
  std::string model_id, separator, created_by, kind_text;
  std::uint64_t count = 0;
  int dim = 0;
  std::optional<std::uint64_t> truncated;
  try {
    header = nlohmann::json::parse(r.get_bytes(header_len));
    model_id = header.at("model_id").get<std::string>();
    dim = header.at("dim").get<int>();
    kind_text = header.at("kind").get<std::string>();
    count = header.at("count").get<std::uint64_t>();
    separator = header.value("separator", std::string(" "));
    created_by = header.value("created_by", std::string());
    if (header.contains("truncated")) truncated = header.at("truncated").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw StoreFormatError(StoreErrorKind::BadHeader, std::string("bad store header: ") + e.what());
  }
  if (kind_text != "POOLED" && kind_text != "TOKEN") {
    throw StoreFormatError(StoreErrorKind::BadHeader, "bad store header: unknown kind " + kind_text);
  }
  if (dim < 1) throw StoreFormatError(StoreErrorKind::BadHeader, "bad store header: dim must be >= 1");
  const StoreKind kind = kind_text == "POOLED" ? StoreKind::Pooled : StoreKind::Token;

  EmbeddingStore store(model_id, dim, kind, separator, created_by);
  store.set_truncated(truncated);

  for (std::uint64_t k = 0; k < count; ++k) {
    const std::string where = "truncated record at index " + std::to_string(k);
    if (!r.can_read(5)) throw StoreFormatError(StoreErrorKind::Truncated, where);
    const auto index = r.get<std::uint32_t>();
    const auto tag = r.get<std::uint8_t>();
    if (tag >= kRoleCount) {
      throw StoreFormatError(StoreErrorKind::Invariant,
                             "invalid role tag " + std::to_string(tag) + " at record " + std::to_string(k));
    }
    const auto role = static_cast<EmbeddingRole>(tag);
    std::uint32_t n_tokens = 1;
    if (kind == StoreKind::Token) {
      if (!r.can_read(4)) throw StoreFormatError(StoreErrorKind::Truncated, where);
      n_tokens = r.get<std::uint32_t>();
      if (n_tokens == 0) {
        throw StoreFormatError(StoreErrorKind::Invariant, "zero-token record at index " + std::to_string(k));
      }
    }
    const std::uint64_t n_floats = std::uint64_t{n_tokens} * static_cast<std::uint64_t>(dim);
    if (r.remaining() / sizeof(float) < n_floats) throw StoreFormatError(StoreErrorKind::Truncated, where);
    TokenMatrix rows(n_tokens, dim);
    r.get_floats(rows.data(), n_floats);
    if (!rows.allFinite()) {
      throw StoreFormatError(StoreErrorKind::NonFinite, "non-finite value in record " + std::to_string(k) + " (" +
                                                            role_label(index, role) + ")");
    }
    if (store.has(index, role)) {
      throw StoreFormatError(StoreErrorKind::Invariant, "duplicate record for " + role_label(index, role));
    }
    store.add(index, role, std::move(rows));
  }
  if (r.remaining() != 0) {
    throw StoreFormatError(StoreErrorKind::CountMismatch, "header count " + std::to_string(count) +
                                                              " but " + std::to_string(r.remaining()) +
                                                              " trailing bytes follow the last record");
  }
  return store;
}

EmbeddingStore pool_store(const EmbeddingStore& token_store) {
  if (token_store.kind() != StoreKind::Token) throw DataError("pool_store expects a TOKEN store");
  EmbeddingStore pooled(token_store.model_id(), token_store.dim(), StoreKind::Pooled, token_store.separator(),
                        token_store.created_by());
  pooled.set_truncated(token_store.truncated());
  for (const auto& [key, rows] : token_store.records()) {
    pooled.add_vector(key.first, key.second, mean_pool(rows));
  }
  return pooled;
}

}  // namespace abduct
