#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citemetrics/corpus.hpp"

namespace citemetrics {

/// Externally produced embedding vectors keyed by string (paper id or field
/// label). Read-only after load.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension);

  /// Throws DataError on dimension mismatch, duplicate key or zero vector.
  void add(std::string key, std::span<const double> values);

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return keys_.size(); }
  bool contains(std::string_view key) const;
  /// Empty span when absent.
  std::span<const double> vector(std::string_view key) const;
  double norm(std::string_view key) const;

  /// Header `dim=<D>`, then `key,v1,...,vD` per line.
  static EmbeddingStore read_csv(std::istream& in, const std::string& name = "<stream>");
  /// u32 dim, then per row: u32 key length, key bytes, D little-endian float32.
  static EmbeddingStore read_binary(std::istream& in, const std::string& name = "<stream>");
  /// Chooses the format by sniffing for the `dim=` header.
  static EmbeddingStore load(const std::filesystem::path& path);

  void write_csv(std::ostream& out) const;
  void write_binary(std::ostream& out) const;

 private:
  std::size_t dim_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
  std::vector<double> norms_;
};

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws NumericError on a
/// dimension mismatch or zero vector.
double cosine(std::span<const double> u, std::span<const double> v);

enum class CentroidMode {
  kMean,            // plain mean of the raw vectors
  kNormalizedMean,  // mean of unit-normalized vectors
};

struct TopicSimilarityRow {
  PaperIndex focal = kNoPaper;
  PaperIndex dominant_ref = kNoPaper;
  std::optional<double> sim_focal_dom;
  std::optional<double> sim_dom_rest;
  std::uint32_t n_rest = 0;
  std::uint32_t flags = 0;
};

/// Similarity of the focal to its dominant reference, and of the dominant
/// reference to the centroid of the other references that have vectors.
TopicSimilarityRow topic_similarity(const CorpusGraph& graph, PaperIndex focal, const EmbeddingStore& store,
                                    PaperIndex dominant, CentroidMode mode = CentroidMode::kMean);

}  // namespace citemetrics
