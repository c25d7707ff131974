#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citemetrics/corpus.hpp"
#include "citemetrics/semantics.hpp"

namespace citemetrics::synth {

/// Planted structure for one focal paper, recorded at generation time.
struct FocalTruth {
  std::string id;
  double mix = 0.0;  // fraction of cross-field references (innovation corpora)
  std::uint32_t n_a = 0;
  std::uint32_t n_b = 0;
  std::uint32_t n_c = 0;
  std::string dominant_ref;
  double planted_similarity = 0.0;
};

struct SyntheticCorpus {
  std::vector<PaperRecord> records;
  std::vector<std::pair<std::string, std::string>> domain_rows;  // label, domain
  std::vector<std::pair<std::string, std::string>> labels;       // id, theory|method|finding
  std::vector<std::pair<std::string, std::string>> nominations;  // id, disruptive|consolidating
  std::optional<EmbeddingStore> paper_embeddings;
  std::optional<EmbeddingStore> field_embeddings;
  std::vector<FocalTruth> focal;

  DomainMap domain_map() const;
  std::unordered_map<std::string, std::string> label_map() const;
  std::size_t edge_count() const;
};

/// Writes corpus.jsonl, domains.csv and, when present, labels.csv,
/// nominations.csv, paper_embeddings.csv, field_embeddings.csv.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

struct RandomOptions {
  std::size_t papers = 1000;
  double mean_refs = 8.0;
  int year_from = 1980;
  int year_to = 2020;
  std::size_t venues = 20;
  double preferential = 0.5;  // chance a reference copies the target of an earlier edge
  std::uint64_t seed = 1;
};

/// Papers ordered by year, each citing distinct earlier papers. Heavy-tailed
/// in-degrees through copying. Every reference resolves.
SyntheticCorpus random_corpus(const RandomOptions& options);

struct InnovationOptions {
  std::size_t fields = 4;
  std::size_t journals_per_field = 3;
  std::size_t pool_per_field = 150;
  std::size_t focal_years = 3;
  std::size_t focal_per_year = 120;
  int base_year = 1990;
  double version_fraction = 0.1;
  std::uint64_t seed = 7;
};

/// Recombination-heavy versus displacement-heavy focal papers. Each focal
/// draws a mix m: references come from other fields with probability m, and
/// each later citer also cites one of the focal's references with
/// probability 0.1 + 0.8 m. High m therefore raises atypicality and lowers
/// disruption. Includes fields, labels, embeddings, versions and nominations.
SyntheticCorpus innovation_corpus(const InnovationOptions& options);

struct ClusterOptions {
  std::size_t focal = 120;
  std::uint32_t min_a = 40, max_a = 80;
  std::uint32_t min_b = 0, max_b = 3;
  std::uint32_t min_c = 0, max_c = 80;
  std::size_t minor_refs = 3;
  bool plant_similarity = false;  // V-shaped similarity in D, with embeddings
  double similarity_noise = 0.03;
  int base_year = 2000;
  std::uint64_t seed = 11;
};

/// Independent focal clusters: one dominant reference plus minor references
/// cited by nobody else, n_a citers of the focal only, n_b citers of the
/// focal and the dominant reference, n_c later citers of the dominant
/// reference only. The dominant reference therefore carries all type-c
/// overlap.
SyntheticCorpus cluster_corpus(const ClusterOptions& options);

}  // namespace citemetrics::synth
