#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citemetrics/corpus.hpp"

namespace citemetrics {

/// Which later papers count toward a focal paper's disruption.
struct CitationWindow {
  enum class Mode { kAllTime, kFixedYears };
  Mode mode = Mode::kAllTime;
  int horizon = 0;  // years after publication, >= 1 when fixed

  static CitationWindow all_time() { return {}; }
  /// Throws UsageError when years < 1.
  static CitationWindow fixed(int years);
  /// "all", "5", "5yr".
  static CitationWindow parse(std::string_view text);
  std::string to_string() const;

  bool admits(int focal_year, int other_year) const {
    return mode == Mode::kAllTime || other_year <= focal_year + horizon;
  }
};

/// Bit flags attached to per-paper results; persisted by name.
enum Flag : std::uint32_t {
  kFlagDUndefined = 1u << 0,
  kFlagNoReferences = 1u << 1,
  kFlagDecompUndefined = 1u << 2,
  kFlagNoDominantRef = 1u << 3,
  kFlagAUndefined = 1u << 4,
  kFlagSelfPairsOnly = 1u << 5,
  kFlagSpanUndefined = 1u << 6,
  kFlagTopicMissing = 1u << 7,
  kFlagTopicRestUndefined = 1u << 8,
  kFlagFewerThanK = 1u << 9,
};

std::string flags_to_string(std::uint32_t flags);
std::uint32_t flags_from_string(std::string_view text);

struct CiterSets {
  std::vector<PaperIndex> a;  // cite focal, none of its references
  std::vector<PaperIndex> b;  // cite focal and at least one reference
  std::vector<PaperIndex> c;  // cite a reference but not focal, published later
};

struct DisruptionResult {
  PaperIndex focal = kNoPaper;
  std::uint32_t n_a = 0;
  std::uint32_t n_b = 0;
  std::uint32_t n_c = 0;
  double d = 0.0;  // valid unless kFlagDUndefined

  // Dominance decomposition.
  std::uint32_t c_p = 0;
  PaperIndex dominant_ref = kNoPaper;
  std::uint32_t c_max = 0;
  double d_local = 0.0;
  double b_dom = 0.0;
  double d_approx = 0.0;  // valid unless kFlagDecompUndefined

  std::uint32_t flags = 0;

  bool d_defined() const { return (flags & kFlagDUndefined) == 0; }
  bool decomposition_defined() const { return (flags & kFlagDecompUndefined) == 0; }
};

/// Reusable per-thread marks so each focal classification is O(local edges).
class DisruptionScratch {
 public:
  explicit DisruptionScratch(std::size_t n) : citer_mark_(n, 0), seen_mark_(n, 0) {}

 private:
  friend struct DisruptionKernel;
  std::uint32_t next_generation();

  std::vector<std::uint32_t> citer_mark_;
  std::vector<std::uint32_t> seen_mark_;
  std::uint32_t generation_ = 0;
};

CiterSets classify_citers(const CorpusGraph& graph, PaperIndex focal, const CitationWindow& window);

/// (N_a - N_b) / (N_a + N_b + N_c) plus the dominance decomposition.
DisruptionResult disruption(const CorpusGraph& graph, PaperIndex focal, const CitationWindow& window);
DisruptionResult disruption(const CorpusGraph& graph, PaperIndex focal, const CitationWindow& window,
                            DisruptionScratch& scratch);

/// Reference with the most citers; ties go to the earlier year, then the
/// lexicographically smaller external id.
struct DominantReference {
  PaperIndex ref = kNoPaper;
  std::uint32_t citations = 0;
};
std::optional<DominantReference> most_cited_reference(const CorpusGraph& graph, PaperIndex focal);

/// Fills c_p, d_local, b_dom, d_approx from counts already in `result`.
void apply_decomposition(DisruptionResult& result, std::optional<DominantReference> dominant);

/// Every paper in the graph, OpenMP-parallel over focal papers.
std::vector<DisruptionResult> disruption_all(const CorpusGraph& graph, const CitationWindow& window);
/// Single-threaded reference for the parallel kernel.
std::vector<DisruptionResult> disruption_all_serial(const CorpusGraph& graph, const CitationWindow& window);

}  // namespace citemetrics
