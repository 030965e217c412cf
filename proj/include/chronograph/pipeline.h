#ifndef CHRONOGRAPH_PIPELINE_H_
#define CHRONOGRAPH_PIPELINE_H_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "chronograph/centrality.h"
#include "chronograph/corpus.h"
#include "chronograph/reports.h"
#include "chronograph/temporal_graph.h"

namespace chronograph {

struct RunConfig {
  // Years to sweep; must lie within the corpus horizon.
  Horizon range;
  PageRankParams pagerank;
  std::size_t k = 50;
  Aggregation method = Aggregation::kSum;
  // Ingroup culture tag; empty means default_culture(edition).
  std::string culture;
  unsigned workers = 1;
  // Years per work unit. Fixed so sums do not depend on the worker count.
  int chunk_years = 64;

  // Throws InputError on any out-of-range value.
  void validate() const;
};

// Top-k of one year plus the links among those k persons.
struct YearRecord {
  Year year = 0;
  std::vector<RankEntry> entries;
  std::vector<Edge> edges;
  bool operator==(const YearRecord&) const = default;
};

inline constexpr std::size_t kReportSizes[] = {10, 50};

struct RunOutputs {
  RunConfig config;
  std::string edition;
  std::string culture;
  CorpusStats corpus_stats;
  std::size_t person_count = 0;
  std::size_t link_count = 0;
  std::int64_t dropped_links = 0;
  int nonempty_year_count = 0;
  std::vector<Year> nonconverged_years;
  // One record per year of config.range, empty years included.
  std::vector<YearRecord> years;
  AllTimeRanking alltime;
  std::vector<CategoryReport> categories;  // one per kReportSizes entry
};

// Year index into RunOutputs::years, for progress callbacks.
using ProgressFn = std::function<void(int done, int total)>;

// Sweep, per-year ranking, all-time aggregation and reports.
RunOutputs run_pipeline(const Corpus& corpus, const RunConfig& config,
                        const ProgressFn& progress = {});

}  // namespace chronograph

#endif  // CHRONOGRAPH_PIPELINE_H_
